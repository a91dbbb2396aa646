#include "hymem/runner.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "hymem/allocator.hpp"

namespace hymem {

using json = nlohmann::ordered_json;

TraceSource TraceSource::file(std::string path) {
    TraceSource s;
    s.kind = Kind::File;
    s.label = path;
    s.path = std::move(path);
    return s;
}

TraceSource TraceSource::synthetic(SynthParams p, std::string label) {
    TraceSource s;
    s.kind = Kind::Synthetic;
    s.synth = std::move(p);
    s.label = std::move(label);
    return s;
}

TraceSource TraceSource::in_memory(std::vector<TraceRecord> records, std::string label) {
    TraceSource s;
    s.kind = Kind::Records;
    s.records = std::move(records);
    s.label = std::move(label);
    return s;
}

namespace {

json latency_json(const LatencyStats& s) {
    json j;
    j["count"] = s.count();
    j["mean_cycles"] = s.mean();
    j["p50_cycles"] = s.percentile(50);
    j["p95_cycles"] = s.percentile(95);
    j["p99_cycles"] = s.percentile(99);
    j["max_cycles"] = s.max();
    return j;
}

json config_json(const SimConfig& cfg) {
    json j = json::object();
    std::istringstream in(render_config(cfg));
    for (std::string line; std::getline(in, line);) {
        auto eq = line.find(" = ");
        if (eq != std::string::npos) j[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return j;
}

json counters_json(const CounterSet& c) {
    json j;
    for (Device d : kDevices) {
        const auto& dc = c.of(d);
        json dj;
        dj["read_txns"] = dc.read_txns;
        dj["write_txns"] = dc.write_txns;
        dj["read_bytes"] = dc.read_bytes;
        dj["write_bytes"] = dc.write_bytes;
        dj["read_bytes_human"] = format_bytes(dc.read_bytes);
        dj["write_bytes_human"] = format_bytes(dc.write_bytes);
        dj["dma_read_bytes"] = dc.dma_read_bytes;
        dj["dma_write_bytes"] = dc.dma_write_bytes;
        j[std::string(to_string(d))] = dj;
    }
    j["dma_blocks_moved"] = c.dma_blocks_moved;
    j["swaps_completed"] = c.swaps_completed;
    j["stall_events"] = c.stall_events;
    j["reorder_buffer_highwater"] = c.reorder_buffer_highwater;
    // trailing empty buckets are trimmed; bucket i covers [2^(i-1), 2^i)
    std::size_t last = 0;
    for (std::size_t i = 0; i < c.latency.buckets.size(); ++i)
        if (c.latency.buckets[i] != 0) last = i + 1;
    j["latency_histogram_log2"] =
        std::vector<std::uint64_t>(c.latency.buckets.begin(), c.latency.buckets.begin() + static_cast<long>(last));
    return j;
}

double to_ns(const SimConfig& cfg, Cycles c) {
    return static_cast<double>(c) * static_cast<double>(cfg.cycle_scale.ns_num) /
           static_cast<double>(cfg.cycle_scale.ns_den);
}

} // namespace

RunResult run_simulation(const SimConfig& cfg_in, const TraceSource& source, std::optional<std::uint64_t> seed,
                         const RunHooks& hooks) {
    SimConfig cfg = validate_config(cfg_in);
    if (seed) cfg.seed = *seed;

    HmmuPipeline pipe(cfg);
    RunResult result;

    FramePool pool(cfg);
    json allocs = json::array();
    std::vector<HostPage> workload_pages;
    if (source.kind == TraceSource::Kind::Synthetic) {
        for (const auto& d : source.synth.allocs) {
            const Allocation& a = pool.alloc(d.bytes, d.hint);
            pool.seed(pipe.table(), a);
            workload_pages.insert(workload_pages.end(), a.frames.begin(), a.frames.end());
            json aj;
            aj["name"] = d.name;
            aj["bytes"] = d.bytes;
            aj["hint"] = std::string(to_string(d.hint));
            aj["frames"] = a.frames.size();
            aj["spilled_frames"] = a.spilled;
            json ranges = json::array();
            for (const auto& r : a.ranges) ranges.push_back(json{{"base", to_hex(r.base.value)}, {"bytes", r.bytes}});
            aj["ranges"] = ranges;
            allocs.push_back(aj);
        }
        std::sort(workload_pages.begin(), workload_pages.end());
        result.allocation_spill = pool.spilled_frames();
    }

    Fnv1a digest;
    LatencyStats request_latency;
    pipe.on_response([&](const Response& r, SimTime arrival) {
        request_latency.add(r.completion - arrival);
        if (r.op == Op::Read) {
            digest.update_u64(r.tag);
            digest.update(r.data);
        }
        if (hooks.on_response) hooks.on_response(r, arrival);
    });

    SimTime clock{};
    auto feed = [&](const TraceRecord& rec) {
        if (auto problem = check_record(rec, cfg))
            fail(Errc::ParseError, "record " + std::to_string(result.totals.requests) + ": " + *problem);
        if (result.totals.requests > 0) clock = clock + rec.gap;
        MemoryRequest req;
        req.op = rec.op;
        req.addr = rec.addr;
        req.size = rec.size;
        req.arrival = clock;
        req.tag = result.totals.requests;
        if (rec.op == Op::Write) {
            req.payload = make_payload(cfg.seed, req.tag, rec.size);
            ++result.totals.writes;
            result.totals.write_bytes += rec.size;
        } else {
            ++result.totals.reads;
            result.totals.read_bytes += rec.size;
        }
        ++result.totals.requests;
        if (hooks.on_request) hooks.on_request(req);
        pipe.ingest(std::move(req));
    };

    switch (source.kind) {
    case TraceSource::Kind::File: {
        std::ifstream in(source.path);
        if (!in) fail(Errc::ParseError, "cannot open trace file '" + source.path + "'");
        TraceReader reader(in, cfg);
        while (auto rec = reader.next()) feed(*rec);
        break;
    }
    case TraceSource::Kind::Synthetic: {
        TraceSynthesizer synth(cfg, source.synth, cfg.seed, workload_pages);
        while (auto rec = synth.next()) feed(*rec);
        break;
    }
    case TraceSource::Kind::Records:
        for (const auto& rec : source.records) feed(rec);
        break;
    }

    pipe.run_to_quiescence();

    result.counters = snapshot(pipe.counters());
    result.stats = pipe.stats();
    result.run_length = pipe.now();
    result.image_checksum = pipe.image_checksum();
    result.read_digest = digest.value();
    result.nvm_pages = pipe.table().mapped_pages(Device::NVM);
    result.mapped_pages = pipe.table().mapped_pages(Device::DRAM) + result.nvm_pages;
    result.quiescent = pipe.quiescent();

    json j;
    j["config"] = config_json(cfg);
    json src;
    src["kind"] = source.kind == TraceSource::Kind::File        ? "file"
                  : source.kind == TraceSource::Kind::Synthetic ? "synthetic"
                                                                : "records";
    src["label"] = source.label;
    if (source.kind == TraceSource::Kind::Synthetic) {
        const auto& p = source.synth;
        src["footprint"] = p.footprint;
        src["requests"] = p.requests;
        src["read_fraction"] = p.read_fraction;
        src["locality"] = std::string(to_string(p.locality));
        src["zipf_s"] = p.zipf_s;
        src["request_size"] = p.request_size;
        src["gap"] = p.gap;
        src["cover"] = p.cover;
        src["allocations"] = allocs;
    }
    j["trace"] = src;

    json totals;
    totals["requests"] = result.totals.requests;
    totals["reads"] = result.totals.reads;
    totals["writes"] = result.totals.writes;
    totals["read_bytes"] = result.totals.read_bytes;
    totals["write_bytes"] = result.totals.write_bytes;
    j["trace_totals"] = totals;

    j["run_cycles"] = result.run_length.cycles;
    j["run_ns"] = to_ns(cfg, result.run_length.cycles);
    j["time_unit"] = "simulated cycles";

    json timing;
    for (Device d : kDevices) {
        const auto& t = pipe.timing()[index_of(d)];
        json tj;
        tj["read_cycles"] = t.read_cycles;
        tj["write_cycles"] = t.write_cycles;
        tj["read_stall_cycles"] = t.read_stall;
        tj["write_stall_cycles"] = t.write_stall;
        tj["read_round_trip_cycles"] = t.round_trip(Op::Read);
        tj["write_round_trip_cycles"] = t.round_trip(Op::Write);
        tj["outstanding_slots"] = t.slots;
        timing[std::string(to_string(d))] = tj;
    }
    j["timing"] = timing;

    json policy;
    policy["name"] = std::string(pipe.policy().name());
    policy["migrations_started"] = result.stats.migrations_started;
    policy["migrations_rejected"] = result.stats.migrations_rejected;
    policy["swaps_completed"] = result.counters.swaps_completed;
    policy["dram_pages_mapped"] = pipe.table().mapped_pages(Device::DRAM);
    policy["nvm_pages_mapped"] = result.nvm_pages;
    j["policy"] = policy;

    j["counters"] = counters_json(result.counters);
    if (cfg.report_energy) {
        EnergyEstimate e = energy(result.counters, *cfg.energy_coeffs);
        json ej;
        for (Device d : kDevices) {
            const auto& de = e.device[index_of(d)];
            ej[std::string(to_string(d))] = json{{"read_nj", EnergyEstimate::to_nj(de.read_pj)},
                                                 {"write_nj", EnergyEstimate::to_nj(de.write_pj)}};
        }
        ej["total_pj"] = e.total_pj;
        ej["total_nj"] = EnergyEstimate::to_nj(e.total_pj);
        j["energy"] = ej;
    }

    json lat;
    lat["request"] = latency_json(request_latency);
    for (Device d : kDevices) lat[std::string(to_string(d))] = latency_json(pipe.device_latency(d));
    j["latency"] = lat;

    json pj;
    pj["responses"] = result.stats.responses;
    pj["pieces"] = result.stats.pieces;
    pj["out_of_order_completions"] = result.stats.out_of_order_completions;
    pj["slot_waits"] = json{{"dram", pipe.device(Device::DRAM).slot_waits()},
                            {"nvm", pipe.device(Device::NVM).slot_waits()}};
    pj["quiescent"] = result.quiescent;
    j["pipeline"] = pj;

    j["checksum"] = json{{"memory_image", to_hex(result.image_checksum)}, {"read_data", to_hex(result.read_digest)}};

    result.report = j.dump(2) + "\n";
    return result;
}

std::vector<SweepJob> parse_sweep_plan(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::ParseError, "cannot open sweep plan '" + path + "'");
    std::vector<SweepJob> plan;
    std::size_t lineno = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        SweepJob job;
        job.line = lineno;
        bool any = false;
        for (std::string tok; ls >> tok;) {
            any = true;
            auto eq = tok.find('=');
            if (eq == std::string::npos)
                fail(Errc::ParseError, "sweep plan line " + std::to_string(lineno) + ": expected key=value");
            auto key = tok.substr(0, eq);
            auto value = tok.substr(eq + 1);
            if (key == "config") job.config = value;
            else if (key == "trace") job.trace = value;
            else if (key == "synthetic") job.synthetic = value;
            else if (key == "seed") job.seed = parse_size(value);
            else if (key == "report") job.report = value;
            else fail(Errc::ParseError, "sweep plan line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        if (!any) continue;
        if (job.report.empty() || (job.trace.has_value() == job.synthetic.has_value()))
            fail(Errc::ParseError, "sweep plan line " + std::to_string(lineno) +
                                       ": needs report= and exactly one of trace= or synthetic=");
        plan.push_back(std::move(job));
    }
    return plan;
}

std::vector<SweepOutcome> run_sweep(const std::vector<SweepJob>& plan, unsigned jobs) {
    std::vector<SweepOutcome> out(plan.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < plan.size(); i = next++) {
            const auto& job = plan[i];
            auto& o = out[i];
            o.line = job.line;
            try {
                SimConfig cfg = job.config.empty() ? SimConfig{} : load_config(job.config);
                TraceSource src = job.trace ? TraceSource::file(*job.trace)
                                            : TraceSource::synthetic(parse_synth_spec(*job.synthetic), *job.synthetic);
                RunResult r = run_simulation(cfg, src, job.seed);
                std::ofstream rep(job.report);
                if (!rep) fail(Errc::ParseError, "cannot write report '" + job.report + "'");
                rep << r.report;
                o.message = "ok";
            } catch (const InvariantError& e) {
                o.exit_code = 2;
                o.message = e.what();
            } catch (const std::exception& e) {
                o.exit_code = 1;
                o.message = e.what();
            }
        }
    };
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(plan.size(), 1))));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return out;
}

} // namespace hymem
