#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "hymem/runner.hpp"
#include "json.hpp"
#include "flat_memory.hpp"

using namespace hymem;
using hymem::testing::small_config;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "hymem_runner_test";
    fs::create_directories(dir);
    return dir / name;
}

TraceRecord rec(Op op, std::uint64_t offset, std::uint32_t size = 64, Cycles gap = 1) {
    return TraceRecord{op, HostAddress{SimConfig{}.window_base.value + offset}, size, gap};
}

} // namespace

TEST(Trace, ParseLines) {
    std::string err;
    auto r = parse_trace_line("R 0x1240000040 64", err);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->op, Op::Read);
    EXPECT_EQ(r->addr.value, 0x1240000040u);
    EXPECT_EQ(r->gap, 1u);
    r = parse_trace_line("w 1240001000 8 +12  # comment", err);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->op, Op::Write);
    EXPECT_EQ(r->size, 8u);
    EXPECT_EQ(r->gap, 12u);
    EXPECT_FALSE(parse_trace_line("   # only a comment", err));
    EXPECT_TRUE(err.empty());
    EXPECT_FALSE(parse_trace_line("X 0x0 64", err));
    EXPECT_FALSE(err.empty());
    EXPECT_FALSE(parse_trace_line("R 0x0 48", err));
    EXPECT_FALSE(err.empty());
    EXPECT_FALSE(parse_trace_line("R 0xZZ 64", err));
    EXPECT_FALSE(err.empty());
    EXPECT_FALSE(parse_trace_line("R 0x0 64 12", err));
    EXPECT_FALSE(err.empty());
}

TEST(Trace, FormatRoundTrips) {
    for (const auto& r : {rec(Op::Read, 0x40), rec(Op::Write, 0x1000, 4096, 0), rec(Op::Read, 7, 1, 99)}) {
        std::string err;
        auto back = parse_trace_line(format_record(r), err);
        ASSERT_TRUE(back) << err;
        EXPECT_EQ(*back, r);
    }
}

TEST(Trace, ValidateReportsEveryBadLine) {
    SimConfig cfg;
    std::istringstream in("R 0x1240000000 64\n"
                          "R 0x0 64\n"
                          "bogus\n"
                          "# fine\n"
                          "W 0x1240000000 3\n"
                          "W 0x1240000000 4096\n");
    auto issues = validate_trace(in, cfg);
    ASSERT_EQ(issues.size(), 3u);
    EXPECT_EQ(issues[0].line, 2u);
    EXPECT_EQ(issues[1].line, 3u);
    EXPECT_EQ(issues[2].line, 5u);
}

TEST(Trace, PayloadIsDeterministic) {
    EXPECT_EQ(make_payload(1, 2, 64), make_payload(1, 2, 64));
    EXPECT_NE(make_payload(1, 2, 64), make_payload(1, 3, 64));
    EXPECT_NE(make_payload(1, 2, 64), make_payload(2, 2, 64));
    EXPECT_EQ(make_payload(5, 9, 3).size(), 3u);
}

TEST(Runner, EmptyTrace) {
    RunResult r = run_simulation(SimConfig{}, TraceSource::in_memory({}));
    EXPECT_EQ(r.run_length.cycles, 0u);
    EXPECT_EQ(r.totals.requests, 0u);
    EXPECT_EQ(r.counters, CounterSet{});
    EXPECT_TRUE(r.quiescent);
    auto j = nlohmann::json::parse(r.report);
    EXPECT_EQ(j["trace_totals"]["requests"], 0);
}

TEST(Runner, WriteThenRead) {
    std::vector<TraceRecord> t{rec(Op::Write, 0x80, 64), rec(Op::Read, 0x80, 64)};
    std::vector<Response> seen;
    RunHooks hooks;
    hooks.on_response = [&](const Response& r, SimTime) { seen.push_back(r); };
    RunResult r = run_simulation(SimConfig{}, TraceSource::in_memory(t), 77, hooks);
    ASSERT_EQ(seen.size(), 2u);
    EXPECT_EQ(seen[1].data, make_payload(77, 0, 64));
    EXPECT_EQ(r.totals.read_bytes, 64u);
    EXPECT_EQ(r.totals.write_bytes, 64u);
}

TEST(Runner, ArrivalsFollowGaps) {
    std::vector<TraceRecord> t{rec(Op::Read, 0, 64, 500), rec(Op::Read, 0, 64, 10), rec(Op::Read, 0, 64, 0)};
    std::vector<Cycles> arrivals;
    RunHooks hooks;
    hooks.on_request = [&](const MemoryRequest& m) { arrivals.push_back(m.arrival.cycles); };
    run_simulation(SimConfig{}, TraceSource::in_memory(t), {}, hooks);
    EXPECT_EQ(arrivals, (std::vector<Cycles>{0, 10, 10}));
}

TEST(Runner, CountersMatchTraceSums) {
    std::mt19937_64 rng(4);
    SimConfig cfg = small_config();
    cfg.policy.kind = PolicyKind::Hotness;
    cfg.policy.threshold = 3;
    for (int i = 0; i < 20; ++i) {
        auto t = hymem::testing::random_trace(cfg, rng, 300, 32);
        RunResult r = run_simulation(cfg, TraceSource::in_memory(t), i);
        std::uint64_t rb = 0, wb = 0;
        for (const auto& x : t) (x.op == Op::Read ? rb : wb) += x.size;
        EXPECT_EQ(r.counters.of(Device::DRAM).read_bytes + r.counters.of(Device::NVM).read_bytes, rb);
        EXPECT_EQ(r.counters.of(Device::DRAM).write_bytes + r.counters.of(Device::NVM).write_bytes, wb);
        EXPECT_EQ(r.counters.dma_blocks_moved, 16u * r.counters.swaps_completed);
        EXPECT_EQ(r.stats.responses, t.size());
    }
}

TEST(Runner, ReportIsDeterministic) {
    SimConfig cfg = small_config();
    cfg.policy.kind = PolicyKind::Hotness;
    cfg.policy.threshold = 2;
    std::mt19937_64 rng(9);
    auto t = hymem::testing::random_trace(cfg, rng, 500, 32);
    auto a = run_simulation(cfg, TraceSource::in_memory(t), 3);
    auto b = run_simulation(cfg, TraceSource::in_memory(t), 3);
    EXPECT_EQ(a.report, b.report);
    auto c = run_simulation(cfg, TraceSource::in_memory(t), 4);
    EXPECT_NE(a.report, c.report);
}

TEST(Runner, EnergySectionOnlyWhenRequested) {
    SimConfig cfg;
    auto plain = nlohmann::json::parse(run_simulation(cfg, TraceSource::in_memory({rec(Op::Read, 0)})).report);
    EXPECT_FALSE(plain.contains("energy"));
    cfg.report_energy = true;
    EXPECT_THROW(run_simulation(cfg, TraceSource::in_memory({})), ConfigError);
    cfg.energy_coeffs = std::array<EnergyCoeffs, kNumDevices>{EnergyCoeffs{1, 1}, EnergyCoeffs{2, 4}};
    auto j = nlohmann::json::parse(run_simulation(cfg, TraceSource::in_memory({rec(Op::Read, 0)})).report);
    EXPECT_EQ(j["energy"]["total_pj"], 64);
}

TEST(Runner, FileSourceAndBadRecord) {
    auto path = scratch("bad.trace");
    std::ofstream(path) << "R 0x1240000000 64\nR 0x10 64\n";
    try {
        run_simulation(SimConfig{}, TraceSource::file(path.string()));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::ParseError);
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(Synth, SameSeedSameTrace) {
    SimConfig cfg;
    SynthParams p;
    p.requests = 2000;
    p.locality = Locality::Zipfian;
    EXPECT_EQ(synthesize(cfg, p, 5), synthesize(cfg, p, 5));
    EXPECT_NE(synthesize(cfg, p, 5), synthesize(cfg, p, 6));
}

TEST(Synth, RecordsStayInFootprint) {
    SimConfig cfg;
    for (Locality l : {Locality::Uniform, Locality::Zipfian, Locality::Sequential}) {
        SynthParams p;
        p.footprint = 1 * MiB;
        p.requests = 5000;
        p.locality = l;
        p.request_size = 256;
        std::set<std::uint64_t> pages;
        std::size_t reads = 0;
        for (const auto& r : synthesize(cfg, p, 1)) {
            ASSERT_GE(r.addr.value, cfg.window_base.value);
            ASSERT_LE(r.addr.value + r.size, cfg.window_base.value + p.footprint);
            ASSERT_EQ(r.addr.value % 256, 0u);
            ASSERT_EQ(r.size, 256u);
            pages.insert((r.addr.value - cfg.window_base.value) / 4096);
            reads += r.op == Op::Read;
        }
        EXPECT_EQ(pages.size(), 256u) << to_string(l);
        EXPECT_NEAR(static_cast<double>(reads) / 5000.0, 0.7, 0.05);
    }
}

TEST(Synth, ZipfConcentratesAccesses) {
    SimConfig cfg;
    SynthParams p;
    p.footprint = 4 * MiB;
    p.requests = 20000;
    p.locality = Locality::Zipfian;
    p.cover = false;
    std::map<std::uint64_t, int> hits;
    for (const auto& r : synthesize(cfg, p, 3)) ++hits[r.addr.value / 4096];
    int top = 0;
    for (const auto& [page, n] : hits) top = std::max(top, n);
    EXPECT_GT(top, 20000 / 1024 * 20);
}

TEST(Synth, FootprintTooLarge) {
    SimConfig cfg = small_config();
    SynthParams p;
    p.footprint = cfg.window_size() + 1;
    try {
        TraceSynthesizer s(cfg, p, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::FootprintTooLarge);
    }
}

TEST(Synth, ParseSpecs) {
    auto p = parse_synth_spec("footprint=602MB, requests=1000, read_fraction=0.5, locality=zipf, alloc=heap:1MB:nvm");
    EXPECT_EQ(p.footprint, 602 * MiB);
    EXPECT_EQ(p.requests, 1000u);
    EXPECT_EQ(p.locality, Locality::Zipfian);
    ASSERT_EQ(p.allocs.size(), 1u);
    EXPECT_EQ(p.allocs[0].hint, AllocationHint::PreferNVM);
    EXPECT_THROW(parse_synth_spec("read_fraction=2"), Error);
    EXPECT_THROW(parse_synth_spec("colour=blue"), Error);

    auto path = scratch("w.workload");
    std::ofstream(path) << "# mcf-like\nrequests = 10\nalloc heap 64KB dram\nalloc cold 1MB nvm\n";
    auto q = parse_synth_spec(path.string());
    EXPECT_EQ(q.requests, 10u);
    ASSERT_EQ(q.allocs.size(), 2u);
    EXPECT_EQ(q.allocs[1].bytes, 1 * MiB);
}

TEST(Runner, AllocationsSeedPlacement) {
    SimConfig cfg = small_config(16, 64);
    auto p = parse_synth_spec("requests=400,alloc=hot:32KB:dram,alloc=cold:64KB:nvm");
    RunResult r = run_simulation(cfg, TraceSource::synthetic(p), 1);
    EXPECT_EQ(r.mapped_pages, 24u);
    EXPECT_EQ(r.nvm_pages, 16u);
    auto j = nlohmann::json::parse(r.report);
    EXPECT_EQ(j["trace"]["allocations"].size(), 2u);
}

TEST(Sweep, RunsEveryJob) {
    auto cfg_path = scratch("sweep.cfg");
    std::ofstream(cfg_path) << "dram.capacity = 64KB\nnvm.capacity = 256KB\n";
    auto plan_path = scratch("plan.txt");
    {
        std::ofstream plan(plan_path);
        for (int i = 0; i < 4; ++i)
            plan << "config=" << cfg_path.string() << " synthetic=footprint=128KB,requests=300 seed=" << i
                 << " report=" << scratch("r" + std::to_string(i) + ".json").string() << "\n";
        plan << "# comment\n\n";
        plan << "synthetic=footprint=2GB seed=1 report=" << scratch("bad.json").string() << "\n";
    }
    auto jobs = parse_sweep_plan(plan_path.string());
    ASSERT_EQ(jobs.size(), 5u);
    auto out = run_sweep(jobs, 3);
    for (int i = 0; i < 4; ++i) {
        EXPECT_EQ(out[i].exit_code, 0) << out[i].message;
        EXPECT_TRUE(fs::exists(scratch("r" + std::to_string(i) + ".json")));
    }
    EXPECT_EQ(out[4].exit_code, 1);
    EXPECT_EQ(out[4].line, 7u);

    auto again = run_sweep({jobs[0]}, 1);
    std::ifstream a(scratch("r0.json"));
    std::stringstream buf;
    buf << a.rdbuf();
    EXPECT_EQ(nlohmann::json::parse(buf.str())["trace_totals"]["requests"], 300);
}
