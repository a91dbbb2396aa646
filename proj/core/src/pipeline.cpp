#include "hymem/pipeline.hpp"

#include <algorithm>
#include <cstring>
#include <iterator>
#include <string>

namespace hymem {

Header* HeaderFifo::find(Tag tag) {
    if (q_.empty() || tag < q_.front().tag) return nullptr;
    const Tag idx = tag - q_.front().tag;
    if (idx >= q_.size()) return nullptr;
    return &q_[idx];
}

void ReorderBuffer::insert(Response r) {
    if (r.tag < cursor_)
        fail(Errc::DuplicateCompletion, "response for tag " + std::to_string(r.tag) + " was already released");
    const Tag idx = r.tag - cursor_;
    if (idx >= slots_.size()) slots_.resize(idx + 1);
    if (slots_[idx]) fail(Errc::DuplicateCompletion, "duplicate response for tag " + std::to_string(r.tag));
    slots_[idx] = std::move(r);
    ++held_;
}

std::vector<Response> ReorderBuffer::release() {
    std::vector<Response> out;
    while (!slots_.empty() && slots_.front()) {
        out.push_back(std::move(*slots_.front()));
        slots_.pop_front();
        ++cursor_;
        --held_;
    }
    return out;
}

HmmuPipeline::HmmuPipeline(const SimConfig& cfg) : HmmuPipeline(cfg, calibrate_timing(validate_config(cfg))) {}

HmmuPipeline::HmmuPipeline(const SimConfig& cfg, const std::array<DeviceTiming, kNumDevices>& timing,
                           std::unique_ptr<Policy> policy)
    : cfg_(validate_config(cfg)),
      timing_(timing),
      table_(cfg_),
      memory_(cfg_.page_size),
      dma_(cfg_, timing_),
      policy_(policy ? std::move(policy) : make_policy(cfg_)),
      devices_{DeviceState(timing_[0]), DeviceState(timing_[1])} {}

Tag HmmuPipeline::ingest(MemoryRequest req) {
    if (req.arrival < last_arrival_)
        fail(Errc::InvalidValue, "request arrival " + std::to_string(req.arrival.cycles) +
                                     " precedes the previous arrival " + std::to_string(last_arrival_.cycles));
    if (req.size == 0 || !is_pow2(req.size) || req.size > 4096)
        fail(Errc::InvalidValue, "request size " + std::to_string(req.size) + " is not a power of two in 1..4096");
    if (!cfg_.in_window(req.addr) || req.addr.value + req.size > cfg_.window_end())
        fail(Errc::OutOfWindow, "request at " + to_hex(req.addr.value) + " is outside the hybrid window");
    if (req.is_write() && req.payload.size() != req.size)
        fail(Errc::InvalidValue, "write payload length does not match its size");

    advance_to(req.arrival);
    last_arrival_ = req.arrival;

    Header h;
    h.tag = next_tag_++;
    h.op = req.op;
    h.addr = req.addr;
    h.size = req.size;
    h.arrival = req.arrival;
    const std::uint64_t first_page = (req.addr.value - cfg_.window_base.value) / cfg_.page_size;
    const std::uint64_t last_page = (req.addr.value + req.size - 1 - cfg_.window_base.value) / cfg_.page_size;
    h.subs = static_cast<std::uint32_t>(last_page - first_page + 1);
    h.sub_done.assign(h.subs, false);
    if (req.is_write()) h.payload = std::move(req.payload);
    else h.data.assign(req.size, 0);

    const Tag tag = h.tag;
    headers_.push(std::move(h));
    ++stats_.requests;
    events_.push(req.arrival + cfg_.control_delay, Event{Kind::Dispatch, Device::DRAM, false, 0, tag, req.arrival});
    return tag;
}

void HmmuPipeline::advance_to(SimTime t) {
    while (!events_.empty() && events_.top().time <= t) process(events_.pop());
    if (t > now_) now_ = t;
}

void HmmuPipeline::run_to_quiescence() {
    while (!events_.empty()) process(events_.pop());
    if (!headers_.empty() || dma_.active_jobs() != 0)
        throw InvariantError("event queue drained with " + std::to_string(headers_.size()) +
                             " requests and " + std::to_string(dma_.active_jobs()) + " swaps still in flight");
}

void HmmuPipeline::process(const EventQueue<Event>::Entry& e) {
    if (e.time < now_) throw InvariantError("event scheduled in the past");
    now_ = e.time;
    const Event& ev = e.payload;
    switch (ev.kind) {
    case Kind::Dispatch: dispatch(ev.id); break;
    case Kind::DeviceDone:
        device_latency_[index_of(ev.device)].add(now_ - ev.arrival);
        if (!ev.posted) complete(ev.id, ev.sub);
        break;
    case Kind::BlockDone: block_done(ev.id); break;
    }
}

void HmmuPipeline::dispatch(Tag tag) {
    Header* h = headers_.find(tag);
    if (h == nullptr) throw InvariantError("dispatch of unknown tag " + std::to_string(tag));

    MemoryRequest whole;
    whole.op = h->op;
    whole.addr = h->addr;
    whole.size = h->size;
    whole.arrival = h->arrival;
    whole.tag = h->tag;
    whole.payload = std::move(h->payload);
    auto pieces = split_request(whole, cfg_.page_size);
    if (pieces.size() != h->subs) throw InvariantError("piece count changed between ingest and dispatch");

    for (auto& piece : pieces) {
        ++stats_.pieces;
        route_piece(piece, h);
    }
    if (cfg_.posted_writes && h->op == Op::Write) {
        const std::uint32_t subs = h->subs; // h may be released by the last complete()
        for (std::uint32_t s = 0; s < subs; ++s) complete(tag, s);
    }
}

bool HmmuPipeline::route_piece(MemoryRequest& piece, Header* h) {
    const HostPage page = table_.page_of(piece.addr);
    if (!table_.entry(page)) {
        // every free frame may be reserved by moves; wait for one to finish
        const bool no_frame = table_.free_frames(Device::DRAM) == 0 && table_.free_frames(Device::NVM) == 0;
        if ((no_frame || !frame_waiters_.empty()) && dma_.active_jobs() != 0) {
            record(counters_, event::Stall{});
            frame_waiters_.push_back(std::move(piece));
            return false;
        }
    }
    table_.lookup_or_touch(piece.addr);
    PolicyAction action = policy_->on_access(piece, now_, table_, dma_);
    service_piece(piece, h);
    if (action.migrate) start_migration(*action.migrate);
    return true;
}

bool HmmuPipeline::service_piece(MemoryRequest& piece, Header* h, bool resumed) {
    const HostPage page = table_.page_of(piece.addr);
    const SwapJob* job = dma_.job_for(page);
    if (job == nullptr) {
        access(piece, {Segment{table_.lookup(piece.addr), 0, piece.size}}, h);
        return true;
    }
    // pieces behind a stalled one keep their order
    if (!resumed) {
        if (auto it = stalled_.find(job->id); it != stalled_.end() && !it->second.empty()) {
            record(counters_, event::Stall{});
            it->second.push_back(std::move(piece));
            return false;
        }
    }
    // each DMA block of the piece is routed on its own
    const std::uint64_t first = table_.offset_in_page(piece.addr);
    const std::uint64_t end = first + piece.size;
    std::vector<Segment> segments;
    for (std::uint64_t off = first; off < end;) {
        const std::uint64_t stop = std::min(end, (off / cfg_.dma_block + 1) * cfg_.dma_block);
        DevicePage frame{};
        switch (resolve_conflict(off, *job, cfg_.dma_block)) {
        case ConflictDecision::StallUntilBlockDone:
            record(counters_, event::Stall{});
            stalled_[job->id].push_back(std::move(piece));
            return false;
        case ConflictDecision::Destination: frame = job->destination_of(page); break;
        case ConflictDecision::Source: frame = job->source_of(page); break;
        }
        segments.push_back(Segment{DeviceAddress{frame.device, frame.page * cfg_.page_size + off},
                                   static_cast<std::uint32_t>(off - first), static_cast<std::uint32_t>(stop - off)});
        off = stop;
    }
    access(piece, segments, h);
    return true;
}

void HmmuPipeline::access(const MemoryRequest& piece, const std::vector<Segment>& segments, Header* h) {
    if (!piece.is_write() && h == nullptr)
        throw InvariantError("read piece of tag " + std::to_string(piece.tag) + " has no header");
    SimTime done{};
    Device last = Device::DRAM;
    for (const Segment& s : segments) {
        if (piece.is_write()) {
            memory_.write(s.at, std::span<const std::uint8_t>(piece.payload.data() + s.skip, s.len));
        } else {
            const std::uint64_t off = piece.addr.value - h->addr.value + s.skip;
            memory_.read(s.at, std::span<std::uint8_t>(h->data.data() + off, s.len));
        }
        record(counters_, event::DeviceAccess{s.at.device, piece.op, s.len, false});
        SimTime t = devices_[index_of(s.at.device)].service(piece.op, now_);
        if (t >= done) {
            done = t;
            last = s.at.device;
        }
    }
    const bool posted = cfg_.posted_writes && piece.is_write();
    events_.push(done, Event{Kind::DeviceDone, last, posted, piece.sub, piece.tag, now_});
}

void HmmuPipeline::start_migration(const MigrateDirective& m) {
    try {
        const SwapJob& job = dma_.start_swap(m.page_a, m.page_b, table_, now_);
        ++stats_.migrations_started;
        events_.push(job.next_block_done, Event{Kind::BlockDone, Device::DRAM, false, 0, job.id, now_});
    } catch (const Error&) {
        ++stats_.migrations_rejected;
    }
}

void HmmuPipeline::block_done(JobId id) {
    const SwapJob* job = dma_.job(id);
    if (job == nullptr) throw InvariantError("block completion for unknown DMA job " + std::to_string(id));
    const DevicePage fa = job->frame_a;
    const DevicePage fb = job->frame_b;

    BlockStep step = dma_.step_block(id, now_, table_, memory_);
    const std::uint64_t blk = cfg_.dma_block;
    record(counters_, event::DmaBlockMove{2});
    for (DevicePage f : {fa, fb}) {
        record(counters_, event::DeviceAccess{f.device, Op::Read, blk, true});
        record(counters_, event::DeviceAccess{f.device, Op::Write, blk, true});
    }
    if (step.finished) ++counters_.swaps_completed;

    if (auto it = stalled_.find(id); it != stalled_.end()) {
        auto waiting = std::move(it->second);
        stalled_.erase(it);
        // posted writes may have been released already; they need no header
        for (std::size_t i = 0; i < waiting.size(); ++i) {
            if (service_piece(waiting[i], headers_.find(waiting[i].tag), true)) continue;
            auto& queue = stalled_[id];
            std::move(waiting.begin() + static_cast<std::ptrdiff_t>(i) + 1, waiting.end(), std::back_inserter(queue));
            break;
        }
    }
    if (step.finished && !frame_waiters_.empty()) {
        auto waiting = std::move(frame_waiters_);
        frame_waiters_.clear();
        for (auto& piece : waiting) route_piece(piece, headers_.find(piece.tag));
    }
    if (step.next) events_.push(*step.next, Event{Kind::BlockDone, Device::DRAM, false, 0, id, now_});
}

void HmmuPipeline::complete(Tag tag, std::uint32_t sub, std::span<const std::uint8_t> data) {
    Header* h = headers_.find(tag);
    if (h == nullptr || h->assembled) fail(Errc::UnknownTag, "completion for tag " + std::to_string(tag) + " not in flight");
    if (sub >= h->subs) fail(Errc::UnknownTag, "tag " + std::to_string(tag) + " has no piece " + std::to_string(sub));
    if (h->sub_done[sub])
        fail(Errc::DuplicateCompletion, "piece " + std::to_string(sub) + " of tag " + std::to_string(tag) +
                                            " completed twice");
    if (!data.empty()) {
        if (h->op != Op::Read) fail(Errc::InvalidValue, "completion data supplied for a write");
        // piece `sub` starts at the sub-th page boundary crossing
        std::uint64_t start = 0;
        std::uint64_t addr = h->addr.value;
        for (std::uint32_t s = 0; s < sub; ++s) {
            std::uint64_t room = cfg_.page_size - ((addr - cfg_.window_base.value) % cfg_.page_size);
            start += room;
            addr += room;
        }
        if (start + data.size() > h->data.size()) fail(Errc::InvalidValue, "completion data overruns the request");
        std::memcpy(h->data.data() + start, data.data(), data.size());
    }
    h->sub_done[sub] = true;
    if (++h->subs_done < h->subs) return;

    h->assembled = true;
    if (tag != rob_.cursor()) ++stats_.out_of_order_completions;
    Response r;
    r.tag = tag;
    r.op = h->op;
    if (h->op == Op::Read) r.data = std::move(h->data);
    r.completion = now_;
    rob_.insert(std::move(r));
    auto released = drain(now_);
    record(counters_, event::BufferDepth{rob_.held()});
    if (!callback_) std::move(released.begin(), released.end(), std::back_inserter(output_));
}

std::vector<Response> HmmuPipeline::drain(SimTime now) {
    auto released = rob_.release();
    for (auto& r : released) {
        if (headers_.empty() || headers_.front().tag != r.tag)
            throw InvariantError("header FIFO head does not match released tag " + std::to_string(r.tag));
        const SimTime arrival = headers_.front().arrival;
        headers_.pop_front();
        r.completion = now;
        record(counters_, event::ResponseLatency{now - arrival});
        ++stats_.responses;
        if (callback_) callback_(r, arrival);
    }
    return released;
}

} // namespace hymem
