#include "hymem/dma_engine.hpp"

#include <algorithm>
#include <string>

#include "hymem/physical_memory.hpp"

namespace hymem {

std::string_view to_string(ConflictDecision d) {
    switch (d) {
    case ConflictDecision::Source: return "source";
    case ConflictDecision::Destination: return "destination";
    case ConflictDecision::StallUntilBlockDone: return "stall";
    }
    return "?";
}

ConflictDecision resolve_conflict(std::uint64_t offset, const SwapJob& job, std::uint64_t dma_block) {
    if (job.state == SwapState::Done) return ConflictDecision::Destination;
    const std::uint64_t block = offset / dma_block;
    if (block < job.progress) return ConflictDecision::Destination;
    if (job.in_flight && block == job.progress) return ConflictDecision::StallUntilBlockDone;
    return ConflictDecision::Source;
}

BlockTiming block_timing(const std::array<DeviceTiming, kNumDevices>& timing, Device a, Device b,
                         std::uint32_t buffer_blocks) {
    const auto& ta = timing[index_of(a)];
    const auto& tb = timing[index_of(b)];
    const Cycles read = std::max(ta.access(Op::Read), tb.access(Op::Read));
    const Cycles write = std::max(ta.access(Op::Write), tb.access(Op::Write));
    BlockTiming out;
    out.first = read + write;
    // two staging blocks let the next read overlap the previous write
    out.interval = buffer_blocks >= 2 ? std::max(read, write) : read + write;
    return out;
}

DmaEngine::DmaEngine(const SimConfig& cfg, const std::array<DeviceTiming, kNumDevices>& timing)
    : page_size_(cfg.page_size),
      dma_block_(cfg.dma_block),
      blocks_per_page_(static_cast<std::uint32_t>(cfg.blocks_per_page())),
      buffer_blocks_(cfg.dma_buffer_blocks),
      max_jobs_(cfg.dma_max_jobs),
      timing_(timing) {}

const SwapJob* DmaEngine::job_for(HostPage page) const {
    for (const auto& j : jobs_)
        if (j.covers(page)) return &j;
    return nullptr;
}

const SwapJob* DmaEngine::job(JobId id) const {
    for (const auto& j : jobs_)
        if (j.id == id) return &j;
    return nullptr;
}

SwapJob* DmaEngine::find(JobId id) {
    for (auto& j : jobs_)
        if (j.id == id) return &j;
    return nullptr;
}

const SwapJob& DmaEngine::start_swap(HostPage a, std::optional<HostPage> b, RedirectionTable& table, SimTime now) {
    if (b && *b == a) fail(Errc::SamePage, "cannot swap host page " + std::to_string(a) + " with itself");
    if (swapping(a) || (b && swapping(*b)))
        fail(Errc::SwapInProgress, "a swap is already in progress for host page " +
                                       std::to_string(swapping(a) ? a : *b));
    if (!can_start()) fail(Errc::SwapInProgress, "all DMA job slots are busy");
    auto fa = table.entry(a);
    if (!fa) fail(Errc::UnmappedPage, "host page " + std::to_string(a) + " is unmapped");

    SwapJob job;
    job.page_a = a;
    job.page_b = b;
    job.frame_a = *fa;
    if (b) {
        auto fb = table.entry(*b);
        if (!fb) fail(Errc::UnmappedPage, "host page " + std::to_string(*b) + " is unmapped");
        if (fb->device == fa->device)
            fail(Errc::SameDevice, "host pages " + std::to_string(a) + " and " + std::to_string(*b) +
                                       " are on the same device");
        job.frame_b = *fb;
    } else {
        auto reserved = table.reserve_frame(other(fa->device));
        if (!reserved)
            fail(Errc::OutOfMemory, "no free frame on " + std::string(to_string(other(fa->device))) + " for move");
        job.frame_b = *reserved;
    }
    job.id = next_id_++;
    job.blocks = blocks_per_page_;
    job.progress = 0;
    job.in_flight = true;
    job.state = job.blocks == 1 ? SwapState::Draining : SwapState::Active;
    job.started = now;
    job.next_block_done = now + block_timing(timing_, job.frame_a.device, job.frame_b.device, buffer_blocks_).first;
    jobs_.push_back(job);
    return jobs_.back();
}

BlockStep DmaEngine::step_block(JobId id, SimTime now, RedirectionTable& table, PhysicalMemory& memory) {
    SwapJob* job = find(id);
    if (job == nullptr || !job->in_flight || job->progress >= job->blocks)
        throw InvariantError("step_block on job " + std::to_string(id) + " with no block in flight");

    BlockStep step;
    step.block = job->progress;
    const std::uint64_t off = static_cast<std::uint64_t>(job->progress) * dma_block_;
    memory.exchange(DeviceAddress{job->frame_a.device, job->frame_a.page * page_size_ + off},
                    DeviceAddress{job->frame_b.device, job->frame_b.page * page_size_ + off}, dma_block_);
    ++job->progress;

    if (job->progress < job->blocks) {
        auto bt = block_timing(timing_, job->frame_a.device, job->frame_b.device, buffer_blocks_);
        job->next_block_done = now + bt.interval;
        if (job->progress + 1 == job->blocks) job->state = SwapState::Draining;
        step.next = job->next_block_done;
        return step;
    }

    job->in_flight = false;
    job->state = SwapState::Done;
    if (job->page_b) {
        table.commit_swap(job->page_a, *job->page_b);
    } else {
        table.commit_move(job->page_a, job->frame_b);
        // freed frames read as zero
        memory.clear(job->frame_a);
    }
    jobs_.erase(std::find_if(jobs_.begin(), jobs_.end(), [&](const SwapJob& j) { return j.id == id; }));
    step.finished = true;
    return step;
}

} // namespace hymem
