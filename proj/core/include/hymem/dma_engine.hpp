#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "hymem/config.hpp"
#include "hymem/device_timing.hpp"
#include "hymem/placement.hpp"
#include "hymem/types.hpp"

namespace hymem {

class PhysicalMemory;

enum class SwapState : std::uint8_t { Active, Draining, Done };

using JobId = std::uint64_t;

/// An in-flight exchange of two device pages, block by block.
///
/// `frame_a` holds `page_a` at job start. `frame_b` holds `page_b`, or is a
/// reserved free frame when the job moves `page_a` to the other device.
/// Blocks below `progress` have been exchanged; block `progress` is being
/// exchanged while `in_flight` is set; the rest are still at their source.
struct SwapJob {
    JobId id = 0;
    HostPage page_a = 0;
    std::optional<HostPage> page_b;
    DevicePage frame_a;
    DevicePage frame_b;
    std::uint32_t progress = 0;
    std::uint32_t blocks = 0;
    bool in_flight = false;
    SwapState state = SwapState::Active;
    SimTime started;
    SimTime next_block_done;

    bool covers(HostPage p) const { return p == page_a || (page_b && *page_b == p); }
    /// Frame currently holding the not-yet-moved blocks of `p`.
    DevicePage source_of(HostPage p) const { return p == page_a ? frame_a : frame_b; }
    /// Frame that will hold `p` once the job is done.
    DevicePage destination_of(HostPage p) const { return p == page_a ? frame_b : frame_a; }
};

enum class ConflictDecision : std::uint8_t { Source, Destination, StallUntilBlockDone };

std::string_view to_string(ConflictDecision d);

/// Where a page-local access to a page under swap must go. `offset` is the
/// byte offset within the page.
ConflictDecision resolve_conflict(std::uint64_t offset, const SwapJob& job, std::uint64_t dma_block);

/// Time to exchange one block between frames on `a` and `b`. Reads from
/// both sources overlap, as do writes to both destinations.
struct BlockTiming {
    Cycles first = 0;    // latency of the first block
    Cycles interval = 0; // spacing of later blocks once the buffer is primed
};
BlockTiming block_timing(const std::array<DeviceTiming, kNumDevices>& timing, Device a, Device b,
                         std::uint32_t buffer_blocks);

struct BlockStep {
    std::uint32_t block = 0;      // index just exchanged
    bool finished = false;        // job reached Done and the table was updated
    std::optional<SimTime> next;  // completion time of the next block
};

/// Swap engine with up to `max_jobs` concurrent jobs on disjoint pages.
class DmaEngine final : public SwapStatus {
public:
    DmaEngine(const SimConfig& cfg, const std::array<DeviceTiming, kNumDevices>& timing);

    /// Registers a job and starts block 0. Without `b` the job moves `a`
    /// into the lowest free frame of the other device. Throws SamePage,
    /// SameDevice, SwapInProgress, UnmappedPage or OutOfMemory.
    const SwapJob& start_swap(HostPage a, std::optional<HostPage> b, RedirectionTable& table, SimTime now);

    /// Exchanges the in-flight block of `job` and advances its progress.
    /// Finishing the last block commits the new mapping to `table`.
    BlockStep step_block(JobId job, SimTime now, RedirectionTable& table, PhysicalMemory& memory);

    const SwapJob* job_for(HostPage page) const;
    const SwapJob* job(JobId id) const;
    std::size_t active_jobs() const { return jobs_.size(); }

    bool swapping(HostPage page) const override { return job_for(page) != nullptr; }
    bool can_start() const override { return jobs_.size() < max_jobs_; }

    std::uint64_t dma_block() const { return dma_block_; }
    std::uint32_t blocks_per_page() const { return blocks_per_page_; }
    std::uint64_t jobs_started() const { return next_id_; }

private:
    SwapJob* find(JobId id);

    std::uint64_t page_size_;
    std::uint64_t dma_block_;
    std::uint32_t blocks_per_page_;
    std::uint32_t buffer_blocks_;
    std::uint32_t max_jobs_;
    std::array<DeviceTiming, kNumDevices> timing_;
    std::vector<SwapJob> jobs_; // active only; small
    JobId next_id_ = 0;
};

} // namespace hymem
