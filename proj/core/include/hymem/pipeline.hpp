#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hymem/config.hpp"
#include "hymem/device_timing.hpp"
#include "hymem/dma_engine.hpp"
#include "hymem/event_queue.hpp"
#include "hymem/physical_memory.hpp"
#include "hymem/placement.hpp"
#include "hymem/telemetry.hpp"
#include "hymem/types.hpp"

namespace hymem {

/// One in-flight host request, kept in arrival order until its response
/// leaves the pipeline.
struct Header {
    Tag tag = 0;
    Op op = Op::Read;
    HostAddress addr;
    std::uint32_t size = 0;
    SimTime arrival;
    std::uint32_t subs = 0;
    std::uint32_t subs_done = 0;
    std::vector<bool> sub_done;
    Bytes payload; // writes, until dispatched
    Bytes data;    // reads, filled as pieces are serviced
    bool assembled = false;
};

class HeaderFifo {
public:
    void push(Header h) { q_.push_back(std::move(h)); }
    void pop_front() { q_.pop_front(); }
    const Header& front() const { return q_.front(); }
    bool empty() const { return q_.empty(); }
    std::size_t size() const { return q_.size(); }
    Header* find(Tag tag);

private:
    std::deque<Header> q_;
};

/// Holds completed responses until every older tag has completed, then
/// releases them in tag order.
class ReorderBuffer {
public:
    explicit ReorderBuffer(Tag first = 0) : cursor_(first) {}

    /// Throws DuplicateCompletion for a tag already released or already held.
    void insert(Response r);
    /// Pops the unbroken run of completed responses starting at the cursor.
    std::vector<Response> release();

    Tag cursor() const { return cursor_; }
    std::size_t held() const { return held_; }

private:
    Tag cursor_;
    std::size_t held_ = 0;
    std::deque<std::optional<Response>> slots_; // slots_[i] holds tag cursor_ + i
};

struct PipelineStats {
    std::uint64_t requests = 0;
    std::uint64_t pieces = 0;
    std::uint64_t responses = 0;
    std::uint64_t out_of_order_completions = 0; // assembled while an older tag was outstanding
    std::uint64_t migrations_started = 0;
    std::uint64_t migrations_rejected = 0;
};

using ResponseCallback = std::function<void(const Response&, SimTime arrival)>;

/// The HMMU request path: ingestion with a header FIFO, policy-driven
/// routing to the device models or the DMA engine, and tag-ordered release.
///
/// Data moves at each piece's service instant (dispatch, or the end of a
/// DMA stall); device timing only decides when the response is ready.
class HmmuPipeline {
public:
    explicit HmmuPipeline(const SimConfig& cfg);
    HmmuPipeline(const SimConfig& cfg, const std::array<DeviceTiming, kNumDevices>& timing,
                 std::unique_ptr<Policy> policy = nullptr);

    HmmuPipeline(const HmmuPipeline&) = delete;
    HmmuPipeline& operator=(const HmmuPipeline&) = delete;

    /// Accepts a request arriving at `req.arrival` (never earlier than the
    /// previous arrival), first processing every event due by then. Assigns
    /// and returns the next tag. Throws OutOfWindow or InvalidValue.
    Tag ingest(MemoryRequest req);

    /// Processes every event with time <= t.
    void advance_to(SimTime t);
    /// Runs until no events remain.
    void run_to_quiescence();

    /// Marks piece `sub` of `tag` serviced; `data` (reads only) overrides the
    /// bytes captured at dispatch. Throws UnknownTag or DuplicateCompletion.
    void complete(Tag tag, std::uint32_t sub, std::span<const std::uint8_t> data = {});

    /// Releases every response that is an unbroken tag prefix, stamping
    /// `now` as completion, and returns them. The event loop calls this after
    /// each assembly.
    std::vector<Response> drain(SimTime now);

    /// Receives each released response. Without a callback, responses
    /// released by the event loop collect until take_responses().
    void on_response(ResponseCallback cb) { callback_ = std::move(cb); }
    std::vector<Response> take_responses() { return std::exchange(output_, {}); }

    SimTime now() const { return now_; }
    bool quiescent() const {
        return events_.empty() && headers_.empty() && dma_.active_jobs() == 0 && frame_waiters_.empty();
    }
    std::size_t in_flight() const { return headers_.size(); }
    const HeaderFifo& headers() const { return headers_; }
    const ReorderBuffer& reorder_buffer() const { return rob_; }

    const SimConfig& config() const { return cfg_; }
    const std::array<DeviceTiming, kNumDevices>& timing() const { return timing_; }
    RedirectionTable& table() { return table_; }
    const RedirectionTable& table() const { return table_; }
    PhysicalMemory& memory() { return memory_; }
    const PhysicalMemory& memory() const { return memory_; }
    const DmaEngine& dma() const { return dma_; }
    const Policy& policy() const { return *policy_; }
    const CounterSet& counters() const { return counters_; }
    const PipelineStats& stats() const { return stats_; }
    /// Per-device latency from issue at the device port to device completion.
    const LatencyStats& device_latency(Device d) const { return device_latency_[index_of(d)]; }
    const DeviceState& device(Device d) const { return devices_[index_of(d)]; }

    std::uint64_t image_checksum() const { return host_image_checksum(table_, memory_); }

private:
    enum class Kind : std::uint8_t { Dispatch, DeviceDone, BlockDone };
    struct Event {
        Kind kind;
        Device device = Device::DRAM;
        bool posted = false;
        std::uint32_t sub = 0;
        std::uint64_t id = 0; // tag or job id
        SimTime arrival;
    };

    /// Part of a piece that lands in one device location.
    struct Segment {
        DeviceAddress at;
        std::uint32_t skip = 0; // bytes into the piece
        std::uint32_t len = 0;
    };

    void process(const EventQueue<Event>::Entry& e);
    void dispatch(Tag tag);
    /// Places, classifies and services one piece; returns false if it has to
    /// wait for a DMA move to free a frame.
    bool route_piece(MemoryRequest& piece, Header* h);
    /// Routes one piece, honoring an active swap on its page; returns false
    /// if it had to wait for the in-flight DMA block.
    bool service_piece(MemoryRequest& piece, Header* h, bool resumed = false);
    void access(const MemoryRequest& piece, const std::vector<Segment>& segments, Header* h);
    void block_done(JobId job);
    void start_migration(const MigrateDirective& m);

    SimConfig cfg_;
    std::array<DeviceTiming, kNumDevices> timing_;
    RedirectionTable table_;
    PhysicalMemory memory_;
    DmaEngine dma_;
    std::unique_ptr<Policy> policy_;
    std::array<DeviceState, kNumDevices> devices_;

    EventQueue<Event> events_;
    HeaderFifo headers_;
    ReorderBuffer rob_;
    std::unordered_map<JobId, std::vector<MemoryRequest>> stalled_;
    std::vector<MemoryRequest> frame_waiters_;

    SimTime now_{};
    SimTime last_arrival_{};
    Tag next_tag_ = 0;
    ResponseCallback callback_;
    std::vector<Response> output_;

    CounterSet counters_;
    PipelineStats stats_;
    std::array<LatencyStats, kNumDevices> device_latency_;
};

} // namespace hymem
