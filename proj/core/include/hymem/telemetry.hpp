#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <variant>

#include "hymem/config.hpp"
#include "hymem/types.hpp"

namespace hymem {

struct DeviceCounters {
    // demand traffic
    std::uint64_t read_txns = 0;
    std::uint64_t write_txns = 0;
    std::uint64_t read_bytes = 0;
    std::uint64_t write_bytes = 0;
    // migration traffic at the same port, tagged separately
    std::uint64_t dma_read_bytes = 0;
    std::uint64_t dma_write_bytes = 0;

    friend bool operator==(const DeviceCounters&, const DeviceCounters&) = default;
};

/// Power-of-two latency buckets: bucket 0 holds latency 0, bucket i holds
/// [2^(i-1), 2^i).
struct LatencyHistogram {
    static constexpr std::size_t kBuckets = 65;
    std::array<std::uint64_t, kBuckets> buckets{};

    static std::size_t bucket_of(Cycles latency);
    void add(Cycles latency) { ++buckets[bucket_of(latency)]; }
    std::uint64_t population() const;

    friend bool operator==(const LatencyHistogram&, const LatencyHistogram&) = default;
};

struct CounterSet {
    std::array<DeviceCounters, kNumDevices> device{};
    std::uint64_t dma_blocks_moved = 0;
    std::uint64_t swaps_completed = 0;
    std::uint64_t stall_events = 0;
    std::uint64_t reorder_buffer_highwater = 0;
    LatencyHistogram latency;

    const DeviceCounters& of(Device d) const { return device[index_of(d)]; }
    DeviceCounters& of(Device d) { return device[index_of(d)]; }

    friend bool operator==(const CounterSet&, const CounterSet&) = default;
};

namespace event {
struct DeviceAccess {
    Device device;
    Op op;
    std::uint64_t bytes;
    bool dma = false;
};
/// One dma_block moved out of one page.
struct DmaBlockMove {
    std::uint64_t blocks = 1;
};
struct Stall {};
struct BufferDepth {
    std::uint64_t depth;
};
struct ResponseLatency {
    Cycles cycles;
};
} // namespace event

using TelemetryEvent =
    std::variant<event::DeviceAccess, event::DmaBlockMove, event::Stall, event::BufferDepth, event::ResponseLatency>;

void record(CounterSet& counters, const TelemetryEvent& ev);

inline CounterSet snapshot(const CounterSet& live) { return live; }

struct DeviceEnergy {
    std::uint64_t read_pj = 0;
    std::uint64_t write_pj = 0;
};

struct EnergyEstimate {
    std::array<DeviceEnergy, kNumDevices> device{};
    std::uint64_t total_pj = 0;

    static double to_nj(std::uint64_t pj) { return static_cast<double>(pj) / 1000.0; }
};

/// Linear dynamic-energy model over all bytes crossing each device port
/// (demand and migration).
EnergyEstimate energy(const CounterSet& counters, const std::array<EnergyCoeffs, kNumDevices>& coeffs);

/// Exact latency distribution, used for per-device mean and percentiles.
class LatencyStats {
public:
    void add(Cycles latency) {
        ++counts_[latency];
        ++n_;
        sum_ += latency;
    }
    std::uint64_t count() const { return n_; }
    double mean() const { return n_ == 0 ? 0.0 : static_cast<double>(sum_) / static_cast<double>(n_); }
    /// Nearest-rank percentile, p in (0, 100]. Zero when empty.
    Cycles percentile(double p) const;
    Cycles max() const { return counts_.empty() ? 0 : counts_.rbegin()->first; }

private:
    std::map<Cycles, std::uint64_t> counts_;
    std::uint64_t n_ = 0;
    Wide sum_ = 0;
};

/// Human-readable binary units with two decimals, e.g. "4.47 GiB".
std::string format_bytes(std::uint64_t bytes);

} // namespace hymem
