#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hymem/config.hpp"
#include "hymem/types.hpp"

namespace hymem {

/// Extra cycles that stretch a baseline round trip of `base_cycles` (taken
/// on a device of latency `base_ns`) to the latency of a `target_ns` device:
/// round(base_cycles * (target_ns / base_ns - 1)), never negative.
Cycles derive_stall_cycles(Cycles base_cycles, std::uint64_t base_ns, std::uint64_t target_ns);

/// Fully resolved service timing for one device.
struct DeviceTiming {
    Cycles read_cycles = 0;
    Cycles write_cycles = 0;
    Cycles read_stall = 0;
    Cycles write_stall = 0;
    Cycles link = 0;
    std::uint32_t slots = 1;

    Cycles base(Op op) const { return op == Op::Read ? read_cycles : write_cycles; }
    Cycles stall(Op op) const { return op == Op::Read ? read_stall : write_stall; }
    /// Device-internal access time, excluding the host link.
    Cycles access(Op op) const { return base(op) + stall(op); }
    /// Request-to-response time on an idle device.
    Cycles round_trip(Op op) const { return access(op) + link; }
};

/// Occupancy of one device: `slots` concurrently serviced requests, later
/// arrivals wait for the earliest free slot.
class DeviceState {
public:
    explicit DeviceState(DeviceTiming timing);

    /// Schedules `op` arriving at `now` and returns its completion time:
    /// max(now, earliest free slot) + base + stall + link.
    SimTime service(Op op, SimTime now);

    std::size_t in_flight(SimTime now) const;
    std::uint64_t slot_waits() const { return slot_waits_; }
    const DeviceTiming& timing() const { return timing_; }

private:
    DeviceTiming timing_;
    std::vector<SimTime> free_at_;
    std::uint64_t slot_waits_ = 0;
};

/// Timing with the stall cycles still zero, i.e. every device runs at the
/// baseline DIMM speed. Input to the calibration probe.
DeviceTiming baseline_timing(const SimConfig& cfg, Device d);

struct RoundTrip {
    double read_mean = 0;
    double write_mean = 0;

    double mean(Op op) const { return op == Op::Read ? read_mean : write_mean; }
};

/// Closed-loop probe: issue one request, wait for its response, issue the
/// next. Reports the mean request-to-response cycles per op class.
RoundTrip probe_round_trip(const DeviceTiming& timing, std::uint64_t samples);

/// Measures the baseline DIMM round trip, then scales stall cycles for each
/// device by its target/baseline latency ratio. Explicit stall overrides in
/// the config win over the derived values.
std::array<DeviceTiming, kNumDevices> calibrate_timing(const SimConfig& cfg, std::uint64_t probe_samples = 64);

/// Round trip of device `d` after calibration.
RoundTrip measure_round_trip(const SimConfig& cfg, Device d, std::uint64_t samples);

} // namespace hymem
