#include "hymem/device_timing.hpp"

#include <algorithm>
#include <cmath>

namespace hymem {

Cycles derive_stall_cycles(Cycles base_cycles, std::uint64_t base_ns, std::uint64_t target_ns) {
    if (target_ns <= base_ns) return 0;
    // round-half-up of base_cycles * (target - base) / base, in integers
    const Wide num = static_cast<Wide>(base_cycles) * (target_ns - base_ns);
    return static_cast<Cycles>((num * 2 + base_ns) / (2 * static_cast<Wide>(base_ns)));
}

DeviceState::DeviceState(DeviceTiming timing) : timing_(timing), free_at_(std::max<std::uint32_t>(timing.slots, 1)) {}

SimTime DeviceState::service(Op op, SimTime now) {
    auto slot = std::min_element(free_at_.begin(), free_at_.end());
    SimTime start = std::max(now, *slot);
    if (start > now) ++slot_waits_;
    SimTime done = start + timing_.round_trip(op);
    *slot = done;
    return done;
}

std::size_t DeviceState::in_flight(SimTime now) const {
    return static_cast<std::size_t>(std::count_if(free_at_.begin(), free_at_.end(), [&](SimTime t) { return t > now; }));
}

DeviceTiming baseline_timing(const SimConfig& cfg, Device d) {
    const auto& t = cfg.timing_of(d);
    DeviceTiming out;
    out.read_cycles = t.base_read_cycles;
    out.write_cycles = t.base_write_cycles;
    out.link = cfg.link_latency;
    out.slots = t.outstanding_slots;
    return out;
}

RoundTrip probe_round_trip(const DeviceTiming& timing, std::uint64_t samples) {
    samples = std::max<std::uint64_t>(samples, 1);
    RoundTrip rt;
    for (Op op : {Op::Read, Op::Write}) {
        DeviceState dev(timing);
        SimTime now{};
        Cycles total = 0;
        for (std::uint64_t i = 0; i < samples; ++i) {
            SimTime done = dev.service(op, now);
            total += done - now;
            now = done;
        }
        (op == Op::Read ? rt.read_mean : rt.write_mean) = static_cast<double>(total) / static_cast<double>(samples);
    }
    return rt;
}

std::array<DeviceTiming, kNumDevices> calibrate_timing(const SimConfig& cfg, std::uint64_t probe_samples) {
    std::array<DeviceTiming, kNumDevices> out{};
    for (Device d : kDevices) {
        const auto& t = cfg.timing_of(d);
        DeviceTiming timing = baseline_timing(cfg, d);
        RoundTrip measured = probe_round_trip(timing, probe_samples);
        auto rt_read = static_cast<Cycles>(std::llround(measured.read_mean));
        auto rt_write = static_cast<Cycles>(std::llround(measured.write_mean));
        timing.read_stall = t.read_stall_override.value_or(derive_stall_cycles(rt_read, t.base_ns, t.target_read_ns));
        timing.write_stall =
            t.write_stall_override.value_or(derive_stall_cycles(rt_write, t.base_ns, t.target_write_ns));
        out[index_of(d)] = timing;
    }
    return out;
}

RoundTrip measure_round_trip(const SimConfig& cfg, Device d, std::uint64_t samples) {
    return probe_round_trip(calibrate_timing(cfg)[index_of(d)], samples);
}

} // namespace hymem
