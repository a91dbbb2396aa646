#include "hymem/telemetry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>

namespace hymem {

std::size_t LatencyHistogram::bucket_of(Cycles latency) {
    return latency == 0 ? 0 : static_cast<std::size_t>(std::bit_width(latency));
}

std::uint64_t LatencyHistogram::population() const {
    std::uint64_t n = 0;
    for (auto b : buckets) n += b;
    return n;
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

void record(CounterSet& c, const TelemetryEvent& ev) {
    std::visit(overloaded{
                   [&](const event::DeviceAccess& a) {
                       auto& d = c.of(a.device);
                       if (a.dma) {
                           (a.op == Op::Read ? d.dma_read_bytes : d.dma_write_bytes) += a.bytes;
                       } else if (a.op == Op::Read) {
                           ++d.read_txns;
                           d.read_bytes += a.bytes;
                       } else {
                           ++d.write_txns;
                           d.write_bytes += a.bytes;
                       }
                   },
                   [&](const event::DmaBlockMove& m) { c.dma_blocks_moved += m.blocks; },
                   [&](const event::Stall&) { ++c.stall_events; },
                   [&](const event::BufferDepth& b) {
                       c.reorder_buffer_highwater = std::max(c.reorder_buffer_highwater, b.depth);
                   },
                   [&](const event::ResponseLatency& l) { c.latency.add(l.cycles); },
               },
               ev);
}

EnergyEstimate energy(const CounterSet& counters, const std::array<EnergyCoeffs, kNumDevices>& coeffs) {
    EnergyEstimate e;
    for (Device d : kDevices) {
        const auto& c = counters.of(d);
        const auto& k = coeffs[index_of(d)];
        auto& out = e.device[index_of(d)];
        out.read_pj = (c.read_bytes + c.dma_read_bytes) * k.read_pj_per_byte;
        out.write_pj = (c.write_bytes + c.dma_write_bytes) * k.write_pj_per_byte;
        e.total_pj += out.read_pj + out.write_pj;
    }
    return e;
}

Cycles LatencyStats::percentile(double p) const {
    if (n_ == 0) return 0;
    p = std::clamp(p, 0.0, 100.0);
    auto rank = static_cast<std::uint64_t>(std::ceil(p / 100.0 * static_cast<double>(n_)));
    rank = std::max<std::uint64_t>(rank, 1);
    std::uint64_t seen = 0;
    for (const auto& [lat, cnt] : counts_) {
        seen += cnt;
        if (seen >= rank) return lat;
    }
    return counts_.rbegin()->first;
}

std::string format_bytes(std::uint64_t bytes) {
    static constexpr const char* units[] = {"B", "KiB", "MiB", "GiB", "TiB", "PiB", "EiB"};
    if (bytes < 1024) return std::to_string(bytes) + " B";
    double v = static_cast<double>(bytes);
    std::size_t u = 0;
    while (v >= 1024.0 && u + 1 < std::size(units)) {
        v /= 1024.0;
        ++u;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f %s", v, units[u]);
    return buf;
}

} // namespace hymem
