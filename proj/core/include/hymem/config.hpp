#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hymem/error.hpp"
#include "hymem/types.hpp"

namespace hymem {

inline constexpr std::uint64_t KiB = 1024;
inline constexpr std::uint64_t MiB = 1024 * KiB;
inline constexpr std::uint64_t GiB = 1024 * MiB;

/// Published 3D XPoint latency ranges (ns) and the DRAM reference point.
inline constexpr std::uint64_t kDramNs = 50;
inline constexpr std::uint64_t kXPointReadNsLow = 50;
inline constexpr std::uint64_t kXPointReadNsHigh = 150;
inline constexpr std::uint64_t kXPointWriteNsLow = 50;
inline constexpr std::uint64_t kXPointWriteNsHigh = 500;

/// Per-device latency model. The base cycles describe the DRAM DIMM that
/// physically services the request; target latencies describe the
/// technology being emulated. Stall cycles are derived at simulator start
/// from a measured round trip unless pinned explicitly.
struct DeviceTimingConfig {
    Cycles base_read_cycles = 20;
    Cycles base_write_cycles = 20;
    std::uint64_t target_read_ns = kDramNs;
    std::uint64_t target_write_ns = kDramNs;
    std::uint64_t base_ns = kDramNs;
    std::uint32_t outstanding_slots = 1;
    std::optional<Cycles> read_stall_override;
    std::optional<Cycles> write_stall_override;
};

enum class PolicyKind : std::uint8_t { Static, Hotness };

struct PolicyConfig {
    PolicyKind kind = PolicyKind::Static;
    Cycles epoch_cycles = 100'000;
    std::uint32_t threshold = 32;
    double dram_watermark = 0.9;
    bool first_touch = true;
};

/// Dynamic energy per byte moved at a device port, in picojoules.
struct EnergyCoeffs {
    std::uint64_t read_pj_per_byte = 0;
    std::uint64_t write_pj_per_byte = 0;

    friend bool operator==(const EnergyCoeffs&, const EnergyCoeffs&) = default;
};

struct CycleScale {
    std::uint64_t ns_num = 4;
    std::uint64_t ns_den = 1;
};

struct SimConfig {
    HostAddress window_base{0x12'4000'0000};
    std::uint64_t dram_capacity = 128 * MiB;
    std::uint64_t nvm_capacity = 1 * GiB;
    std::uint64_t page_size = 4 * KiB;
    std::uint64_t dma_block = 512;
    std::uint32_t dma_buffer_blocks = 2;
    std::uint32_t dma_max_jobs = 1;
    Cycles link_latency = 30;
    Cycles control_delay = 2;
    CycleScale cycle_scale;
    bool posted_writes = false;
    std::array<DeviceTimingConfig, kNumDevices> timing = default_timing();
    PolicyConfig policy;
    std::optional<std::array<EnergyCoeffs, kNumDevices>> energy_coeffs;
    bool report_energy = false;
    std::uint64_t seed = 0;

    static std::array<DeviceTimingConfig, kNumDevices> default_timing();

    const DeviceTimingConfig& timing_of(Device d) const { return timing[index_of(d)]; }
    DeviceTimingConfig& timing_of(Device d) { return timing[index_of(d)]; }

    std::uint64_t window_size() const { return dram_capacity + nvm_capacity; }
    std::uint64_t window_end() const { return window_base.value + window_size(); }
    std::uint64_t capacity(Device d) const { return d == Device::DRAM ? dram_capacity : nvm_capacity; }
    std::uint64_t pages(Device d) const { return capacity(d) / page_size; }
    std::uint64_t window_pages() const { return window_size() / page_size; }
    std::uint64_t blocks_per_page() const { return page_size / dma_block; }
    bool in_window(HostAddress a) const { return a.value >= window_base.value && a.value < window_end(); }
};

struct ConfigIssue {
    Errc code;
    std::string field;
    std::string message;
};

class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<ConfigIssue> issues);

    const std::vector<ConfigIssue>& issues() const { return issues_; }

private:
    std::vector<ConfigIssue> issues_;
};

/// Every violated constraint, in a fixed order. Empty means valid.
std::vector<ConfigIssue> config_issues(const SimConfig& cfg);

/// Returns cfg unchanged when valid; throws ConfigError listing all issues.
SimConfig validate_config(const SimConfig& cfg);

/// Parses `key = value` lines. `#` starts a comment. Unknown keys and bad
/// values raise ConfigError with line numbers; absent keys keep defaults.
SimConfig parse_config(std::istream& in);
SimConfig load_config(const std::string& path);

/// Applies one key/value pair; throws Error on unknown key or bad value.
void apply_config_key(SimConfig& cfg, const std::string& key, const std::string& value);

/// Parses sizes such as `4096`, `4KB`, `128MB`, `1GB`, `0x1000` (binary units).
std::uint64_t parse_size(const std::string& text);

/// Canonical `key = value` rendering, accepted back by parse_config.
std::string render_config(const SimConfig& cfg);

/// Splits a request into page-local pieces that partition its byte range.
/// Pieces keep the parent tag and are numbered by `sub` in address order.
std::vector<MemoryRequest> split_request(const MemoryRequest& req, std::uint64_t page_size);

} // namespace hymem
