#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string_view>
#include <vector>

namespace hymem {

using Cycles = std::uint64_t;
using Tag = std::uint64_t;
using HostPage = std::uint64_t;
using Bytes = std::vector<std::uint8_t>;
__extension__ typedef unsigned __int128 Wide;

enum class Device : std::uint8_t { DRAM = 0, NVM = 1 };
inline constexpr std::array<Device, 2> kDevices{Device::DRAM, Device::NVM};
inline constexpr std::size_t kNumDevices = kDevices.size();

inline constexpr std::size_t index_of(Device d) { return static_cast<std::size_t>(d); }
inline constexpr Device other(Device d) { return d == Device::DRAM ? Device::NVM : Device::DRAM; }
std::string_view to_string(Device d);

enum class Op : std::uint8_t { Read, Write };
std::string_view to_string(Op op);

/// Byte address inside the hybrid window as seen by the host.
struct HostAddress {
    std::uint64_t value = 0;

    friend constexpr auto operator<=>(HostAddress, HostAddress) = default;
};

/// Byte offset inside one physical device.
struct DeviceAddress {
    Device device = Device::DRAM;
    std::uint64_t offset = 0;

    friend constexpr bool operator==(DeviceAddress, DeviceAddress) = default;
};

/// Page-granular physical location. Used by the redirection table and DMA.
struct DevicePage {
    Device device = Device::DRAM;
    std::uint64_t page = 0;

    friend constexpr bool operator==(DevicePage, DevicePage) = default;
};

/// A point on the simulated clock, counted in cycles.
struct SimTime {
    Cycles cycles = 0;

    friend constexpr auto operator<=>(SimTime, SimTime) = default;
    friend constexpr SimTime operator+(SimTime t, Cycles d) { return SimTime{t.cycles + d}; }
    friend constexpr Cycles operator-(SimTime a, SimTime b) { return a.cycles - b.cycles; }
};

/// One post-cache host request. `sub` numbers the page-local pieces that
/// split_request produces; (tag, sub) orders every piece of a run.
struct MemoryRequest {
    Op op = Op::Read;
    HostAddress addr;
    std::uint32_t size = 0;
    SimTime arrival;
    Tag tag = 0;
    std::uint32_t sub = 0;
    Bytes payload; // present iff op == Write, payload.size() == size

    bool is_write() const { return op == Op::Write; }
};

struct Response {
    Tag tag = 0;
    Op op = Op::Read;
    Bytes data; // present iff op == Read
    SimTime completion;
};

constexpr bool is_pow2(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

} // namespace hymem
