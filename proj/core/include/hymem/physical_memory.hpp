#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>

#include "hymem/types.hpp"

namespace hymem {

class RedirectionTable;

/// Contents of both devices, stored sparsely per page. Pages never written
/// read as zero.
class PhysicalMemory {
public:
    explicit PhysicalMemory(std::uint64_t page_size) : page_size_(page_size) {}

    std::uint64_t page_size() const { return page_size_; }

    /// Both accesses must stay inside one device page.
    void read(DeviceAddress at, std::span<std::uint8_t> out) const;
    void write(DeviceAddress at, std::span<const std::uint8_t> in);

    /// Exchanges `len` bytes at `a` with `len` bytes at `b`.
    void exchange(DeviceAddress a, DeviceAddress b, std::uint64_t len);

    void clear(DevicePage frame) { pages_.erase(key(frame)); }

    /// Null when the page has never been written.
    const std::uint8_t* page_data(DevicePage frame) const;

    std::size_t resident_pages() const { return pages_.size(); }

private:
    static std::uint64_t key(DevicePage p) { return (p.page << 1) | static_cast<std::uint64_t>(p.device); }
    DevicePage frame_of(DeviceAddress a) const { return DevicePage{a.device, a.offset / page_size_}; }
    std::uint8_t* page_for_write(DevicePage frame);

    std::uint64_t page_size_;
    std::unordered_map<std::uint64_t, std::unique_ptr<std::uint8_t[]>> pages_;
};

/// 64-bit FNV-1a.
class Fnv1a {
public:
    void update(std::span<const std::uint8_t> bytes) {
        for (auto b : bytes) {
            hash_ ^= b;
            hash_ *= 0x100000001b3ULL;
        }
    }
    void update_u64(std::uint64_t v) {
        std::uint8_t le[8];
        for (int i = 0; i < 8; ++i) le[i] = static_cast<std::uint8_t>(v >> (8 * i));
        update(le);
    }
    std::uint64_t value() const { return hash_; }

private:
    std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

/// Checksum of the host-visible memory image: FNV-1a over (host page number,
/// page bytes) for every page with non-zero content, in ascending page
/// order. A flat host-addressed memory holding the same bytes hashes equal.
std::uint64_t host_image_checksum(const RedirectionTable& table, const PhysicalMemory& memory);

bool all_zero(std::span<const std::uint8_t> bytes);

} // namespace hymem
