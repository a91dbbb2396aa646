#include "hymem/physical_memory.hpp"

#include <algorithm>
#include <cstring>

#include "hymem/error.hpp"
#include "hymem/placement.hpp"

namespace hymem {

namespace {

void check_local(DeviceAddress at, std::uint64_t len, std::uint64_t page_size) {
    if ((at.offset % page_size) + len > page_size) throw InvariantError("device access crosses a page boundary");
}

} // namespace

void PhysicalMemory::read(DeviceAddress at, std::span<std::uint8_t> out) const {
    check_local(at, out.size(), page_size_);
    const std::uint8_t* page = page_data(frame_of(at));
    if (page == nullptr) {
        std::fill(out.begin(), out.end(), std::uint8_t{0});
        return;
    }
    std::memcpy(out.data(), page + at.offset % page_size_, out.size());
}

void PhysicalMemory::write(DeviceAddress at, std::span<const std::uint8_t> in) {
    check_local(at, in.size(), page_size_);
    std::memcpy(page_for_write(frame_of(at)) + at.offset % page_size_, in.data(), in.size());
}

void PhysicalMemory::exchange(DeviceAddress a, DeviceAddress b, std::uint64_t len) {
    check_local(a, len, page_size_);
    check_local(b, len, page_size_);
    const DevicePage fa = frame_of(a);
    const DevicePage fb = frame_of(b);
    if (page_data(fa) == nullptr && page_data(fb) == nullptr) return;
    std::uint8_t* pa = page_for_write(fa) + a.offset % page_size_;
    std::uint8_t* pb = page_for_write(fb) + b.offset % page_size_;
    std::swap_ranges(pa, pa + len, pb);
}

const std::uint8_t* PhysicalMemory::page_data(DevicePage frame) const {
    auto it = pages_.find(key(frame));
    return it == pages_.end() ? nullptr : it->second.get();
}

std::uint8_t* PhysicalMemory::page_for_write(DevicePage frame) {
    auto& slot = pages_[key(frame)];
    if (!slot) slot = std::make_unique<std::uint8_t[]>(page_size_); // value-initialized to zero
    return slot.get();
}

bool all_zero(std::span<const std::uint8_t> bytes) {
    return std::all_of(bytes.begin(), bytes.end(), [](std::uint8_t b) { return b == 0; });
}

std::uint64_t host_image_checksum(const RedirectionTable& table, const PhysicalMemory& memory) {
    Fnv1a h;
    const auto page_size = table.page_size();
    for (HostPage p = 0; p < table.host_pages(); ++p) {
        auto frame = table.entry(p);
        if (!frame) continue;
        const std::uint8_t* data = memory.page_data(*frame);
        if (data == nullptr) continue;
        std::span<const std::uint8_t> bytes(data, page_size);
        if (all_zero(bytes)) continue;
        h.update_u64(p);
        h.update(bytes);
    }
    return h.value();
}

} // namespace hymem
