#include "hymem/allocator.hpp"

#include <algorithm>
#include <string>

#include "hymem/placement.hpp"

namespace hymem {

std::string_view to_string(AllocationHint h) {
    switch (h) {
    case AllocationHint::NoPreference: return "none";
    case AllocationHint::PreferDRAM: return "dram";
    case AllocationHint::PreferNVM: return "nvm";
    }
    return "?";
}

FramePool::FramePool(const SimConfig& cfg)
    : base_(cfg.window_base.value),
      page_size_(cfg.page_size),
      dram_frames_(cfg.pages(Device::DRAM)),
      nvm_frames_(cfg.pages(Device::NVM)),
      free_{FrameSet(dram_frames_), FrameSet(nvm_frames_)} {}

void FramePool::take(Device region, std::uint64_t n, std::vector<HostPage>& out) {
    auto& set = free_[index_of(region)];
    if (n == 0) return;
    if (auto run = set.find_run(n)) {
        for (std::uint64_t f = *run; f < *run + n; ++f) {
            set.erase(f);
            out.push_back(to_frame(region, f));
        }
        return;
    }
    for (std::uint64_t i = 0; i < n; ++i) out.push_back(to_frame(region, *set.pop_lowest()));
}

const Allocation& FramePool::alloc(std::uint64_t size, AllocationHint hint) {
    if (size == 0) fail(Errc::InvalidValue, "allocation size must be positive");
    const std::uint64_t n = (size + page_size_ - 1) / page_size_;
    if (n > free_frames())
        fail(Errc::OutOfMemory, "cannot allocate " + std::to_string(n) + " frames, " +
                                    std::to_string(free_frames()) + " free");

    const Device primary = hint == AllocationHint::PreferNVM ? Device::NVM : Device::DRAM;
    const std::uint64_t from_primary = std::min(n, free_frames(primary));

    Allocation a;
    a.id = next_id_++;
    a.hint = hint;
    a.frames.reserve(n);
    take(primary, from_primary, a.frames);
    take(other(primary), n - from_primary, a.frames);
    std::sort(a.frames.begin(), a.frames.end());
    a.spilled = hint == AllocationHint::NoPreference ? 0 : n - from_primary;

    for (HostPage f : a.frames) {
        if (!a.ranges.empty() && a.ranges.back().base.value + a.ranges.back().bytes == address_of(f).value)
            a.ranges.back().bytes += page_size_;
        else
            a.ranges.push_back(AddressRange{address_of(f), page_size_});
    }
    allocated_ += n;
    spilled_ += a.spilled;
    auto [it, _] = live_.emplace(a.id, std::move(a));
    return it->second;
}

void FramePool::free(AllocationId id) {
    auto it = live_.find(id);
    if (it == live_.end()) fail(Errc::UnknownAllocation, "allocation " + std::to_string(id) + " is not live");
    for (HostPage f : it->second.frames) {
        const Device region = region_of(f);
        free_[index_of(region)].insert(region == Device::DRAM ? f : f - dram_frames_);
    }
    allocated_ -= it->second.frames.size();
    spilled_ -= it->second.spilled;
    live_.erase(it);
}

const Allocation* FramePool::find(AllocationId id) const {
    auto it = live_.find(id);
    return it == live_.end() ? nullptr : &it->second;
}

std::vector<HostPage> FramePool::free_list() const {
    std::vector<HostPage> out;
    out.reserve(free_frames());
    for (Device region : kDevices) {
        const auto& set = free_[index_of(region)];
        for (std::uint64_t f = 0; f < set.size(); ++f)
            if (set.contains(f)) out.push_back(to_frame(region, f));
    }
    return out;
}

void FramePool::seed(RedirectionTable& table, const Allocation& a) const {
    for (HostPage f : a.frames) {
        const Device region = region_of(f);
        table.map(f, DevicePage{region, region == Device::DRAM ? f : f - dram_frames_});
    }
}

} // namespace hymem
