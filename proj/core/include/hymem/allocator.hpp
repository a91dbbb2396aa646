#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string_view>
#include <vector>

#include "hymem/config.hpp"
#include "hymem/frame_set.hpp"
#include "hymem/types.hpp"

namespace hymem {

class RedirectionTable;

enum class AllocationHint : std::uint8_t { NoPreference, PreferDRAM, PreferNVM };

std::string_view to_string(AllocationHint h);

using AllocationId = std::uint64_t;

struct AddressRange {
    HostAddress base;
    std::uint64_t bytes = 0;

    friend bool operator==(const AddressRange&, const AddressRange&) = default;
};

struct Allocation {
    AllocationId id = 0;
    AllocationHint hint = AllocationHint::NoPreference;
    std::vector<HostPage> frames;     // ascending
    std::vector<AddressRange> ranges; // frames coalesced into contiguous runs
    std::uint64_t spilled = 0;        // frames taken outside the hinted region
};

/// Physical frame pool over the hybrid window. The low part of the window
/// (dram_capacity bytes) is the DRAM region, the rest the NVM region; each
/// frame is one host page. Frames are handed out lowest-address-first.
class FramePool {
public:
    explicit FramePool(const SimConfig& cfg);

    /// Page-granular allocation of `size` bytes. Draws from the hinted region
    /// (DRAM for NoPreference), preferring one contiguous run, and spills the
    /// remainder to the other region. Throws OutOfMemory if the window cannot
    /// hold it; the pool is unchanged in that case.
    const Allocation& alloc(std::uint64_t size, AllocationHint hint);

    /// Returns the frames of `id` to the free lists. Throws UnknownAllocation.
    void free(AllocationId id);

    const Allocation* find(AllocationId id) const;
    const std::map<AllocationId, Allocation>& allocations() const { return live_; }

    Device region_of(HostPage frame) const { return frame < dram_frames_ ? Device::DRAM : Device::NVM; }
    std::uint64_t free_frames(Device region) const { return free_[index_of(region)].count(); }
    std::uint64_t free_frames() const { return free_frames(Device::DRAM) + free_frames(Device::NVM); }
    std::uint64_t allocated_frames() const { return allocated_; }
    std::uint64_t total_frames() const { return dram_frames_ + nvm_frames_; }
    std::uint64_t spilled_frames() const { return spilled_; }
    const FrameSet& free_set(Device region) const { return free_[index_of(region)]; }

    /// Frame numbers currently free, ascending, across both regions.
    std::vector<HostPage> free_list() const;

    /// Pins every frame of `a` in the redirection table onto the device page
    /// that backs it in its region.
    void seed(RedirectionTable& table, const Allocation& a) const;

    HostAddress address_of(HostPage frame) const { return HostAddress{base_ + frame * page_size_}; }

private:
    void take(Device region, std::uint64_t n, std::vector<HostPage>& out);
    HostPage to_frame(Device region, std::uint64_t local) const {
        return region == Device::DRAM ? local : dram_frames_ + local;
    }

    std::uint64_t base_;
    std::uint64_t page_size_;
    std::uint64_t dram_frames_;
    std::uint64_t nvm_frames_;
    std::array<FrameSet, kNumDevices> free_; // region-local frame numbers
    std::map<AllocationId, Allocation> live_;
    AllocationId next_id_ = 1;
    std::uint64_t allocated_ = 0;
    std::uint64_t spilled_ = 0;
};

} // namespace hymem
