#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "hymem/config.hpp"
#include "hymem/frame_set.hpp"
#include "hymem/types.hpp"

namespace hymem {

/// Page-granular map from host pages to device pages. Presents the two
/// devices as one flat window; the mapping is always injective.
class RedirectionTable {
public:
    explicit RedirectionTable(const SimConfig& cfg);

    std::uint64_t page_size() const { return page_size_; }
    std::uint64_t host_pages() const { return entries_.size(); }
    std::uint64_t device_pages(Device d) const { return owners_[index_of(d)].size(); }

    /// Host page holding `addr`; throws OutOfWindow outside the window.
    HostPage page_of(HostAddress addr) const;
    std::uint64_t offset_in_page(HostAddress addr) const { return (addr.value - base_) % page_size_; }
    HostAddress address_of(HostPage page) const { return HostAddress{base_ + page * page_size_}; }

    std::optional<DevicePage> entry(HostPage page) const;
    std::optional<HostPage> owner(DevicePage frame) const;

    /// Translates without side effects; throws UnmappedPage if untouched.
    DeviceAddress lookup(HostAddress addr) const;

    /// Translates, placing the page on first touch when enabled. New pages
    /// go to DRAM until the occupancy watermark, then to NVM.
    DeviceAddress lookup_or_touch(HostAddress addr);
    DevicePage touch(HostPage page);

    /// Maps an untouched host page onto a specific free frame.
    void map(HostPage page, DevicePage frame);

    /// Exchanges the entries of two mapped host pages.
    void commit_swap(HostPage a, HostPage b);

    /// Takes the lowest free frame of `d` out of circulation for a DMA move.
    std::optional<DevicePage> reserve_frame(Device d);
    /// Remaps `page` onto a frame obtained from reserve_frame and frees the
    /// frame it used to occupy.
    void commit_move(HostPage page, DevicePage reserved);

    std::uint64_t free_frames(Device d) const { return free_[index_of(d)].count(); }
    std::uint64_t mapped_pages(Device d) const { return mapped_[index_of(d)]; }
    const FrameSet& free_set(Device d) const { return free_[index_of(d)]; }

    /// Brute-force check that no two host pages share a frame and that the
    /// reverse map agrees with the forward map.
    bool injective() const;

private:
    static constexpr std::uint64_t kUnmapped = 0;
    static std::uint64_t encode(DevicePage p) { return ((p.page << 1) | static_cast<std::uint64_t>(p.device)) + 1; }
    static DevicePage decode(std::uint64_t v) {
        --v;
        return DevicePage{static_cast<Device>(v & 1), v >> 1};
    }
    void set_entry(HostPage page, DevicePage frame);

    std::uint64_t base_;
    std::uint64_t page_size_;
    std::uint64_t dram_fill_limit_;
    bool first_touch_;
    std::vector<std::uint64_t> entries_;                   // encoded DevicePage or kUnmapped
    std::array<std::vector<std::uint64_t>, kNumDevices> owners_; // host page + 1, 0 when free
    std::array<FrameSet, kNumDevices> free_;
    std::array<std::uint64_t, kNumDevices> mapped_{};
};

/// Per-page access counts for the current epoch. Counts from older epochs
/// read as zero.
class HotnessState {
public:
    HotnessState(std::uint64_t pages, Cycles epoch_cycles);

    std::uint64_t epoch_of(SimTime now) const { return now.cycles / epoch_cycles_; }
    /// Counts one access and returns the page's count in the current epoch.
    std::uint32_t record(HostPage page, SimTime now);
    std::uint32_t count(HostPage page, SimTime now) const;
    Cycles epoch_cycles() const { return epoch_cycles_; }

private:
    Cycles epoch_cycles_;
    std::vector<std::uint32_t> counts_;
    std::vector<std::uint64_t> epochs_;
};

/// Swap bookkeeping the policies may observe but not change.
class SwapStatus {
public:
    virtual ~SwapStatus() = default;
    virtual bool swapping(HostPage page) const = 0;
    virtual bool can_start() const = 0;
};

/// No swaps in flight and unlimited capacity.
class IdleSwapStatus final : public SwapStatus {
public:
    bool swapping(HostPage) const override { return false; }
    bool can_start() const override { return true; }
};

/// Exchange `page_a` with `page_b`; without `page_b`, move `page_a` into a
/// free frame on the other device.
struct MigrateDirective {
    HostPage page_a = 0;
    std::optional<HostPage> page_b;

    friend bool operator==(const MigrateDirective&, const MigrateDirective&) = default;
};

struct PolicyAction {
    DeviceAddress route;
    std::optional<MigrateDirective> migrate;
};

/// Coldest DRAM-resident page in the current epoch (ties: lowest page
/// number), skipping pages with an active swap. Empty when DRAM still has a
/// free frame, or when no candidate exists.
std::optional<HostPage> select_victim(const HotnessState& hotness, const RedirectionTable& table, SimTime now,
                                      const SwapStatus& swaps = IdleSwapStatus{});

/// Placement/migration policy. Policies see the request and read-only views
/// of the table and swap state; table changes only happen through the DMA
/// engine acting on the returned directive.
class Policy {
public:
    virtual ~Policy() = default;
    virtual std::string_view name() const = 0;
    /// `req` must be page-local and its page already touched.
    virtual PolicyAction on_access(const MemoryRequest& req, SimTime now, const RedirectionTable& table,
                                   const SwapStatus& swaps) = 0;
};

/// Pages stay where first touch put them.
class StaticPolicy final : public Policy {
public:
    std::string_view name() const override { return "static"; }
    PolicyAction on_access(const MemoryRequest& req, SimTime now, const RedirectionTable& table,
                           const SwapStatus& swaps) override;
};

/// Epoch hotness counting: an NVM page accessed more than `threshold` times
/// in one epoch is promoted, into a free DRAM frame if there is one, else by
/// swapping with the coldest DRAM page.
class HotnessPolicy final : public Policy {
public:
    HotnessPolicy(std::uint64_t host_pages, Cycles epoch_cycles, std::uint32_t threshold);

    std::string_view name() const override { return "hotness"; }
    PolicyAction on_access(const MemoryRequest& req, SimTime now, const RedirectionTable& table,
                           const SwapStatus& swaps) override;

    const HotnessState& hotness() const { return hotness_; }
    std::uint64_t promotions() const { return promotions_; }

private:
    HotnessState hotness_;
    std::uint32_t threshold_;
    std::uint64_t promotions_ = 0;
};

std::unique_ptr<Policy> make_policy(const SimConfig& cfg);

} // namespace hymem
