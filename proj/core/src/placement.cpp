#include "hymem/placement.hpp"

#include <cmath>
#include <string>

namespace hymem {

RedirectionTable::RedirectionTable(const SimConfig& cfg)
    : base_(cfg.window_base.value),
      page_size_(cfg.page_size),
      dram_fill_limit_(static_cast<std::uint64_t>(
          std::floor(cfg.policy.dram_watermark * static_cast<double>(cfg.pages(Device::DRAM))))),
      first_touch_(cfg.policy.first_touch),
      entries_(cfg.window_pages(), kUnmapped) {
    for (Device d : kDevices) {
        owners_[index_of(d)].assign(cfg.pages(d), 0);
        free_[index_of(d)] = FrameSet(cfg.pages(d));
    }
}

HostPage RedirectionTable::page_of(HostAddress addr) const {
    if (addr.value < base_ || addr.value - base_ >= entries_.size() * page_size_)
        fail(Errc::OutOfWindow, "address " + to_hex(addr.value) + " is outside the hybrid window");
    return (addr.value - base_) / page_size_;
}

std::optional<DevicePage> RedirectionTable::entry(HostPage page) const {
    if (page >= entries_.size() || entries_[page] == kUnmapped) return std::nullopt;
    return decode(entries_[page]);
}

std::optional<HostPage> RedirectionTable::owner(DevicePage frame) const {
    const auto& o = owners_[index_of(frame.device)];
    if (frame.page >= o.size() || o[frame.page] == 0) return std::nullopt;
    return o[frame.page] - 1;
}

DeviceAddress RedirectionTable::lookup(HostAddress addr) const {
    HostPage page = page_of(addr);
    auto e = entry(page);
    if (!e) fail(Errc::UnmappedPage, "host page " + std::to_string(page) + " is unmapped");
    return DeviceAddress{e->device, e->page * page_size_ + offset_in_page(addr)};
}

DeviceAddress RedirectionTable::lookup_or_touch(HostAddress addr) {
    HostPage page = page_of(addr);
    if (entries_[page] == kUnmapped) {
        if (!first_touch_) fail(Errc::UnmappedPage, "host page " + std::to_string(page) + " is unmapped");
        touch(page);
    }
    return lookup(addr);
}

DevicePage RedirectionTable::touch(HostPage page) {
    if (auto e = entry(page)) return *e;
    const auto& dram_free = free_[index_of(Device::DRAM)];
    const std::uint64_t dram_used = device_pages(Device::DRAM) - dram_free.count();
    Device first = dram_used < dram_fill_limit_ ? Device::DRAM : Device::NVM;
    for (Device d : {first, other(first)}) {
        if (auto f = free_[index_of(d)].pop_lowest()) {
            set_entry(page, DevicePage{d, *f});
            return DevicePage{d, *f};
        }
    }
    fail(Errc::OutOfMemory, "no free frame for host page " + std::to_string(page));
}

void RedirectionTable::map(HostPage page, DevicePage frame) {
    if (page >= entries_.size()) fail(Errc::OutOfWindow, "host page " + std::to_string(page) + " outside window");
    if (entries_[page] != kUnmapped)
        fail(Errc::InvalidValue, "host page " + std::to_string(page) + " is already mapped");
    if (!free_[index_of(frame.device)].erase(frame.page))
        fail(Errc::InvalidValue, "frame " + std::to_string(frame.page) + " on " + std::string(to_string(frame.device)) +
                                     " is not free");
    set_entry(page, frame);
}

void RedirectionTable::set_entry(HostPage page, DevicePage frame) {
    entries_[page] = encode(frame);
    owners_[index_of(frame.device)][frame.page] = page + 1;
    ++mapped_[index_of(frame.device)];
}

void RedirectionTable::commit_swap(HostPage a, HostPage b) {
    if (a == b) fail(Errc::SwapPagesIdentical, "cannot swap host page " + std::to_string(a) + " with itself");
    auto ea = entry(a);
    auto eb = entry(b);
    if (!ea || !eb) fail(Errc::UnmappedPage, "swap of unmapped host page");
    entries_[a] = encode(*eb);
    entries_[b] = encode(*ea);
    owners_[index_of(eb->device)][eb->page] = a + 1;
    owners_[index_of(ea->device)][ea->page] = b + 1;
}

std::optional<DevicePage> RedirectionTable::reserve_frame(Device d) {
    if (auto f = free_[index_of(d)].pop_lowest()) return DevicePage{d, *f};
    return std::nullopt;
}

void RedirectionTable::commit_move(HostPage page, DevicePage reserved) {
    auto old = entry(page);
    if (!old) fail(Errc::UnmappedPage, "move of unmapped host page " + std::to_string(page));
    if (owner(reserved) || free_[index_of(reserved.device)].contains(reserved.page))
        throw InvariantError("move target frame was not reserved");
    owners_[index_of(old->device)][old->page] = 0;
    --mapped_[index_of(old->device)];
    free_[index_of(old->device)].insert(old->page);
    set_entry(page, reserved);
}

bool RedirectionTable::injective() const {
    std::array<std::vector<bool>, kNumDevices> seen;
    for (Device d : kDevices) seen[index_of(d)].assign(device_pages(d), false);
    std::array<std::uint64_t, kNumDevices> mapped{};
    for (HostPage p = 0; p < entries_.size(); ++p) {
        if (entries_[p] == kUnmapped) continue;
        DevicePage f = decode(entries_[p]);
        auto& s = seen[index_of(f.device)];
        if (f.page >= s.size() || s[f.page]) return false;
        s[f.page] = true;
        if (owners_[index_of(f.device)][f.page] != p + 1) return false;
        if (free_[index_of(f.device)].contains(f.page)) return false;
        ++mapped[index_of(f.device)];
    }
    for (Device d : kDevices) {
        const auto& o = owners_[index_of(d)];
        for (std::uint64_t f = 0; f < o.size(); ++f)
            if (o[f] != 0 && !seen[index_of(d)][f]) return false;
    }
    return mapped == mapped_;
}

HotnessState::HotnessState(std::uint64_t pages, Cycles epoch_cycles)
    : epoch_cycles_(epoch_cycles == 0 ? 1 : epoch_cycles), counts_(pages, 0), epochs_(pages, 0) {}

std::uint32_t HotnessState::record(HostPage page, SimTime now) {
    std::uint64_t epoch = epoch_of(now);
    if (epochs_[page] != epoch) {
        epochs_[page] = epoch;
        counts_[page] = 0;
    }
    return ++counts_[page];
}

std::uint32_t HotnessState::count(HostPage page, SimTime now) const {
    return epochs_[page] == epoch_of(now) ? counts_[page] : 0;
}

std::optional<HostPage> select_victim(const HotnessState& hotness, const RedirectionTable& table, SimTime now,
                                      const SwapStatus& swaps) {
    if (table.free_frames(Device::DRAM) > 0) return std::nullopt;
    std::optional<HostPage> best;
    std::uint32_t best_count = 0;
    for (std::uint64_t f = 0; f < table.device_pages(Device::DRAM); ++f) {
        auto host = table.owner(DevicePage{Device::DRAM, f});
        if (!host || swaps.swapping(*host)) continue;
        std::uint32_t c = hotness.count(*host, now);
        if (!best || c < best_count || (c == best_count && *host < *best)) {
            best = host;
            best_count = c;
        }
    }
    return best;
}

PolicyAction StaticPolicy::on_access(const MemoryRequest& req, SimTime, const RedirectionTable& table,
                                     const SwapStatus&) {
    return PolicyAction{table.lookup(req.addr), std::nullopt};
}

HotnessPolicy::HotnessPolicy(std::uint64_t host_pages, Cycles epoch_cycles, std::uint32_t threshold)
    : hotness_(host_pages, epoch_cycles), threshold_(threshold) {}

PolicyAction HotnessPolicy::on_access(const MemoryRequest& req, SimTime now, const RedirectionTable& table,
                                      const SwapStatus& swaps) {
    PolicyAction action{table.lookup(req.addr), std::nullopt};
    HostPage page = table.page_of(req.addr);
    std::uint32_t count = hotness_.record(page, now);
    if (action.route.device != Device::NVM || count <= threshold_) return action;
    if (!swaps.can_start() || swaps.swapping(page)) return action;
    if (table.free_frames(Device::DRAM) > 0) {
        action.migrate = MigrateDirective{page, std::nullopt};
    } else if (auto victim = select_victim(hotness_, table, now, swaps)) {
        action.migrate = MigrateDirective{page, *victim};
    } else {
        return action;
    }
    ++promotions_;
    return action;
}

std::unique_ptr<Policy> make_policy(const SimConfig& cfg) {
    switch (cfg.policy.kind) {
    case PolicyKind::Static: return std::make_unique<StaticPolicy>();
    case PolicyKind::Hotness:
        return std::make_unique<HotnessPolicy>(cfg.window_pages(), cfg.policy.epoch_cycles, cfg.policy.threshold);
    }
    return std::make_unique<StaticPolicy>();
}

} // namespace hymem
