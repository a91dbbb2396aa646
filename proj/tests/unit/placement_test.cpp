#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "hymem/placement.hpp"
#include "flat_memory.hpp"

using namespace hymem;
using hymem::testing::small_config;

namespace {

MemoryRequest read_at(const SimConfig& cfg, HostPage page, std::uint64_t offset = 0) {
    MemoryRequest r;
    r.op = Op::Read;
    r.addr = HostAddress{cfg.window_base.value + page * cfg.page_size + offset};
    r.size = 64;
    return r;
}

class BusyStatus final : public SwapStatus {
public:
    std::set<HostPage> pages;
    bool capacity = true;
    bool swapping(HostPage p) const override { return pages.count(p) != 0; }
    bool can_start() const override { return capacity; }
};

} // namespace

TEST(RedirectionTable, PageOfAndOffsets) {
    SimConfig cfg = small_config();
    RedirectionTable t(cfg);
    EXPECT_EQ(t.host_pages(), 32u);
    EXPECT_EQ(t.page_of(HostAddress{cfg.window_base.value + 4096 * 3 + 17}), 3u);
    EXPECT_EQ(t.offset_in_page(HostAddress{cfg.window_base.value + 4096 * 3 + 17}), 17u);
    EXPECT_THROW(t.page_of(HostAddress{cfg.window_base.value - 1}), Error);
    EXPECT_THROW(t.page_of(HostAddress{cfg.window_end()}), Error);
}

TEST(RedirectionTable, LookupOfUntouchedPageThrows) {
    SimConfig cfg = small_config();
    RedirectionTable t(cfg);
    try {
        t.lookup(cfg.window_base);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::UnmappedPage);
    }
}

TEST(RedirectionTable, FirstTouchFillsDramToWatermark) {
    SimConfig cfg = small_config(10, 10);
    cfg.policy.dram_watermark = 0.5;
    RedirectionTable t(cfg);
    for (HostPage p = 0; p < 20; ++p) t.touch(p);
    EXPECT_EQ(t.mapped_pages(Device::DRAM), 10u);
    EXPECT_EQ(t.mapped_pages(Device::NVM), 10u);
    for (HostPage p = 0; p < 5; ++p) EXPECT_EQ(t.entry(p)->device, Device::DRAM);
    for (HostPage p = 5; p < 15; ++p) EXPECT_EQ(t.entry(p)->device, Device::NVM);
    for (HostPage p = 15; p < 20; ++p) EXPECT_EQ(t.entry(p)->device, Device::DRAM);
    EXPECT_TRUE(t.injective());
}

TEST(RedirectionTable, DefaultWatermarkLeavesTenPercent) {
    SimConfig cfg = small_config(10, 10);
    RedirectionTable t(cfg);
    for (HostPage p = 0; p < 10; ++p) t.touch(p);
    EXPECT_EQ(t.mapped_pages(Device::DRAM), 9u);
    EXPECT_EQ(t.entry(9)->device, Device::NVM);
}

TEST(RedirectionTable, FirstTouchDisabled) {
    SimConfig cfg = small_config();
    cfg.policy.first_touch = false;
    RedirectionTable t(cfg);
    EXPECT_THROW(t.lookup_or_touch(cfg.window_base), Error);
}

TEST(RedirectionTable, SwapIsAnInvolution) {
    SimConfig cfg = small_config(4, 4);
    RedirectionTable t(cfg);
    t.map(1, DevicePage{Device::DRAM, 2});
    t.map(6, DevicePage{Device::NVM, 3});
    t.commit_swap(1, 6);
    EXPECT_EQ(*t.entry(1), (DevicePage{Device::NVM, 3}));
    EXPECT_EQ(*t.entry(6), (DevicePage{Device::DRAM, 2}));
    EXPECT_EQ(*t.owner(DevicePage{Device::NVM, 3}), 1u);
    t.commit_swap(1, 6);
    EXPECT_EQ(*t.entry(1), (DevicePage{Device::DRAM, 2}));
    EXPECT_EQ(*t.entry(6), (DevicePage{Device::NVM, 3}));
    EXPECT_TRUE(t.injective());
}

TEST(RedirectionTable, SwapSamePageRejected) {
    SimConfig cfg = small_config();
    RedirectionTable t(cfg);
    t.touch(0);
    try {
        t.commit_swap(0, 0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::SwapPagesIdentical);
    }
}

TEST(RedirectionTable, InjectiveAfterRandomSwaps) {
    SimConfig cfg = small_config(16, 48);
    RedirectionTable t(cfg);
    for (HostPage p = 0; p < 64; ++p) t.touch(p);
    std::map<HostPage, DevicePage> model;
    for (HostPage p = 0; p < 64; ++p) model[p] = *t.entry(p);
    std::mt19937_64 rng(99);
    for (int i = 0; i < 1000; ++i) {
        HostPage a = rng() % 64, b = rng() % 64;
        if (a == b) continue;
        t.commit_swap(a, b);
        std::swap(model[a], model[b]);
    }
    EXPECT_TRUE(t.injective());
    for (HostPage p = 0; p < 64; ++p) EXPECT_EQ(*t.entry(p), model[p]);
}

TEST(RedirectionTable, MoveIntoReservedFrame) {
    SimConfig cfg = small_config(4, 4);
    RedirectionTable t(cfg);
    t.map(5, DevicePage{Device::NVM, 2});
    auto r = t.reserve_frame(Device::DRAM);
    ASSERT_TRUE(r);
    EXPECT_EQ(*r, (DevicePage{Device::DRAM, 0}));
    EXPECT_EQ(t.free_frames(Device::DRAM), 3u);
    t.commit_move(5, *r);
    EXPECT_EQ(*t.entry(5), (DevicePage{Device::DRAM, 0}));
    EXPECT_EQ(t.free_frames(Device::NVM), 4u);
    EXPECT_FALSE(t.owner(DevicePage{Device::NVM, 2}));
    EXPECT_TRUE(t.injective());
}

TEST(Hotness, CountsResetEachEpoch) {
    HotnessState h(4, 100);
    EXPECT_EQ(h.record(1, SimTime{0}), 1u);
    EXPECT_EQ(h.record(1, SimTime{99}), 2u);
    EXPECT_EQ(h.count(1, SimTime{99}), 2u);
    EXPECT_EQ(h.count(1, SimTime{100}), 0u);
    EXPECT_EQ(h.record(1, SimTime{150}), 1u);
}

TEST(SelectVictim, ColdestLowestPage) {
    SimConfig cfg = small_config(3, 3);
    RedirectionTable t(cfg);
    t.map(1, DevicePage{Device::DRAM, 0});
    t.map(2, DevicePage{Device::DRAM, 1});
    t.map(3, DevicePage{Device::DRAM, 2});
    HotnessState h(6, 1000);
    for (int i = 0; i < 5; ++i) h.record(1, SimTime{0});
    for (int i = 0; i < 2; ++i) h.record(2, SimTime{0});
    for (int i = 0; i < 2; ++i) h.record(3, SimTime{0});
    EXPECT_EQ(select_victim(h, t, SimTime{10}), 2u);

    BusyStatus busy;
    busy.pages = {2};
    EXPECT_EQ(select_victim(h, t, SimTime{10}, busy), 3u);
}

TEST(SelectVictim, NoneWhileDramHasRoom) {
    SimConfig cfg = small_config(3, 3);
    RedirectionTable t(cfg);
    t.map(1, DevicePage{Device::DRAM, 0});
    HotnessState h(6, 1000);
    EXPECT_FALSE(select_victim(h, t, SimTime{0}));
}

TEST(SelectVictim, MatchesBruteForce) {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 300; ++trial) {
        SimConfig cfg = small_config(6, 10);
        RedirectionTable t(cfg);
        for (HostPage p = 0; p < 16; ++p) t.touch(p);
        for (int i = 0; i < 20; ++i) {
            HostPage a = rng() % 16, b = rng() % 16;
            if (a != b) t.commit_swap(a, b);
        }
        HotnessState h(16, 1 << 20);
        for (int i = 0; i < 60; ++i) h.record(rng() % 16, SimTime{0});
        BusyStatus busy;
        if (rng() % 2) busy.pages.insert(rng() % 16);

        std::optional<HostPage> want;
        for (HostPage p = 0; p < 16; ++p) {
            if (t.entry(p)->device != Device::DRAM || busy.swapping(p)) continue;
            if (!want || h.count(p, SimTime{0}) < h.count(*want, SimTime{0})) want = p;
        }
        ASSERT_EQ(select_victim(h, t, SimTime{0}, busy), want);
    }
}

TEST(HotnessPolicy, PromotesOnAccessAfterThreshold) {
    SimConfig cfg = small_config(4, 8);
    RedirectionTable t(cfg);
    t.map(6, DevicePage{Device::NVM, 0});
    HotnessPolicy policy(t.host_pages(), 100000, 32);
    IdleSwapStatus idle;
    for (int i = 1; i <= 32; ++i) {
        auto a = policy.on_access(read_at(cfg, 6), SimTime{static_cast<Cycles>(i)}, t, idle);
        ASSERT_FALSE(a.migrate) << "access " << i;
        EXPECT_EQ(a.route.device, Device::NVM);
    }
    auto a = policy.on_access(read_at(cfg, 6), SimTime{33}, t, idle);
    ASSERT_TRUE(a.migrate);
    EXPECT_EQ(*a.migrate, (MigrateDirective{6, std::nullopt}));
    EXPECT_EQ(policy.promotions(), 1u);
}

TEST(HotnessPolicy, SwapsWithColdestWhenDramFull) {
    SimConfig cfg = small_config(2, 4);
    RedirectionTable t(cfg);
    t.map(0, DevicePage{Device::DRAM, 0});
    t.map(1, DevicePage{Device::DRAM, 1});
    t.map(3, DevicePage{Device::NVM, 0});
    HotnessPolicy policy(t.host_pages(), 100000, 2);
    IdleSwapStatus idle;
    policy.on_access(read_at(cfg, 0), SimTime{1}, t, idle);
    for (int i = 0; i < 2; ++i) EXPECT_FALSE(policy.on_access(read_at(cfg, 3), SimTime{2}, t, idle).migrate);
    auto a = policy.on_access(read_at(cfg, 3), SimTime{3}, t, idle);
    ASSERT_TRUE(a.migrate);
    EXPECT_EQ(*a.migrate, (MigrateDirective{3, HostPage{1}}));
}

TEST(HotnessPolicy, RespectsEngineState) {
    SimConfig cfg = small_config(4, 8);
    RedirectionTable t(cfg);
    t.map(6, DevicePage{Device::NVM, 0});
    t.map(1, DevicePage{Device::DRAM, 0});
    HotnessPolicy policy(t.host_pages(), 100000, 0);
    BusyStatus busy;
    busy.capacity = false;
    EXPECT_FALSE(policy.on_access(read_at(cfg, 6), SimTime{1}, t, busy).migrate);
    busy.capacity = true;
    busy.pages = {6};
    EXPECT_FALSE(policy.on_access(read_at(cfg, 6), SimTime{2}, t, busy).migrate);
    busy.pages.clear();
    EXPECT_FALSE(policy.on_access(read_at(cfg, 1), SimTime{3}, t, busy).migrate);
    EXPECT_TRUE(policy.on_access(read_at(cfg, 6), SimTime{4}, t, busy).migrate);
}

TEST(StaticPolicy, NeverMigrates) {
    SimConfig cfg = small_config(4, 8);
    RedirectionTable t(cfg);
    t.map(6, DevicePage{Device::NVM, 0});
    StaticPolicy policy;
    IdleSwapStatus idle;
    for (int i = 0; i < 1000; ++i) {
        auto a = policy.on_access(read_at(cfg, 6, 64), SimTime{static_cast<Cycles>(i)}, t, idle);
        ASSERT_FALSE(a.migrate);
        EXPECT_EQ(a.route, (DeviceAddress{Device::NVM, 64}));
    }
}
