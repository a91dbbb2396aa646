#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hymem/device_timing.hpp"

using namespace hymem;

namespace {

// base * (target - ref) / ref rounded half up, by quotient and remainder
Cycles stall_oracle(Cycles base, std::uint64_t ref, std::uint64_t target) {
    if (target <= ref) return 0;
    const std::uint64_t num = base * (target - ref);
    const std::uint64_t q = num / ref;
    const std::uint64_t rem = num % ref;
    return 2 * rem >= ref ? q + 1 : q;
}

DeviceTiming timing(Cycles rd, Cycles wr, Cycles rs, Cycles ws, Cycles link, std::uint32_t slots = 1) {
    DeviceTiming t;
    t.read_cycles = rd;
    t.write_cycles = wr;
    t.read_stall = rs;
    t.write_stall = ws;
    t.link = link;
    t.slots = slots;
    return t;
}

} // namespace

TEST(Stall, KnownValues) {
    EXPECT_EQ(derive_stall_cycles(20, 50, 150), 40u);
    EXPECT_EQ(derive_stall_cycles(20, 50, 50), 0u);
    EXPECT_EQ(derive_stall_cycles(20, 50, 500), 180u);
    EXPECT_EQ(derive_stall_cycles(50, 50, 150), 100u);
    EXPECT_EQ(derive_stall_cycles(50, 50, 500), 450u);
}

TEST(Stall, FasterTargetNeverGoesNegative) {
    EXPECT_EQ(derive_stall_cycles(20, 50, 10), 0u);
}

TEST(Stall, MatchesOracleOverRandomInputs) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 20000; ++i) {
        Cycles base = 1 + rng() % 5000;
        std::uint64_t ref = 1 + rng() % 500;
        std::uint64_t target = rng() % 5000;
        ASSERT_EQ(derive_stall_cycles(base, ref, target), stall_oracle(base, ref, target))
            << base << " " << ref << " " << target;
    }
}

TEST(Stall, MonotoneInTarget) {
    for (std::uint64_t t = 0; t < 2000; ++t)
        ASSERT_LE(derive_stall_cycles(37, 50, t), derive_stall_cycles(37, 50, t + 1));
}

TEST(DeviceState, IdleServiceTimes) {
    DeviceState dram(timing(20, 20, 0, 0, 30));
    EXPECT_EQ(dram.service(Op::Read, SimTime{0}).cycles, 50u);

    DeviceState nvm(timing(20, 20, 40, 180, 30));
    EXPECT_EQ(nvm.service(Op::Read, SimTime{1000}).cycles, 1090u);
    EXPECT_EQ(nvm.service(Op::Write, SimTime{2000}).cycles, 2230u);
}

TEST(DeviceState, SingleSlotQueues) {
    DeviceState d(timing(20, 20, 0, 0, 30));
    EXPECT_EQ(d.service(Op::Read, SimTime{0}).cycles, 50u);
    EXPECT_EQ(d.service(Op::Read, SimTime{10}).cycles, 100u);
    EXPECT_EQ(d.slot_waits(), 1u);
    EXPECT_EQ(d.in_flight(SimTime{60}), 1u);
    EXPECT_EQ(d.in_flight(SimTime{100}), 0u);
}

TEST(DeviceState, SlotsOverlap) {
    DeviceState d(timing(20, 20, 0, 0, 30, 2));
    EXPECT_EQ(d.service(Op::Read, SimTime{0}).cycles, 50u);
    EXPECT_EQ(d.service(Op::Read, SimTime{0}).cycles, 50u);
    EXPECT_EQ(d.service(Op::Read, SimTime{0}).cycles, 100u);
}

TEST(DeviceState, CompletionNeverBeforeIdleRoundTrip) {
    std::mt19937_64 rng(3);
    DeviceTiming t = timing(20, 25, 40, 180, 30, 3);
    DeviceState d(t);
    SimTime now{};
    for (int i = 0; i < 10000; ++i) {
        now = now + rng() % 100;
        Op op = rng() % 2 ? Op::Read : Op::Write;
        SimTime done = d.service(op, now);
        ASSERT_GE(done - now, t.round_trip(op));
    }
}

TEST(Calibration, DefaultNvmStretchesRoundTrip) {
    SimConfig cfg;
    auto t = calibrate_timing(cfg);
    const auto& dram = t[index_of(Device::DRAM)];
    const auto& nvm = t[index_of(Device::NVM)];
    EXPECT_EQ(dram.round_trip(Op::Read), 50u);
    EXPECT_EQ(dram.read_stall, 0u);
    EXPECT_EQ(nvm.read_stall, 100u);
    EXPECT_EQ(nvm.write_stall, 450u);
    EXPECT_EQ(nvm.round_trip(Op::Read), 150u);
    EXPECT_EQ(nvm.round_trip(Op::Write), 500u);
}

TEST(Calibration, OverridesWin) {
    SimConfig cfg;
    cfg.timing_of(Device::NVM).read_stall_override = 40;
    auto t = calibrate_timing(cfg);
    EXPECT_EQ(t[index_of(Device::NVM)].read_stall, 40u);
    EXPECT_EQ(t[index_of(Device::NVM)].write_stall, 450u);
}

TEST(Calibration, StallsNonNegativeAndRatiosWithinRounding) {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 500; ++i) {
        SimConfig cfg;
        cfg.link_latency = rng() % 60;
        for (Device d : kDevices) {
            auto& t = cfg.timing_of(d);
            t.base_read_cycles = 1 + rng() % 60;
            t.base_write_cycles = 1 + rng() % 60;
            t.target_read_ns = 50 + rng() % 451;
            t.target_write_ns = 50 + rng() % 451;
        }
        auto timing = calibrate_timing(cfg);
        for (Device d : kDevices) {
            const auto& t = timing[index_of(d)];
            const auto& c = cfg.timing_of(d);
            for (Op op : {Op::Read, Op::Write}) {
                std::uint64_t target = op == Op::Read ? c.target_read_ns : c.target_write_ns;
                double base_rt = static_cast<double>(t.base(op) + t.link);
                double want = base_rt * static_cast<double>(target) / 50.0;
                ASSERT_LE(std::abs(static_cast<double>(t.round_trip(op)) - want), 0.5 + 1e-9);
            }
        }
    }
}

TEST(Calibration, MeasuredRatios) {
    SimConfig cfg;
    auto dram = measure_round_trip(cfg, Device::DRAM, 1000);
    auto nvm = measure_round_trip(cfg, Device::NVM, 1000);
    EXPECT_DOUBLE_EQ(nvm.read_mean / dram.read_mean, 3.0);
    EXPECT_DOUBLE_EQ(nvm.write_mean / dram.write_mean, 10.0);
}
