#include <gtest/gtest.h>

#include <filesystem>
#include <memory>
#include <random>

#include "cogwifi/error.hpp"
#include "cogwifi/eval.hpp"
#include "cogwifi/simcore.hpp"
#include "support/oracles.hpp"

using namespace cogwifi;

namespace {

ScenarioConfig small(int stations, int duration, std::uint64_t seed, const std::string& extra = "") {
    return load_scenario("sta.count = " + std::to_string(stations) + "\nsim.duration_s = " + std::to_string(duration)
                         + "\nsim.seed = " + std::to_string(seed) + "\n" + extra);
}

// Associated before the controller ran at tick t (tick 0 has no predecessor).
int serving_before(const SimulationLog& log, std::size_t t, std::size_t s) {
    return t == 0 ? -1 : log.ticks[t - 1].serving[s];
}

std::shared_ptr<const ml::ForestModel> quick_forest() {
    static auto model = [] {
        const std::vector<std::uint64_t> seeds{501};
        const auto ds = collect_handover_dataset(small(30, 200, 501), seeds);
        ml::ForestParams p;
        p.n_trees = 15;
        return std::make_shared<const ml::ForestModel>(ml::rf_train(ds, p, 3));
    }();
    return model;
}

} // namespace

TEST(Airtime, SingleSaturatedStation) {
    const std::vector<BssMember> m{{1, 54.0, 1e9}};
    EXPECT_NEAR(bss_throughput_mbps(m).total_mbps, 32.4, 1e-12);
}

TEST(Airtime, IdenticalStationsSplitEvenly) {
    const std::vector<BssMember> m(5, BssMember{0, 24.0, 1e9});
    const auto a = bss_throughput_mbps(m);
    for (double v : a.per_sta_mbps) EXPECT_NEAR(v, 0.6 * 24.0 / 5, 1e-12);
    EXPECT_NEAR(a.total_mbps, 0.6 * 24.0, 1e-12);
}

// Equal airtime, not equal throughput: the fast station gets nine times the
// slow one's rate and the BSS carries 0.6 * (27 + 3) = 18 Mbps.
TEST(Airtime, FastAndSlowStationShareAirtime) {
    const std::vector<BssMember> m{{1, 54.0, 1e9}, {2, 6.0, 1e9}};
    const auto a = bss_throughput_mbps(m);
    const auto slots = oracle::airtime_slots(m, 0.6);
    EXPECT_NEAR(a.per_sta_mbps[0], slots[0], 1e-4);
    EXPECT_NEAR(a.per_sta_mbps[1], slots[1], 1e-4);
    EXPECT_NEAR(a.total_mbps, 18.0, 1e-12);
}

TEST(Airtime, MatchesSlotSimulationAndConserves) {
    std::mt19937_64 eng(19);
    const auto& rates = RateTable::default_table().steps();
    std::uniform_int_distribution<std::size_t> pick(0, rates.size());
    std::uniform_real_distribution<double> demand(0.0, 12.0);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<BssMember> m(1 + trial % 6);
        for (auto& x : m) {
            const auto r = pick(eng);
            x.phy_rate_mbps = r == rates.size() ? 0.0 : rates[r].rate_mbps;
            x.demand_mbps = demand(eng);
        }
        const auto a = bss_throughput_mbps(m);
        const auto want = oracle::airtime_slots(m, 0.6, 400000);
        double sum = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) {
            EXPECT_NEAR(a.per_sta_mbps[i], want[i], 2e-3) << trial << "/" << i;
            EXPECT_LE(a.per_sta_mbps[i], m[i].demand_mbps + 1e-12);
            if (m[i].phy_rate_mbps == 0.0) EXPECT_EQ(a.per_sta_mbps[i], 0.0);
            sum += a.per_sta_mbps[i];
        }
        EXPECT_DOUBLE_EQ(a.total_mbps, sum);
    }
}

TEST(Register, RingBufferKeepsTheNewestTen) {
    RssRegister r;
    for (int t = 0; t < 10; ++t) r.push(t, -60.0 - t);
    EXPECT_EQ(r.size(), 10u);
    r.push(10, -99.0);
    EXPECT_EQ(r.size(), 10u);
    EXPECT_EQ(r.at(0).t, 1);
    EXPECT_EQ(r.newest().rss_dbm, -99.0);
    EXPECT_THROW(r.push(10, -50.0), ValidationError);
}

TEST(Register, WindowFrontPadsWithOldest) {
    RssRegister r;
    std::array<double, kWindow> w;
    EXPECT_FALSE(r.window(w));
    r.push(5, -70);
    r.push(6, -71);
    ASSERT_TRUE(r.window(w));
    for (int i = 0; i < 9; ++i) EXPECT_EQ(w[i], -70.0);
    EXPECT_EQ(w[9], -71.0);
    r.expire(15);
    EXPECT_EQ(r.size(), 1u);
    r.expire(16);
    EXPECT_TRUE(r.empty());
}

// Every register must hold exactly the in-range samples of the last ten
// seconds, checked against the RSS the log recorded.
TEST(Register, ContentsFollowTheLog) {
    auto cfg = small(6, 80, 3, "sta.mobility.speed_min = 3\nsta.mobility.speed_max = 6\nradio.tx_power_mw = 0.05\n");
    Simulator sim(cfg, Policies{});
    const double floor_dbm = cfg.radio.noise_floor_dbm + RateTable::default_table().min_snr();
    while (!sim.finished()) {
        sim.tick();
        const auto& log = sim.log();
        const int now = sim.now() - 1;
        for (std::size_t s = 0; s < log.sta_ids.size(); ++s)
            for (std::size_t a = 0; a < log.ap_ids.size(); ++a) {
                std::vector<int> want;
                for (int t = std::max(0, now - kWindow + 1); t <= now; ++t)
                    if (log.rss(static_cast<std::size_t>(t), s, a) >= floor_dbm) want.push_back(t);
                const auto& reg = sim.rss_register(log.sta_ids[s], log.ap_ids[a]);
                ASSERT_EQ(reg.size(), want.size()) << "t=" << now;
                for (std::size_t i = 0; i < want.size(); ++i) {
                    EXPECT_EQ(reg.at(i).t, want[i]);
                    EXPECT_EQ(reg.at(i).rss_dbm, log.rss(static_cast<std::size_t>(want[i]), s, a));
                }
            }
    }
}

TEST(Simulator, StaticNetworkAccumulatesTwoSamples) {
    auto cfg = load_scenario("sta.count = 1\nsta.1.mobility.kind = waypoints\nsta.1.waypoints = 150,50,0\n");
    Simulator sim(cfg, Policies{});
    sim.tick();
    sim.tick();
    for (int ap : {1, 2, 3}) EXPECT_EQ(sim.rss_register(1, ap).size(), 2u);
}

// A station joins at its first beacon exactly when some AP is in range.
TEST(Simulator, DefaultScenarioAssociatesAtFirstBeaconInRange) {
    const auto cfg = load_scenario("sim.record_packets = false\n");
    const auto log = run(cfg, Policies{});
    ASSERT_EQ(log.ticks.size(), 300u);
    EXPECT_EQ(log.sta_ids.size(), 50u);
    EXPECT_EQ(log.ap_ids.size(), 3u);
    const double floor_dbm = cfg.radio.noise_floor_dbm + RateTable::default_table().min_snr();
    int joined = 0;
    for (std::size_t s = 0; s < log.sta_ids.size(); ++s) {
        bool reachable = false;
        for (std::size_t a = 0; a < log.ap_ids.size(); ++a) reachable |= log.rss(0, s, a) >= floor_dbm;
        EXPECT_EQ(log.ticks[0].serving[s] >= 0, reachable) << "s=" << s;
        joined += reachable;
    }
    EXPECT_GT(joined, 25);
}

TEST(Simulator, LoneApAndStaticStationNeverHandOver) {
    auto cfg = load_scenario(
        "sta.count = 1\nsta.1.mobility.kind = waypoints\nsta.1.waypoints = 40,40,0\nap.1.x = 45\nap.1.y = 45\n"
        "sim.duration_s = 120\n");
    const auto log = run(cfg, Policies{});
    EXPECT_TRUE(log.handovers.empty());
    EXPECT_EQ(log.predictor_calls, 0u);
}

TEST(Simulator, SameSeedSameLog) {
    const auto cfg = small(25, 120, 8);
    const auto a = run(cfg, Policies{});
    const auto b = run(cfg, Policies{});
    EXPECT_EQ(a.hash(), b.hash());
    EXPECT_EQ(a.ticks, b.ticks);
    EXPECT_EQ(a.packets, b.packets);
    EXPECT_NE(a.hash(), run(small(25, 120, 9), Policies{}).hash());
}

TEST(Simulator, PoliciesFaceTheSameEnvironment) {
    const auto cfg = small(25, 120, 12);
    const auto ssf = run(cfg, Policies{HandoverPolicy::rss_forecast(), ApSelectionPolicy::ssf()});
    const auto llf = run(cfg, Policies{HandoverPolicy::travel_distance(), ApSelectionPolicy::llf()});
    EXPECT_EQ(ssf.environment_hash(), llf.environment_hash());
    EXPECT_NE(ssf.hash(), llf.hash());
}

TEST(Simulator, ExecuteHandoverValidates) {
    Simulator sim(small(3, 30, 1), Policies{});
    EXPECT_THROW(sim.execute_handover(1, 2, HandoverCause::Baseline), ValidationError);   // not yet associated
    sim.tick();
    const int ap = sim.association(1).ap_id;
    try {
        sim.execute_handover(1, ap, HandoverCause::Baseline);
        FAIL() << "expected a validation error";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("no-op handover rejected"), std::string::npos);
    }
    EXPECT_THROW(sim.execute_handover(1, 99, HandoverCause::Baseline), ValidationError);
    const int other = ap == 1 ? 2 : 1;
    sim.execute_handover(1, other, HandoverCause::Baseline);
    EXPECT_EQ(sim.association(1).ap_id, other);
    EXPECT_EQ(sim.log().handovers.back(), (HandoverEvent{1, 1, ap, other, HandoverCause::Baseline}));
}

// The five back-and-forth moves of the overlap-walk example, driven by hand.
TEST(Simulator, AlternatingHandoversAreLoggedInOrder) {
    auto cfg = load_scenario(
        "sta.count = 1\nsta.1.mobility.kind = waypoints\nsta.1.waypoints = 100,50,0\n"
        "ap.1.x = 90\nap.1.y = 50\nap.2.x = 110\nap.2.y = 50\nctl.reselect = false\n");
    Simulator sim(cfg, Policies{});
    sim.tick();
    int at = sim.association(1).ap_id;
    std::vector<HandoverEvent> want;
    for (int k = 0; k < 5; ++k) {
        sim.tick();
        const int to = 3 - at;
        sim.execute_handover(1, to, HandoverCause::Baseline);
        want.push_back({sim.now(), 1, at, to, HandoverCause::Baseline});
        at = to;
    }
    EXPECT_EQ(sim.log().handovers, want);
}

TEST(Controller, ForestIsOnlyConsultedBetweenThresholds) {
    const auto cfg = small(30, 200, 77);
    const auto log = run(cfg, Policies{HandoverPolicy::proposed(quick_forest()), ApSelectionPolicy::ssf()});
    std::uint64_t expected_calls = 0;
    for (std::size_t t = 0; t < log.ticks.size(); ++t)
        for (std::size_t s = 0; s < log.sta_ids.size(); ++s) {
            const int prev = serving_before(log, t, s);
            if (prev < 0) continue;
            const double r = log.rss(t, s, log.ap_index(prev));
            if (r < cfg.t1_dbm && r >= cfg.t2_dbm) ++expected_calls;
        }
    EXPECT_GT(expected_calls, 0u);
    EXPECT_EQ(log.predictor_calls, expected_calls);
    std::uint64_t predictions = 0;
    for (const auto& d : log.decisions) predictions += d.kind == DecisionKind::Prediction;
    EXPECT_EQ(predictions, expected_calls);
}

TEST(Controller, StrongCoverageNeverRunsTheForest) {
    auto cfg = small(10, 100, 5, "radio.tx_power_mw = 100000\n");
    const auto log = run(cfg, Policies{HandoverPolicy::proposed(quick_forest()), ApSelectionPolicy::ssf()});
    for (std::size_t t = 1; t < log.ticks.size(); ++t)
        for (std::size_t s = 0; s < log.sta_ids.size(); ++s)
            ASSERT_GE(log.rss(t, s, log.ap_index(log.ticks[t - 1].serving[s])), cfg.t1_dbm);
    EXPECT_EQ(log.predictor_calls, 0u);
    EXPECT_TRUE(log.decisions.empty());
}

TEST(Controller, EveryBeaconBelowT2LeavesTheServingAp) {
    for (auto ho : {HandoverPolicy::rss_forecast(), HandoverPolicy::travel_distance(),
                    HandoverPolicy::proposed(quick_forest())}) {
        const auto cfg = small(30, 200, 31, "radio.tx_power_mw = 0.2\n");
        const auto log = run(cfg, Policies{ho, ApSelectionPolicy::ssf()});
        int forced = 0;
        for (std::size_t t = 0; t < log.ticks.size(); ++t)
            for (std::size_t s = 0; s < log.sta_ids.size(); ++s) {
                const int prev = serving_before(log, t, s);
                if (prev < 0 || log.rss(t, s, log.ap_index(prev)) >= cfg.t2_dbm) continue;
                ++forced;
                const bool moved = std::any_of(log.handovers.begin(), log.handovers.end(), [&](const HandoverEvent& e) {
                    return e.t == static_cast<int>(t) && e.sta_id == log.sta_ids[s] && e.from_ap == prev;
                });
                EXPECT_TRUE(moved || log.ticks[t].serving[s] == -1) << ho.name() << " t=" << t << " s=" << s;
            }
        EXPECT_GT(forced, 0) << ho.name();
    }
}

TEST(Controller, OneDecisionRowPerArmedBeacon) {
    const auto cfg = small(30, 200, 44, "radio.tx_power_mw = 0.3\n");
    const auto log = run(cfg, Policies{});
    std::size_t armed = 0;
    for (std::size_t t = 0; t < log.ticks.size(); ++t)
        for (std::size_t s = 0; s < log.sta_ids.size(); ++s) {
            const int prev = serving_before(log, t, s);
            if (prev >= 0 && log.rss(t, s, log.ap_index(prev)) < cfg.t1_dbm) ++armed;
        }
    EXPECT_EQ(log.decisions.size(), armed);
}

// The offline builder must see exactly the windows the controller saw.
TEST(Controller, OfflineDatasetReplaysDecisionWindows) {
    const auto cfg = small(30, 200, 45, "radio.tx_power_mw = 0.3\n");
    const auto log = run(cfg, Policies{});
    const auto ds = build_handover_dataset(log);
    // Forced rows need no lookahead; the others need the hysteresis horizon.
    auto usable = [&](const DecisionRecord& d) {
        return d.kind == DecisionKind::Forced || d.t + kHysteresisS < static_cast<int>(log.ticks.size());
    };
    ASSERT_EQ(ds.size(), static_cast<std::size_t>(std::count_if(log.decisions.begin(), log.decisions.end(), usable)));
    // The builder walks station-major, the controller logs tick-major.
    auto decisions = log.decisions;
    std::stable_sort(decisions.begin(), decisions.end(), [&](const DecisionRecord& a, const DecisionRecord& b) {
        return log.sta_index(a.sta_id) < log.sta_index(b.sta_id);
    });
    std::size_t row = 0;
    for (const auto& d : decisions) {
        if (!usable(d)) continue;
        for (int k = 0; k < kWindow; ++k) EXPECT_EQ(ds.x[row][static_cast<std::size_t>(k)], d.window[static_cast<std::size_t>(k)]);
        if (d.kind == DecisionKind::Forced) EXPECT_EQ(ds.y[row], 1.0);
        ++row;
    }
}

TEST(Controller, ProposedPolicyNeedsItsModel) {
    const auto cfg = small(3, 30, 1);
    EXPECT_THROW(run(cfg, Policies{HandoverPolicy::proposed(nullptr), ApSelectionPolicy::ssf()}), ValidationError);
    EXPECT_THROW(run(cfg, Policies{HandoverPolicy::rss_forecast(), ApSelectionPolicy::proposed(nullptr)}),
                 ValidationError);
}

TEST(Controller, CongestionTriggersReselectionOnlyWhenEnabled) {
    const auto on = run(small(40, 150, 6, "sta.demand_mbps = 4\n"), Policies{HandoverPolicy::rss_forecast(),
                                                                             ApSelectionPolicy::llf()});
    const auto off = run(small(40, 150, 6, "sta.demand_mbps = 4\nctl.reselect = false\n"),
                         Policies{HandoverPolicy::rss_forecast(), ApSelectionPolicy::llf()});
    auto count = [](const SimulationLog& l) {
        return std::count_if(l.handovers.begin(), l.handovers.end(),
                             [](const HandoverEvent& e) { return e.cause == HandoverCause::Reselection; });
    };
    EXPECT_GT(count(on), 0);
    EXPECT_EQ(count(off), 0);
}

TEST(LogCsv, RoundTripsEveryExportedField) {
    auto log = run(small(8, 40, 21, "radio.tx_power_mw = 0.3\n"), Policies{});
    const auto dir = std::filesystem::temp_directory_path() / "cogwifi_log_rt";
    std::filesystem::remove_all(dir);
    write_log_csv(log, dir);
    const auto back = read_log_csv(dir);
    EXPECT_EQ(back.ap_ids, log.ap_ids);
    EXPECT_EQ(back.sta_ids, log.sta_ids);
    EXPECT_EQ(back.t1_dbm, log.t1_dbm);
    EXPECT_EQ(back.t2_dbm, log.t2_dbm);
    EXPECT_EQ(back.ticks, log.ticks);
    EXPECT_EQ(back.handovers, log.handovers);
    EXPECT_EQ(back.packets, log.packets);
    EXPECT_EQ(back.predictor_calls, log.predictor_calls);
    EXPECT_TRUE(back.decisions.empty());
    log.decisions.clear();
    EXPECT_EQ(back.hash(), log.hash());
    std::filesystem::remove_all(dir);
}
