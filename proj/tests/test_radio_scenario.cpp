#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cogwifi/error.hpp"
#include "cogwifi/radio.hpp"
#include "cogwifi/rng.hpp"
#include "cogwifi/scenario.hpp"
#include "cogwifi/simcore.hpp"
#include "support/oracles.hpp"

using namespace cogwifi;

namespace {

RadioParams hundred_mw() {
    RadioParams p;
    p.tx_power_mw = 100.0;
    p.path_loss_exponent = 3.0;
    return p;
}

} // namespace

TEST(Radio, UnitDistanceIsTransmitPower) {
    EXPECT_NEAR(rss_dbm(hundred_mw(), 1.0, 0, 0, WallLosses{}, 0.0), 20.0, 1e-12);
}

TEST(Radio, TenMetresLosesThirtyDb) {
    EXPECT_NEAR(rss_dbm(hundred_mw(), 10.0, 0, 0, WallLosses{}, 0.0), -10.0, 1e-12);
}

TEST(Radio, ExternalWallCostsSevenDb) {
    EXPECT_NEAR(rss_dbm(hundred_mw(), 10.0, 1, 0, WallLosses{}, 0.0), -17.0, 1e-12);
}

TEST(Radio, DbFormMatchesLinearProduct) {
    std::mt19937_64 eng(11);
    std::uniform_real_distribution<double> d(0.2, 400.0), pw(0.01, 200.0), beta(1.5, 5.0);
    std::normal_distribution<double> z;
    std::uniform_int_distribution<int> walls(0, 6);
    for (int i = 0; i < 2000; ++i) {
        RadioParams p;
        p.tx_power_mw = pw(eng);
        p.path_loss_exponent = beta(eng);
        const double dist = d(eng), draw = z(eng);
        const int e = walls(eng), w = walls(eng);
        const double a = rss_dbm(p, dist, e, w, WallLosses{}, draw);
        const double b = rss_dbm_linear(p, dist, e, w, WallLosses{}, draw);
        EXPECT_LT(oracle::rel_err(a, b), 1e-9) << a << " vs " << b;
    }
}

TEST(Radio, DistanceInversionRoundTrips) {
    const auto p = hundred_mw();
    EXPECT_NEAR(estimate_distance_m(20.0, p), 1.0, 1e-12);
    EXPECT_NEAR(estimate_distance_m(-10.0, p), 10.0, 1e-12);
    std::mt19937_64 eng(5);
    std::uniform_real_distribution<double> u(1.0, 100.0);
    for (int i = 0; i < 100; ++i) {
        const double d = u(eng);
        EXPECT_LT(oracle::rel_err(estimate_distance_m(rss_dbm(p, d, 0, 0, WallLosses{}, 0.0), p), d), 1e-9);
    }
}

TEST(Radio, RssDecreasesWithDistance) {
    const RadioParams p;
    double prev = rss_dbm(p, 0.5, 0, 0, WallLosses{}, 0.3);
    for (double d = 1.0; d < 500.0; d *= 1.3) {
        const double r = rss_dbm(p, d, 0, 0, WallLosses{}, 0.3);
        EXPECT_LT(r, prev);
        prev = r;
    }
}

TEST(Radio, SnrIsDifference) {
    EXPECT_DOUBLE_EQ(snr_db(-60, -90), 30.0);
    EXPECT_DOUBLE_EQ(snr_db(-90, -90), 0.0);
    EXPECT_DOUBLE_EQ(snr_db(-95, -90), -5.0);
}

TEST(Radio, RateLadderBoundaries) {
    const auto& t = RateTable::default_table();
    EXPECT_EQ(phy_rate_mbps(4.99, t), 0.0);
    EXPECT_EQ(phy_rate_mbps(5.0, t), 6.0);
    EXPECT_EQ(phy_rate_mbps(13.0, t), 18.0);
    EXPECT_EQ(phy_rate_mbps(24.999, t), 48.0);
    EXPECT_EQ(phy_rate_mbps(50.0, t), 54.0);
}

TEST(Radio, RateTableRejectsNonMonotoneRows) {
    EXPECT_THROW(RateTable({{5, 6}, {4, 9}}), ValidationError);
    EXPECT_THROW(RateTable({{5, 6}, {8, 6}}), ValidationError);
}

TEST(Radio, ShadowingDrawsHaveConfiguredMoments) {
    RadioParams p;
    p.shadowing_sigma_db = 4.0;
    const double base = rss_dbm(p, 20.0, 0, 0, WallLosses{}, 0.0);
    auto eng = rng::make_engine(99, "shadow-check");
    std::normal_distribution<double> z;
    const int n = 200000;
    double s = 0, ss = 0;
    for (int i = 0; i < n; ++i) {
        const double e = rss_dbm(p, 20.0, 0, 0, WallLosses{}, z(eng)) - base;
        s += e;
        ss += e * e;
    }
    const double mean = s / n, sd = std::sqrt(ss / n - mean * mean);
    EXPECT_LT(std::fabs(mean), 0.05 * p.shadowing_sigma_db);
    EXPECT_LT(std::fabs(sd / p.shadowing_sigma_db - 1.0), 0.02);
}

// The simulator's per-link shadowing is correlated in time; its marginal
// distribution must still be N(0, sigma^2).
TEST(Radio, SimulatedLinkShadowingKeepsMarginalMoments) {
    ScenarioConfig cfg = load_scenario(
        "sta.count = 1\nsta.demand_mbps = 0\nsta.1.mobility.kind = waypoints\n"
        "sta.1.waypoints = 155,55,0\nap.1.x = 135\nap.1.y = 55\nsim.duration_s = 100000\n"
        "sim.record_packets = false\n");
    const auto log = run(cfg, Policies{});
    const Position ap = cfg.aps[0].pos, sta = log.ticks[0].positions[0];
    const auto walls = wall_count(sta, ap, cfg.building);
    RadioParams r = cfg.radio;
    const double base = rss_dbm(r, distance(sta, ap), walls.external, walls.internal,
                                {cfg.building.external_wall_loss_db, cfg.building.internal_wall_loss_db}, 0.0);
    double s = 0, ss = 0;
    const auto n = static_cast<double>(log.ticks.size());
    for (std::size_t t = 0; t < log.ticks.size(); ++t) {
        const double e = log.rss(t, 0, 0) - base;
        s += e;
        ss += e * e;
    }
    const double mean = s / n, sd = std::sqrt(ss / n - mean * mean);
    EXPECT_LT(std::fabs(mean), 0.05 * r.shadowing_sigma_db);
    EXPECT_LT(std::fabs(sd / r.shadowing_sigma_db - 1.0), 0.02);
}

TEST(Scenario, DefaultsDescribeTheCommercialBuilding) {
    const auto cfg = load_scenario("");
    EXPECT_EQ(cfg.building.width_m, 300.0);
    EXPECT_EQ(cfg.building.depth_m, 100.0);
    EXPECT_EQ(cfg.building.floors, 1);
    EXPECT_EQ(cfg.building.rooms_x, 30);
    EXPECT_EQ(cfg.building.rooms_y, 10);
    EXPECT_EQ(cfg.building.external_wall_loss_db, 7.0);
    EXPECT_EQ(cfg.aps.size(), 3u);
    EXPECT_EQ(cfg.stations.size(), 50u);
    EXPECT_EQ(cfg.t1_dbm, -75.0);
    EXPECT_EQ(cfg.t2_dbm, -85.0);
}

TEST(Scenario, ExplicitBuildingEchoes) {
    const auto cfg = load_scenario(
        "building.width_m = 300\nbuilding.depth_m = 100\nbuilding.floors = 1\n"
        "building.rooms_x = 30\nbuilding.rooms_y = 10\nbuilding.ewl_db = 7\n");
    EXPECT_EQ(cfg.building, load_scenario("").building);
}

TEST(Scenario, InvertedThresholdsRejected) {
    try {
        load_scenario("thresholds.t1_dbm = -85\nthresholds.t2_dbm = -75\n");
        FAIL() << "expected a validation error";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("t2 must be below t1"), std::string::npos);
    }
}

TEST(Scenario, UnknownKeyIsAParseError) { EXPECT_THROW(load_scenario("radio.betta = 3\n"), ParseError); }

TEST(Scenario, SaveLoadRoundTrip) {
    auto cfg = load_scenario(
        "sta.count = 4\nsta.2.demand_mbps = 0.25\nsta.3.mobility.kind = waypoints\n"
        "sta.3.waypoints = 10,10,2; 40,12,0\nap.1.x = 20\nap.1.y = 30\nap.2.x = 120.5\nap.2.y = 70\n"
        "radio.sigma_db = 3.3\nsim.seed = 77\nctl.holdoff_s = 4\n");
    const auto again = load_scenario(save_scenario(cfg));
    EXPECT_EQ(cfg, again);
    EXPECT_EQ(scenario_hash(cfg), scenario_hash(again));
}

TEST(Mobility, FirstWaypointAtTimeZero) {
    MobilitySpec m;
    m.kind = WaypointPath{{{{3, 4, 1.5}, 0.0}, {{13, 4, 1.5}, 0.0}}, 2.0};
    EXPECT_EQ(position_at(m, 0.0, 1), (Position{3, 4, 1.5}));
}

TEST(Mobility, LinearTravelHitsMidpoint) {
    MobilitySpec m;
    // A to B is 10 m at 1 m/s: halfway at t = 5.
    m.kind = WaypointPath{{{{0, 0, 1.5}, 0.0}, {{6, 8, 1.5}, 0.0}}, 1.0};
    const auto p = position_at(m, 5.0, 1);
    EXPECT_NEAR(p.x, 3.0, 1e-12);
    EXPECT_NEAR(p.y, 4.0, 1e-12);
}

TEST(Mobility, RandomWalkDeterministicBoundedAndSpeedLimited) {
    MobilitySpec m;
    m.kind = RandomWalk{0.5, 1.5, 10.0};
    m.bounds = {0, 0, 300, 100};
    EXPECT_EQ(position_at(m, 7.0, 42), position_at(m, 7.0, 42));
    Trajectory tr(m, 42);
    Position prev = tr.at(0.0);
    for (int t = 1; t <= 2000; ++t) {
        const auto p = tr.at(t);
        EXPECT_TRUE(m.bounds.contains(p)) << "t=" << t;
        // Reflection can only shorten the displacement.
        EXPECT_LE(distance(p, prev), 1.5 + 1e-9);
        EXPECT_EQ(p, position_at(m, t, 42));
        prev = p;
    }
}

TEST(Walls, SameRoomNoCrossing) {
    const BuildingSpec b;
    EXPECT_EQ(wall_count({11, 11, 0}, {18, 19, 0}, b), (WallCrossings{0, 0}));
}

TEST(Walls, LeavingTheBuildingCrossesOnce) {
    const BuildingSpec b;
    EXPECT_EQ(wall_count({5, 5, 0}, {-5, 5, 0}, b), (WallCrossings{1, 0}));
}

TEST(Walls, AdjacentRoomsOnePartition) {
    const BuildingSpec b;
    EXPECT_EQ(wall_count({15, 15, 0}, {25, 15, 0}, b), (WallCrossings{0, 1}));
}

TEST(Walls, MatchesSegmentWalk) {
    const BuildingSpec b;
    std::mt19937_64 eng(3);
    std::uniform_real_distribution<double> x(-30, 330), y(-20, 120);
    for (int i = 0; i < 60; ++i) {
        const Position p{x(eng), y(eng), 0}, q{x(eng), y(eng), 0};
        const auto got = wall_count(p, q, b);
        const auto want = oracle::walk_walls(p, q, b);
        EXPECT_EQ(got.external, want.external) << i;
        EXPECT_EQ(got.internal, want.internal) << i;
        EXPECT_EQ(got, wall_count(q, p, b));
    }
}
