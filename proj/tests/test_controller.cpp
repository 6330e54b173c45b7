#include <gtest/gtest.h>

#include <functional>
#include <memory>
#include <random>

#include "cogwifi/controller.hpp"
#include "cogwifi/error.hpp"

using namespace cogwifi;

namespace {

constexpr double kT1 = -75.0, kT2 = -85.0;

// Synthetic training traces: long steady declines keep falling (label 1),
// a steady link with a late 3-second dip recovers (label 0), strong links stay.
std::shared_ptr<const ml::ForestModel> dip_aware_forest() {
    static auto model = [] {
        std::mt19937_64 eng(17);
        std::uniform_real_distribution<double> start(-76, -71), slope(0.9, 1.4), level(-79, -75), drop(2.0, 3.0),
            strong(-66, -55);
        std::normal_distribution<double> noise(0.0, 0.15);
        ml::Matrix x;
        std::vector<int> y;
        auto push = [&](const std::array<double, kWindow>& w, int label) {
            const auto f = HandoverSample::from_window(w, label).features();
            x.emplace_back(f.begin(), f.end());
            y.push_back(label);
        };
        for (int i = 0; i < 400; ++i) {
            std::array<double, kWindow> w;
            const double s0 = start(eng), k = slope(eng);
            for (int t = 0; t < kWindow; ++t) w[t] = s0 - k * t + noise(eng);
            push(w, 1);
            const double l = level(eng), d = drop(eng);
            for (int t = 0; t < kWindow; ++t) w[t] = (t < 7 ? l : l - d * (t - 6)) + noise(eng);
            push(w, 0);
            const double s = strong(eng);
            for (int t = 0; t < kWindow; ++t) w[t] = s + noise(eng);
            push(w, 0);
        }
        ml::ForestParams p;
        p.n_trees = 31;
        return std::make_shared<const ml::ForestModel>(ml::rf_train(x, y, p, 5));
    }();
    return model;
}

std::vector<ApCandidate> two_candidates() {
    ApCandidate a, b;
    a.ap_id = 1;
    a.rss_dbm = -70;
    b.ap_id = 2;
    b.rss_dbm = -60;
    return {a, b};
}

// Linear regressor whose prediction equals the candidate's mean SNR plus `shift`.
std::shared_ptr<const ml::MlpModel> snr_echo(double shift) {
    auto m = ml::mlp_init(11, {}, 1);
    std::fill(m.weights[0].begin(), m.weights[0].end(), 0.0);
    m.weights[0][1] = 1.0;
    m.y_scale = {shift, 1.0};
    return std::make_shared<const ml::MlpModel>(m);
}

ApCandidate scored(int id, double rss, int clients, double with_snr, std::optional<double> now_snr) {
    ApCandidate c;
    c.ap_id = id;
    c.rss_dbm = rss;
    c.n_clients = clients;
    ApSelectionSample s;
    s.n_clients = clients + 1;
    s.snr.mean = with_snr;
    c.with_request = s;
    if (now_snr) {
        s.n_clients = clients;
        s.snr.mean = *now_snr;
        c.current = s;
    }
    return c;
}

// Builds a one-station, two-AP log from per-second RSS series and a policy
// that decides, each second, whether to move to the other AP.
SimulationLog replay(const std::vector<double>& ap1, const std::vector<double>& ap2,
                     const std::function<bool(std::size_t t, int serving)>& move) {
    SimulationLog log;
    log.ap_ids = {1, 2};
    log.sta_ids = {1};
    log.t1_dbm = kT1;
    log.t2_dbm = kT2;
    int serving = 1;
    for (std::size_t t = 0; t < ap1.size(); ++t) {
        TickRecord r;
        r.t = static_cast<int>(t);
        r.rss_dbm = {ap1[t], ap2[t]};
        if (t > 0 && move(t, serving)) {
            log.handovers.push_back({r.t, 1, serving, 3 - serving, HandoverCause::Baseline});
            serving = 3 - serving;
        }
        r.serving = {serving};
        log.ticks.push_back(r);
    }
    return log;
}

} // namespace

TEST(Beacon, HealthyLinkNeverArms) {
    StationControl st;
    EXPECT_EQ(on_beacon(st, -70, kT1, kT2), BeaconAction::None);
    EXPECT_FALSE(st.armed);
    EXPECT_FALSE(trigger_for(BeaconAction::None, 1, 0, -70, kT1, kT2).has_value());
}

TEST(Beacon, BetweenThresholdsArmsThenKeepsPredicting) {
    StationControl st;
    EXPECT_EQ(on_beacon(st, -80, kT1, kT2), BeaconAction::Arm);
    EXPECT_EQ(on_beacon(st, -80, kT1, kT2), BeaconAction::RunPrediction);
    EXPECT_EQ(on_beacon(st, -74, kT1, kT2), BeaconAction::Disarm);
    EXPECT_EQ(on_beacon(st, -74, kT1, kT2), BeaconAction::None);
    const auto trig = trigger_for(BeaconAction::Arm, 4, 9, -80, kT1, kT2);
    ASSERT_TRUE(trig.has_value());
    EXPECT_EQ(trig->kind, TriggerKind::PerformanceDegradation);
    EXPECT_EQ(trig->threshold, kT1);
}

TEST(Beacon, BelowT2ForcesHandover) {
    StationControl st;
    EXPECT_EQ(on_beacon(st, -90, kT1, kT2), BeaconAction::ForceHandover);
}

TEST(Decide, MonotoneDeclineHandsOverUnderEveryPolicy) {
    std::array<double, kWindow> w;
    for (int t = 0; t < kWindow; ++t) w[t] = -73.5 - 1.2 * t;
    const auto c = two_candidates();
    const RadioParams radio;
    std::uint64_t calls = 0;
    for (const auto& p : {HandoverPolicy::proposed(dip_aware_forest()), HandoverPolicy::rss_forecast(),
                          HandoverPolicy::travel_distance()}) {
        const auto d = decide_handover(p, w, c, kT2, radio, calls);
        EXPECT_TRUE(d.handover) << p.name();
        EXPECT_EQ(d.target, 2) << p.name();
    }
    EXPECT_EQ(calls, 1u);
}

TEST(Decide, LateDipFoolsTheForecastButNotTheForest) {
    const std::array<double, kWindow> w{-76, -76, -76, -76, -76, -76, -76, -78.5, -81, -83.5};
    const auto c = two_candidates();
    std::uint64_t calls = 0;
    EXPECT_TRUE(decide_handover(HandoverPolicy::rss_forecast(), w, c, kT2, RadioParams{}, calls).handover);
    EXPECT_FALSE(
        decide_handover(HandoverPolicy::proposed(dip_aware_forest()), w, c, kT2, RadioParams{}, calls).handover);
}

TEST(Decide, FlatStrongSignalStays) {
    std::array<double, kWindow> w;
    w.fill(-60.0);
    const auto c = two_candidates();
    std::uint64_t calls = 0;
    for (const auto& p : {HandoverPolicy::proposed(dip_aware_forest()), HandoverPolicy::rss_forecast(),
                          HandoverPolicy::travel_distance()}) {
        const auto d = decide_handover(p, w, c, kT2, RadioParams{}, calls);
        EXPECT_FALSE(d.handover) << p.name();
        EXPECT_FALSE(d.target.has_value());
    }
}

TEST(Decide, ProposedWithoutModelIsRejected) {
    std::array<double, kWindow> w;
    w.fill(-80.0);
    std::uint64_t calls = 0;
    EXPECT_THROW(decide_handover(HandoverPolicy::proposed(nullptr), w, two_candidates(), kT2, RadioParams{}, calls),
                 ValidationError);
}

TEST(SelectAp, StrongestSignalFirst) {
    EXPECT_EQ(select_ap(ApSelectionPolicy::ssf(), two_candidates()), 2);
    auto tie = two_candidates();
    tie[0].rss_dbm = tie[1].rss_dbm;
    EXPECT_EQ(select_ap(ApSelectionPolicy::ssf(), tie), 1);
}

TEST(SelectAp, LeastLoadedFirst) {
    auto c = two_candidates();
    c[0].n_clients = 2;
    c[1].n_clients = 5;
    EXPECT_EQ(select_ap(ApSelectionPolicy::llf(), c), 1);
    c[0].n_clients = 5;
    EXPECT_EQ(select_ap(ApSelectionPolicy::llf(), c), 2);   // equal load: stronger wins
}

TEST(SelectAp, ProposedPicksHighestPrediction) {
    const std::vector<ApCandidate> c{scored(1, -60, 3, 10.2, std::nullopt), scored(2, -70, 3, 12.5, std::nullopt)};
    for (auto score : {ApScore::Aggregate, ApScore::Marginal, ApScore::Share})
        EXPECT_EQ(select_ap(ApSelectionPolicy::proposed(snr_echo(0.0), score), c), 2) << to_string(score);
}

TEST(SelectAp, ShareScoreWeighsClientCount) {
    // 30 Mbps over 6 stations is worse for the newcomer than 20 over 2.
    const std::vector<ApCandidate> c{scored(1, -60, 5, 30.0, std::nullopt), scored(2, -60, 1, 20.0, std::nullopt)};
    EXPECT_EQ(select_ap(ApSelectionPolicy::proposed(snr_echo(0.0), ApScore::Aggregate), c), 1);
    EXPECT_EQ(select_ap(ApSelectionPolicy::proposed(snr_echo(0.0), ApScore::Share), c), 2);
}

TEST(SelectAp, MarginalScoreUsesTheGain) {
    const std::vector<ApCandidate> c{scored(1, -60, 4, 30.0, 29.0), scored(2, -60, 4, 25.0, 20.0)};
    EXPECT_EQ(select_ap(ApSelectionPolicy::proposed(snr_echo(0.0), ApScore::Aggregate), c), 1);
    EXPECT_EQ(select_ap(ApSelectionPolicy::proposed(snr_echo(0.0), ApScore::Marginal), c), 2);
}

TEST(SelectAp, ConstantShiftDoesNotChangeTheChoice) {
    std::mt19937_64 eng(4);
    std::uniform_real_distribution<double> u(5, 40);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<ApCandidate> c;
        for (int a = 1; a <= 4; ++a) c.push_back(scored(a, -50 - a, a, u(eng), u(eng)));
        for (auto score : {ApScore::Aggregate, ApScore::Marginal}) {
            const int base = select_ap(ApSelectionPolicy::proposed(snr_echo(0.0), score), c);
            EXPECT_EQ(select_ap(ApSelectionPolicy::proposed(snr_echo(123.0), score), c), base);
            EXPECT_EQ(select_ap(ApSelectionPolicy::proposed(snr_echo(-7.5), score), c), base);
        }
    }
}

TEST(SelectAp, FallsBackToStrongestWithoutModelOrFeatures) {
    auto c = two_candidates();
    EXPECT_EQ(select_ap(ApSelectionPolicy::proposed(nullptr), c), 2);
    EXPECT_EQ(select_ap(ApSelectionPolicy::proposed(snr_echo(0.0)), c), 2);
    EXPECT_THROW(select_ap(ApSelectionPolicy::ssf(), {}), ValidationError);
}

TEST(Unnecessary, PingPongCountsTheOutboundLeg) {
    // A -> B at t=3, back to A at t=5 once B has collapsed.
    std::vector<double> a(12, -70.0), b(12, -72.0);
    b[5] = b[6] = b[7] = -90.0;
    const auto log = replay(a, b, [](std::size_t t, int) { return t == 3 || t == 5; });
    ASSERT_EQ(log.handovers.size(), 2u);
    EXPECT_TRUE(is_unnecessary(log, 0));
    EXPECT_FALSE(is_unnecessary(log, 1));
    EXPECT_EQ(count_unnecessary_handovers(log).back(), 1);
}

TEST(Unnecessary, ForcedWithoutReturnIsJustified) {
    std::vector<double> a(12, -70.0), b(12, -72.0);
    for (std::size_t t = 4; t < a.size(); ++t) a[t] = -90.0;
    auto log = replay(a, b, [](std::size_t t, int) { return t == 4; });
    log.handovers[0].cause = HandoverCause::ForcedT2;
    EXPECT_EQ(count_unnecessary_handovers(log).back(), 0);
}

TEST(Unnecessary, ReselectionsAreNotCounted) {
    std::vector<double> a(12, -60.0), b(12, -61.0);
    auto log = replay(a, b, [](std::size_t t, int) { return t == 2; });
    EXPECT_EQ(count_unnecessary_handovers(log).back(), 1);
    log.handovers[0].cause = HandoverCause::Reselection;
    EXPECT_EQ(count_unnecessary_handovers(log).back(), 0);
}

// Two APs whose signals cross repeatedly, like a walk along the overlap
// region. A naive "move when the other AP is stronger below t1" rule
// ping-pongs; the hysteresis label only moves on lasting changes.
TEST(Unnecessary, NaiveThresholdRuleLosesToHysteresisOracle) {
    std::vector<double> a, b;
    for (int t = 0; t < 120; ++t) {
        const double trend = -70.0 - 0.12 * t;
        const double wobble = (t % 7 == 3) ? 3.5 : 0.0;
        a.push_back(trend - wobble);
        b.push_back(-84.0 + 0.1 * t + ((t % 9 == 4) ? 3.0 : 0.0));
    }
    const auto& rss = [&](int ap, std::size_t t) { return ap == 1 ? a[t] : b[t]; };
    const auto naive = replay(a, b, [&](std::size_t t, int s) { return rss(s, t) < kT1 && rss(3 - s, t) > rss(s, t); });
    const auto oracle = replay(a, b, [&](std::size_t t, int s) {
        if (t + kHysteresisS >= a.size()) return false;
        std::vector<double> serving, other;
        for (int k = 1; k <= kHysteresisS; ++k) {
            serving.push_back(rss(s, t + k));
            other.push_back(rss(3 - s, t + k));
        }
        const std::vector<std::vector<double>> alts{other};
        return rss(s, t) < kT1 && label_handover(serving, alts, kT2) == 1;
    });
    const int n_naive = count_unnecessary_handovers(naive).back();
    const int n_oracle = count_unnecessary_handovers(oracle).back();
    EXPECT_GT(n_naive, n_oracle);
    EXPECT_GE(naive.handovers.size(), 3u);
}

TEST(Unnecessary, CountIsNonDecreasing) {
    std::mt19937_64 eng(7);
    std::normal_distribution<double> z(-76, 6);
    std::vector<double> a(200), b(200);
    for (auto& v : a) v = z(eng);
    for (auto& v : b) v = z(eng);
    std::bernoulli_distribution flip(0.15);
    const auto log = replay(a, b, [&](std::size_t, int) { return flip(eng); });
    const auto c = count_unnecessary_handovers(log);
    ASSERT_EQ(c.size(), a.size());
    for (std::size_t t = 1; t < c.size(); ++t) EXPECT_GE(c[t], c[t - 1]);
}

TEST(Policies, NamesRoundTrip) {
    for (auto k : {HandoverPolicyKind::Proposed, HandoverPolicyKind::RssForecast, HandoverPolicyKind::TravelDistance})
        EXPECT_EQ(parse_ho_policy(to_string(k)), k);
    for (auto k : {ApPolicyKind::Proposed, ApPolicyKind::Ssf, ApPolicyKind::Llf}) EXPECT_EQ(parse_ap_policy(to_string(k)), k);
    for (auto s : {ApScore::Aggregate, ApScore::Marginal, ApScore::Share}) EXPECT_EQ(parse_ap_score(to_string(s)), s);
    EXPECT_THROW(parse_ho_policy("magic"), ValidationError);
    EXPECT_THROW(parse_ap_policy("rssi"), ValidationError);
}
