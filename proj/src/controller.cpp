#include "cogwifi/controller.hpp"

#include <algorithm>
#include <cmath>

#include "cogwifi/error.hpp"
#include "cogwifi/ml/ar1.hpp"

namespace cogwifi {

std::string to_string(BeaconAction a) {
    switch (a) {
    case BeaconAction::None: return "none";
    case BeaconAction::Arm: return "arm";
    case BeaconAction::Disarm: return "disarm";
    case BeaconAction::RunPrediction: return "run_prediction";
    case BeaconAction::ForceHandover: return "force_handover";
    }
    return "?";
}

BeaconAction on_beacon(StationControl& st, double rss, double t1, double t2) {
    if (rss < t2) {
        st.armed = true;
        return BeaconAction::ForceHandover;
    }
    if (rss < t1) {
        if (st.armed) return BeaconAction::RunPrediction;
        st.armed = true;
        return BeaconAction::Arm;
    }
    if (st.armed) {
        st.armed = false;
        return BeaconAction::Disarm;
    }
    return BeaconAction::None;
}

std::optional<Trigger> trigger_for(BeaconAction a, int sta_id, int t, double rss, double t1, double t2) {
    switch (a) {
    case BeaconAction::Arm: return Trigger{TriggerKind::PerformanceDegradation, sta_id, t, "rss_dbm", rss, t1};
    case BeaconAction::ForceHandover:
        return Trigger{TriggerKind::PerformanceDegradation, sta_id, t, "rss_dbm", rss, t2};
    case BeaconAction::Disarm: return Trigger{TriggerKind::Periodic, sta_id, t, "rss_dbm", rss, t1};
    default: return std::nullopt;
    }
}

HandoverPolicy HandoverPolicy::proposed(std::shared_ptr<const ml::ForestModel> m) {
    return {HandoverPolicyKind::Proposed, std::move(m)};
}
HandoverPolicy HandoverPolicy::rss_forecast() { return {HandoverPolicyKind::RssForecast, nullptr}; }
HandoverPolicy HandoverPolicy::travel_distance() { return {HandoverPolicyKind::TravelDistance, nullptr}; }
std::string HandoverPolicy::name() const { return to_string(kind); }

ApSelectionPolicy ApSelectionPolicy::proposed(std::shared_ptr<const ml::MlpModel> m, ApScore score) {
    return {ApPolicyKind::Proposed, std::move(m), score};
}
ApSelectionPolicy ApSelectionPolicy::ssf() { return {ApPolicyKind::Ssf, nullptr, ApScore::Share}; }
ApSelectionPolicy ApSelectionPolicy::llf() { return {ApPolicyKind::Llf, nullptr, ApScore::Share}; }
std::string ApSelectionPolicy::name() const { return to_string(kind); }

HandoverPolicyKind parse_ho_policy(const std::string& s) {
    if (s == "proposed") return HandoverPolicyKind::Proposed;
    if (s == "rss_forecast") return HandoverPolicyKind::RssForecast;
    if (s == "travel_distance") return HandoverPolicyKind::TravelDistance;
    throw ValidationError("unknown handover policy '" + s + "' (expected proposed, rss_forecast or travel_distance)");
}

ApPolicyKind parse_ap_policy(const std::string& s) {
    if (s == "proposed") return ApPolicyKind::Proposed;
    if (s == "ssf") return ApPolicyKind::Ssf;
    if (s == "llf") return ApPolicyKind::Llf;
    throw ValidationError("unknown AP policy '" + s + "' (expected proposed, ssf or llf)");
}

ApScore parse_ap_score(const std::string& s) {
    if (s == "aggregate") return ApScore::Aggregate;
    if (s == "marginal") return ApScore::Marginal;
    if (s == "share") return ApScore::Share;
    throw ValidationError("unknown AP score '" + s + "' (expected aggregate, marginal or share)");
}

std::string to_string(ApScore s) {
    switch (s) {
    case ApScore::Aggregate: return "aggregate";
    case ApScore::Marginal: return "marginal";
    case ApScore::Share: return "share";
    }
    return "?";
}

std::string to_string(HandoverPolicyKind k) {
    switch (k) {
    case HandoverPolicyKind::Proposed: return "proposed";
    case HandoverPolicyKind::RssForecast: return "rss_forecast";
    case HandoverPolicyKind::TravelDistance: return "travel_distance";
    }
    return "?";
}

std::string to_string(ApPolicyKind k) {
    switch (k) {
    case ApPolicyKind::Proposed: return "proposed";
    case ApPolicyKind::Ssf: return "ssf";
    case ApPolicyKind::Llf: return "llf";
    }
    return "?";
}

namespace {

// Strongest first, ties to the lowest AP id.
bool stronger(const ApCandidate& a, const ApCandidate& b) {
    if (a.rss_dbm != b.rss_dbm) return a.rss_dbm > b.rss_dbm;
    return a.ap_id < b.ap_id;
}

int strongest(std::span<const ApCandidate> c) {
    return std::min_element(c.begin(), c.end(), stronger)->ap_id;
}

} // namespace

HandoverDecision decide_handover(const HandoverPolicy& policy, std::span<const double> window,
                                 std::span<const ApCandidate> candidates, double t2, const RadioParams& radio,
                                 std::uint64_t& model_calls) {
    bool go = false;
    switch (policy.kind) {
    case HandoverPolicyKind::Proposed: {
        if (!policy.model) throw ValidationError("proposed handover policy needs a trained forest");
        if (window.size() != kWindow)
            throw ValidationError("proposed handover policy needs a complete 10-sample window");
        const auto sample = HandoverSample::from_window(window.first<kWindow>(), 0);
        const auto f = sample.features();
        ++model_calls;
        go = ml::rf_predict(*policy.model, f).label == 1;
        break;
    }
    case HandoverPolicyKind::RssForecast: {
        if (window.size() < 3) throw ValidationError("rss_forecast needs >= 3 RSS samples");
        // With flat regressors (e.g. a padded register) there is no AR(1) fit;
        // fall back to persistence.
        const auto lagged = window.first(window.size() - 1);
        const bool flat = std::all_of(lagged.begin(), lagged.end(), [&](double v) { return v == lagged[0]; });
        const double next = flat ? window.back() : ml::ar1_forecast(ml::ar1_fit(window), window.back(), 1).front();
        go = next < t2;
        break;
    }
    case HandoverPolicyKind::TravelDistance: {
        if (window.size() < 2) throw ValidationError("travel_distance needs >= 2 RSS samples");
        const double d1 = estimate_distance_m(window[window.size() - 2], radio);
        const double d2 = estimate_distance_m(window.back(), radio);
        const double projected = std::max(kMinDistanceM, d2 + (d2 - d1));
        go = rss_dbm(radio, projected, 0, 0, WallLosses{}, 0.0) < t2;
        break;
    }
    }
    HandoverDecision d;
    d.handover = go;
    if (go && !candidates.empty()) d.target = strongest(candidates);
    return d;
}

int select_ap(const ApSelectionPolicy& policy, std::span<const ApCandidate> candidates) {
    if (candidates.empty()) throw ValidationError("select_ap: no candidate APs");
    switch (policy.kind) {
    case ApPolicyKind::Ssf: return strongest(candidates);
    case ApPolicyKind::Llf:
        return std::min_element(candidates.begin(), candidates.end(),
                                [](const ApCandidate& a, const ApCandidate& b) {
                                    if (a.n_clients != b.n_clients) return a.n_clients < b.n_clients;
                                    return stronger(a, b);
                                })
            ->ap_id;
    case ApPolicyKind::Proposed: break;
    }
    if (!policy.model) return strongest(candidates);
    for (const auto& c : candidates)
        if (!c.with_request) return strongest(candidates);

    std::vector<double> score(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto f = candidates[i].with_request->features();
        score[i] = ml::mlp_predict(*policy.model, f);
        if (policy.score == ApScore::Share) score[i] /= std::max(1, candidates[i].with_request->n_clients);
        if (policy.score == ApScore::Marginal && candidates[i].current) {
            const auto g = candidates[i].current->features();
            score[i] -= ml::mlp_predict(*policy.model, g);
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        if (score[i] > score[best] || (score[i] == score[best] && stronger(candidates[i], candidates[best])))
            best = i;
    }
    return candidates[best].ap_id;
}

bool is_unnecessary(const SimulationLog& log, std::size_t index, int window_s) {
    const auto& e = log.handovers.at(index);
    for (std::size_t j = index + 1; j < log.handovers.size(); ++j) {
        const auto& f = log.handovers[j];
        if (f.t > e.t + window_s) break;
        if (f.sta_id == e.sta_id && f.to_ap == e.from_ap) return true;
    }
    const std::size_t s = log.sta_index(e.sta_id);
    const std::size_t a = log.ap_index(e.from_ap);
    const auto last = std::min<std::size_t>(log.ticks.size() - 1, static_cast<std::size_t>(e.t + window_s));
    for (auto k = static_cast<std::size_t>(e.t); k <= last; ++k)
        if (log.rss(k, s, a) < log.t2_dbm) return false;
    return true;
}

std::vector<int> count_unnecessary_handovers(const SimulationLog& log, int window_s) {
    std::vector<int> per_tick(log.ticks.size(), 0);
    for (std::size_t i = 0; i < log.handovers.size(); ++i) {
        const auto& e = log.handovers[i];
        if (e.cause == HandoverCause::Reselection) continue;
        const auto t = static_cast<std::size_t>(e.t);
        if (t < per_tick.size() && is_unnecessary(log, i, window_s)) ++per_tick[t];
    }
    int running = 0;
    for (auto& v : per_tick) {
        running += v;
        v = running;
    }
    return per_tick;
}

} // namespace cogwifi
