#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cogwifi/features.hpp"
#include "cogwifi/ml/forest.hpp"
#include "cogwifi/ml/mlp.hpp"
#include "cogwifi/radio.hpp"
#include "cogwifi/simlog.hpp"

namespace cogwifi {

enum class TriggerKind { TopologyChange, PerformanceDegradation, Periodic };

/// Event the controller reacts to. PerformanceDegradation names the metric
/// that crossed its threshold.
struct Trigger {
    TriggerKind kind = TriggerKind::Periodic;
    int subject = 0;   // station id (or AP id for AP-side triggers)
    int t = 0;
    std::string metric;
    double value = 0.0;
    double threshold = 0.0;
};

enum class BeaconAction { None, Arm, Disarm, RunPrediction, ForceHandover };

std::string to_string(BeaconAction a);

struct StationControl {
    bool armed = false;
    int last_decision_t = -1;
    int degraded_ticks = 0;
    int reselect_after_t = 0;
};

/// Two-threshold trigger on the serving RSS reported at a beacon.
/// Arm means "newly armed, run the prediction"; RunPrediction means "still armed".
BeaconAction on_beacon(StationControl& st, double serving_rss_dbm, double t1_dbm, double t2_dbm);

/// Trigger raised for a beacon action, if any.
std::optional<Trigger> trigger_for(BeaconAction a, int sta_id, int t, double serving_rss_dbm, double t1_dbm,
                                   double t2_dbm);

struct ControllerState {
    std::vector<StationControl> stations;
    std::vector<Trigger> triggers;
};

enum class HandoverPolicyKind { Proposed, RssForecast, TravelDistance };
enum class ApPolicyKind { Proposed, Ssf, Llf };

/// How the Proposed AP selector scores a candidate from the regressor output.
/// Aggregate: predicted BSS throughput with the station associated.
/// Marginal: that prediction minus the prediction for the BSS as it is now.
/// Share: the prediction divided by the client count, i.e. the newcomer's
/// expected slice of the BSS.
enum class ApScore { Aggregate, Marginal, Share };

struct HandoverPolicy {
    HandoverPolicyKind kind = HandoverPolicyKind::RssForecast;
    std::shared_ptr<const ml::ForestModel> model;   // Proposed only

    static HandoverPolicy proposed(std::shared_ptr<const ml::ForestModel> m);
    static HandoverPolicy rss_forecast();
    static HandoverPolicy travel_distance();
    std::string name() const;
};

struct ApSelectionPolicy {
    ApPolicyKind kind = ApPolicyKind::Ssf;
    std::shared_ptr<const ml::MlpModel> model;   // Proposed only; absent falls back to SSF
    ApScore score = ApScore::Share;

    static ApSelectionPolicy proposed(std::shared_ptr<const ml::MlpModel> m, ApScore score = ApScore::Share);
    static ApSelectionPolicy ssf();
    static ApSelectionPolicy llf();
    std::string name() const;
};

HandoverPolicyKind parse_ho_policy(const std::string& s);
ApPolicyKind parse_ap_policy(const std::string& s);
std::string to_string(HandoverPolicyKind k);
std::string to_string(ApPolicyKind k);
ApScore parse_ap_score(const std::string& s);
std::string to_string(ApScore s);

struct ApCandidate {
    int ap_id = 0;
    double rss_dbm = 0.0;
    int n_clients = 0;
    /// Window features of the BSS with the requesting station counted
    /// (n_clients + 1) and, for the marginal score, as it is now.
    std::optional<ApSelectionSample> with_request;
    std::optional<ApSelectionSample> current;
};

struct HandoverDecision {
    bool handover = false;
    std::optional<int> target;   // strongest candidate when handing over
};

/// `window` is the serving AP's register window, oldest first.
/// `model_calls` is incremented each time the forest is consulted.
HandoverDecision decide_handover(const HandoverPolicy& policy, std::span<const double> window,
                                 std::span<const ApCandidate> candidates, double t2_dbm, const RadioParams& radio,
                                 std::uint64_t& model_calls);

/// Throws ValidationError on an empty candidate list.
int select_ap(const ApSelectionPolicy& policy, std::span<const ApCandidate> candidates);

inline constexpr int kUnnecessaryWindowS = 5;

/// True when handover `index` of the log is unnecessary: the station returns
/// to the departed AP within window_s seconds, or the departed AP's RSS stays
/// at or above t2 for the whole [t, t + window_s] interval.
bool is_unnecessary(const SimulationLog& log, std::size_t index, int window_s = kUnnecessaryWindowS);

/// Cumulative count of unnecessary handovers at the end of every tick.
/// Load-driven reselections are not handover decisions and are skipped.
std::vector<int> count_unnecessary_handovers(const SimulationLog& log, int window_s = kUnnecessaryWindowS);

} // namespace cogwifi
