#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "cogwifi/controller.hpp"
#include "cogwifi/rng.hpp"
#include "cogwifi/scenario.hpp"
#include "cogwifi/simlog.hpp"

namespace cogwifi {

inline constexpr double kMacEfficiency = 0.6;
inline constexpr int kQueueCapacity = 500;   // packets per station

/// Last kWindow per-second RSS samples of one (station, AP) pair.
class RssRegister {
public:
    struct Sample {
        int t = 0;
        double rss_dbm = 0.0;
    };

    /// Appends the sample for second t (t must exceed the newest sample's time)
    /// and evicts anything older than kWindow seconds.
    void push(int t, double rss_dbm);
    /// Evicts samples older than kWindow seconds relative to `now`.
    void expire(int now);

    std::size_t size() const { return count_; }
    bool empty() const { return count_ == 0; }
    Sample at(std::size_t i) const { return buf_[(head_ + i) % kWindow]; }   // oldest first
    Sample newest() const { return at(count_ - 1); }

    /// The samples front-padded with the oldest one to exactly kWindow values.
    /// False when empty.
    bool window(std::array<double, kWindow>& out) const;

private:
    std::array<Sample, kWindow> buf_{};
    std::size_t head_ = 0;
    std::size_t count_ = 0;
};

struct BssMember {
    int sta_id = 0;
    double phy_rate_mbps = 0.0;
    double demand_mbps = 0.0;
};

struct BssAllocation {
    std::vector<double> per_sta_mbps;   // same order as the members
    double total_mbps = 0.0;
};

/// Airtime-fair sharing of one BSS: every backlogged member gets the same
/// share of channel time and converts it at efficiency * phy_rate. A member
/// whose demand needs less than its share keeps only what it needs and the
/// remainder is split among the others. Rate-0 members get nothing.
BssAllocation bss_throughput_mbps(std::span<const BssMember> members, double efficiency = kMacEfficiency);

struct Association {
    int sta_id = 0;
    int ap_id = -1;   // -1 when unassociated
    int since_s = 0;
};

struct Policies {
    HandoverPolicy handover = HandoverPolicy::rss_forecast();
    ApSelectionPolicy ap_selection = ApSelectionPolicy::ssf();
};

/// Fixed-step (1 s) simulation. Each tick moves the stations, samples every
/// link, feeds the registers, lets the controller react, then serves traffic.
/// Mobility, shadowing and traffic draw from separate substreams of the
/// scenario seed, so two policies on the same scenario face the same radio
/// environment and offered load.
class Simulator {
public:
    Simulator(ScenarioConfig cfg, Policies policies, const RateTable& table = RateTable::default_table());

    /// Advances one second. Does nothing once the configured duration is reached.
    void tick();
    bool finished() const { return now_ >= cfg_.duration_s; }
    int now() const { return now_; }

    /// Moves the station to `to_ap` at the current tick and logs the event.
    /// Throws ValidationError for unknown ids, an unassociated station or a
    /// no-op handover.
    void execute_handover(int sta_id, int to_ap, HandoverCause cause);

    const Association& association(int sta_id) const;
    const RssRegister& rss_register(int sta_id, int ap_id) const;
    const ControllerState& controller() const { return ctl_; }
    const SimulationLog& log() const { return log_; }
    SimulationLog take_log() { return std::move(log_); }

private:
    struct Link {
        rng::Engine engine;
        std::normal_distribution<double> normal{0.0, 1.0};
        double draw = 0.0;
    };

    struct StationState {
        Trajectory trajectory;
        std::deque<double> queue;   // generation times of waiting packets
        double carry = 0.0;         // fractional packet credit
        bool in_handover = false;
    };

    // Per-AP packet statistics of the previous tick, input to AP selection.
    struct ApWindow {
        std::vector<double> snr_db;
        std::vector<double> mac_delay_s;
        std::vector<std::size_t> sta;   // station index per packet
    };

    std::size_t ap_idx(int ap_id) const;
    std::size_t sta_idx(int sta_id) const;
    double rate_of(std::size_t s, std::size_t a) const;
    void sample_links();
    void run_controller();
    void serve_traffic(TickRecord& rec);
    std::vector<ApCandidate> candidates(std::size_t s, double min_rss, int exclude_ap) const;
    // `joining` adds a station's own samples; `leaving` drops them.
    std::optional<ApSelectionSample> window_sample(std::size_t a, std::optional<std::size_t> joining,
                                                   std::optional<std::size_t> leaving = std::nullopt) const;
    void check_degradation(std::size_t s);
    int clients_of(std::size_t a) const;

    ScenarioConfig cfg_;
    Policies policies_;
    const RateTable& table_;
    int now_ = 0;
    std::vector<StationState> sta_;
    std::vector<Link> links_;                 // sta-major
    std::vector<double> rss_;                 // current tick, sta-major
    std::vector<Position> pos_;
    std::vector<RssRegister> registers_;      // sta-major
    std::vector<Association> assoc_;
    std::vector<ApWindow> ap_window_;
    ControllerState ctl_;
    SimulationLog log_;
};

/// Runs a whole scenario. Throws ValidationError when a Proposed policy has
/// no model.
SimulationLog run(const ScenarioConfig& cfg, const Policies& policies);

} // namespace cogwifi
