#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cogwifi/scenario.hpp"

namespace cogwifi {

inline constexpr int kWindow = 10;          // feature derivation window (s)
inline constexpr int kPacketBytes = 1200;

enum class HandoverCause { Predicted, ForcedT2, Baseline, Reselection };

std::string to_string(HandoverCause c);

struct HandoverEvent {
    int t = 0;
    int sta_id = 0;
    int from_ap = 0;
    int to_ap = 0;
    HandoverCause cause = HandoverCause::Baseline;

    friend bool operator==(const HandoverEvent&, const HandoverEvent&) = default;
};

/// One delivered packet. `timestamp_s` is its generation time at the station,
/// `arrival_time_s` its delivery time at the AP.
struct PacketEvent {
    double timestamp_s = 0.0;
    double arrival_time_s = 0.0;
    int size_bytes = kPacketBytes;
    double snr_db = 0.0;
    int ap_id = 0;
    int sta_id = 0;
    int mac_queue_len = 0;

    friend bool operator==(const PacketEvent&, const PacketEvent&) = default;
};

/// Snapshot taken at the end of tick t (covering [t, t+1)).
/// Per-station vectors follow SimulationLog::sta_ids order, per-AP vectors
/// follow SimulationLog::ap_ids; rss_dbm is station-major (sta * n_aps + ap).
struct TickRecord {
    int t = 0;
    std::vector<Position> positions;
    std::vector<double> rss_dbm;
    std::vector<int> serving;             // AP id, or -1 when unassociated
    std::vector<double> sta_throughput_mbps;
    std::vector<double> bss_throughput_mbps;
    std::vector<int> bss_clients;

    friend bool operator==(const TickRecord&, const TickRecord&) = default;
};

enum class DecisionKind { Prediction, Forced };

/// A row the controller appended to its handover dataset: the serving AP's
/// 10-sample window at decision time and what was decided. Ground-truth labels
/// are attached offline once the future is known.
struct DecisionRecord {
    int t = 0;
    int sta_id = 0;
    int ap_id = 0;
    std::array<double, kWindow> window{};
    DecisionKind kind = DecisionKind::Prediction;
    bool handover = false;

    friend bool operator==(const DecisionRecord&, const DecisionRecord&) = default;
};

struct SimulationLog {
    std::vector<int> ap_ids;
    std::vector<int> sta_ids;
    double t1_dbm = 0.0;
    double t2_dbm = 0.0;
    double noise_floor_dbm = 0.0;
    std::vector<TickRecord> ticks;
    std::vector<HandoverEvent> handovers;
    std::vector<PacketEvent> packets;
    std::vector<DecisionRecord> decisions;
    std::uint64_t predictor_calls = 0;   // ML handover model invocations

    std::size_t ap_index(int ap_id) const;
    std::size_t sta_index(int sta_id) const;
    double rss(std::size_t tick, std::size_t sta, std::size_t ap) const {
        return ticks[tick].rss_dbm[sta * ap_ids.size() + ap];
    }

    /// Digest over every recorded field; equal logs hash equal.
    std::uint64_t hash() const;
    /// Digest over positions and RSS only: the environment a policy faced.
    std::uint64_t environment_hash() const;
};

/// Writes ticks.csv, handovers.csv, packets.csv and meta.csv (thresholds,
/// predictor call count) into `dir`.
void write_log_csv(const SimulationLog& log, const std::filesystem::path& dir);
/// Reads the files back (decisions are not part of the CSV export).
SimulationLog read_log_csv(const std::filesystem::path& dir);

} // namespace cogwifi
