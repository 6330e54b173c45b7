#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cogwifi/radio.hpp"
#include "cogwifi/simlog.hpp"

namespace cogwifi {

/// Five-number summary. Central moments are population moments (divide by n);
/// kurtosis is excess kurtosis. A zero-variance sample has skew = kurtosis = 0.
struct Stats5 {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    double skew = 0.0;
    double kurtosis = 0.0;
};

Stats5 stats5(std::span<const double> values);

inline constexpr int kHandoverFeatures = kWindow + 3;
inline constexpr int kHysteresisS = 3;

struct HandoverSample {
    std::array<double, kWindow> rss{};   // per-second RSS, oldest first
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    int label = 0;

    static HandoverSample from_window(std::span<const double, kWindow> window, int label);
    std::array<double, kHandoverFeatures> features() const;
};

/// Slides a 10-sample window over `series` with unit shift. The sample for
/// forecast point t (10 <= t < len) uses series[t-10 .. t-1] and labels[t].
std::vector<HandoverSample> handover_windows(std::span<const double> series, std::span<const int> labels);

/// Ground-truth handover label at a forecast point. `serving_future[k]` and
/// `alternatives_future[j][k]` are the RSS values k+1 seconds ahead.
/// 1 when the serving link drops below t2 in the next second, or when the
/// serving AP stops being the strongest for `hysteresis_s` consecutive seconds.
int label_handover(std::span<const double> serving_future,
                   std::span<const std::vector<double>> alternatives_future, double t2_dbm,
                   int hysteresis_s = kHysteresisS);

struct ThroughputSample {
    int n_clients = 0;
    Stats5 iat;
    double throughput_mbps = 0.0;
};

struct ApSelectionSample {
    int n_clients = 0;
    Stats5 snr;
    Stats5 mac_delay;
    double throughput_mbps = 0.0;

    std::array<double, 11> features() const;
};

/// Per-packet MAC delay proxy: queue length x packet size / PHY rate (s).
double mac_delay_s(const PacketEvent& p, const RateTable& table = RateTable::default_table());

/// Feature row for one AP over one window from the packets it delivered.
/// Requires >= 2 packets for the IAT statistics.
ThroughputSample throughput_row(int n_clients, std::span<const PacketEvent> packets, double window_s);
ApSelectionSample ap_selection_row(int n_clients, std::span<const PacketEvent> packets, double window_s,
                                   const RateTable& table = RateTable::default_table());

enum class Schema { Handover, Throughput, ApSelection };

std::string to_string(Schema s);
Schema schema_from_string(const std::string& s);

struct Dataset {
    Schema schema = Schema::Handover;
    std::vector<std::string> feature_names;
    std::string target_name;
    std::vector<std::vector<double>> x;
    std::vector<double> y;

    std::size_t size() const { return y.size(); }
    std::size_t n_features() const { return feature_names.size(); }
    void add(std::vector<double> row, double target);

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

Dataset make_dataset(Schema schema);
std::vector<std::string> csv_header(Schema schema);

Dataset to_dataset(std::span<const HandoverSample> samples);
Dataset to_dataset(std::span<const ThroughputSample> samples);
Dataset to_dataset(std::span<const ApSelectionSample> samples);

/// Checks column count, finiteness and the per-schema ordering invariants.
/// Throws ValidationError naming the row and column.
void validate(const Dataset& ds);

/// Serving-AP register window for station `sta` at tick `t`: the in-range RSS
/// samples of `ap` within the last 10 s, front-padded with the oldest sample.
/// Returns false when no sample is available.
bool register_window(const SimulationLog& log, std::size_t t, std::size_t sta, std::size_t ap,
                     const RateTable& table, std::array<double, kWindow>& out);

/// Rows the controller would have collected: one per (station, tick) at which
/// the serving RSS was below t1, labelled 1 when below t2 and otherwise by
/// label_handover over the following seconds. Rows without enough lookahead
/// are dropped.
Dataset build_handover_dataset(const SimulationLog& log, const RateTable& table = RateTable::default_table());

/// One row per (AP, window) with >= 2 delivered packets, ordered by
/// (AP, window start). Windows are evaluated in parallel.
Dataset build_throughput_dataset(const SimulationLog& log, double window_s = 1.0);
Dataset build_ap_selection_dataset(const SimulationLog& log, double window_s = 1.0);

/// Single-threaded reference versions of the builders above.
Dataset build_throughput_dataset_serial(const SimulationLog& log, double window_s = 1.0);
Dataset build_ap_selection_dataset_serial(const SimulationLog& log, double window_s = 1.0);

void write_csv(const Dataset& ds, const std::filesystem::path& path);
Dataset read_csv(const std::filesystem::path& path, Schema schema);

} // namespace cogwifi
