#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cogwifi/features.hpp"
#include "cogwifi/ml/forest.hpp"
#include "cogwifi/ml/metrics.hpp"
#include "cogwifi/ml/mlp.hpp"
#include "cogwifi/simcore.hpp"

namespace cogwifi {

/// Seeds default to `base_seed + i`; a "a-b" or "a,b,c" list parses to seeds.
std::vector<std::uint64_t> parse_seed_list(const std::string& s);

/// Handover rows from runs of the baseline controller (rss_forecast + ssf),
/// one run per seed, concatenated in seed order.
Dataset collect_handover_dataset(const ScenarioConfig& base, std::span<const std::uint64_t> seeds);
/// Window rows from SSF and LLF runs on every seed.
Dataset collect_throughput_dataset(const ScenarioConfig& base, std::span<const std::uint64_t> seeds);
Dataset collect_ap_selection_dataset(const ScenarioConfig& base, std::span<const std::uint64_t> seeds);

struct RunMetrics {
    std::uint64_t seed = 0;
    std::vector<int> unnecessary_cumulative;   // per tick
    std::vector<double> avg_bss_mbps;          // per tick, mean over APs
    std::vector<double> per_sta_mbps;          // time-averaged, per station
    double aggregate_mbps = 0.0;               // time-averaged sum over BSSs
    std::size_t handovers = 0;
    double runtime_s = 0.0;
    std::uint64_t log_hash = 0;
    std::uint64_t environment_hash = 0;
};

RunMetrics measure(const SimulationLog& log, std::uint64_t seed, double runtime_s);

struct PolicyResult {
    std::string name;
    std::vector<RunMetrics> runs;   // seed order

    double mean_unnecessary() const;   // final cumulative count, averaged over seeds
    double mean_aggregate_mbps() const;
    double median_per_sta_mbps() const;   // over all stations of all seeds
    double max_runtime_s() const;
    std::vector<double> mean_unnecessary_series() const;
    std::vector<double> mean_bss_series() const;
};

/// (proposed - baseline) / baseline in percent.
double gain_pct(double proposed, double baseline);

struct CompareOptions {
    std::vector<std::uint64_t> seeds;
    std::vector<std::uint64_t> training_seeds;   // empty: seeds + 1000
    ml::ForestParams forest;
    ml::MlpParams mlp;
    ApScore ap_score = ApScore::Share;
    // Handover policy shared by the three AP-selection runs.
    HandoverPolicyKind ap_runs_handover = HandoverPolicyKind::Proposed;
    std::uint64_t model_seed = 7;
    int threads = 0;   // <= 0: OpenMP default; 1 runs the seeds serially
};

struct ExperimentReport {
    std::uint64_t scenario_hash = 0;
    std::vector<std::uint64_t> seeds;
    std::size_t handover_rows = 0;
    std::size_t ap_selection_rows = 0;
    ml::ConfusionMatrix rf_confusion;   // 30 % hold-out of the handover rows
    ml::RegressionReport mlp_report;    // 30 % hold-out of the AP selection rows
    std::vector<PolicyResult> handover;   // proposed, rss_forecast, travel_distance (ap = ssf)
    std::vector<PolicyResult> ap;         // proposed, ssf, llf

    const PolicyResult& handover_result(const std::string& name) const;
    const PolicyResult& ap_result(const std::string& name) const;
};

/// Trains the forest and the regressor on baseline runs of the training
/// seeds, then runs every policy on every evaluation seed.
ExperimentReport compare(const ScenarioConfig& base, const CompareOptions& opt);

/// report.csv, the per-tick series CSVs, per_sta.csv and three SVG charts.
void write_report(const ExperimentReport& r, const std::filesystem::path& dir);
std::string summary_text(const ExperimentReport& r);

/// manifest.json describing how the files in `dir` were produced.
void write_manifest(const std::filesystem::path& dir, const std::string& command, const ScenarioConfig& cfg,
                    const std::map<std::string, std::string>& extra);

std::uint64_t file_hash(const std::filesystem::path& p);

} // namespace cogwifi
