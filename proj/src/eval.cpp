#include "cogwifi/eval.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <limits>
#include <exception>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <omp.h>

#include "cogwifi/error.hpp"
#include "cogwifi/svg.hpp"
#include "cogwifi/textio.hpp"
#include "json.hpp"

namespace cogwifi {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t parse_u64(const std::string& s) {
    std::uint64_t v = 0;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || p != end || s.empty()) throw ParseError("invalid seed: '" + s + "'");
    return v;
}

std::string trim_copy(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

SimulationLog run_seed(const ScenarioConfig& base, std::uint64_t seed, const Policies& pol, bool packets) {
    ScenarioConfig cfg = base;
    cfg.seed = seed;
    cfg.record_packets = packets;
    return run(cfg, pol);
}

template <class Builder>
Dataset collect(const ScenarioConfig& base, std::span<const std::uint64_t> seeds, Schema schema,
                const std::vector<Policies>& runs, Builder build) {
    Dataset out = make_dataset(schema);
    for (std::uint64_t seed : seeds) {
        for (const auto& pol : runs) {
            const Dataset part = build(run_seed(base, seed, pol, true));
            out.x.insert(out.x.end(), part.x.begin(), part.x.end());
            out.y.insert(out.y.end(), part.y.begin(), part.y.end());
        }
    }
    return out;
}

std::vector<Policies> ssf_and_llf() {
    return {Policies{HandoverPolicy::rss_forecast(), ApSelectionPolicy::ssf()},
            Policies{HandoverPolicy::rss_forecast(), ApSelectionPolicy::llf()}};
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

const PolicyResult& find(const std::vector<PolicyResult>& v, const std::string& name) {
    for (const auto& p : v)
        if (p.name == name) return p;
    throw ValidationError("no result for policy '" + name + "'");
}

std::string hex(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw IoError("cannot write " + p.string());
    f << text;
    if (!f) throw IoError("write failed: " + p.string());
}

// Per-tick series of several policies as one CSV: t, <name>...
void write_series(const std::filesystem::path& p, const std::vector<std::string>& names,
                  const std::vector<std::vector<double>>& cols) {
    std::ostringstream os;
    os << "t";
    for (const auto& n : names) os << ',' << n;
    os << '\n';
    const std::size_t len = cols.empty() ? 0 : cols.front().size();
    for (std::size_t t = 0; t < len; ++t) {
        os << t;
        for (const auto& c : cols) os << ',' << text::format_double(c[t]);
        os << '\n';
    }
    write_text(p, os.str());
}

svg::Series series_of(const std::string& name, const std::vector<double>& y) {
    svg::Series s{name, {}, y};
    s.x.resize(y.size());
    std::iota(s.x.begin(), s.x.end(), 0.0);
    return s;
}

} // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim_copy(item);
        const auto dash = item.find('-');
        if (dash != std::string::npos && dash > 0) {
            const std::uint64_t a = parse_u64(trim_copy(item.substr(0, dash)));
            const std::uint64_t b = parse_u64(trim_copy(item.substr(dash + 1)));
            if (b < a) throw ParseError("descending seed range: '" + item + "'");
            if (b - a >= 100000) throw ValidationError("seed range too long: '" + item + "'");
            for (std::uint64_t v = a; v <= b; ++v) out.push_back(v);
        } else {
            out.push_back(parse_u64(item));
        }
    }
    if (out.empty()) throw ParseError("empty seed list");
    return out;
}

Dataset collect_handover_dataset(const ScenarioConfig& base, std::span<const std::uint64_t> seeds) {
    return collect(base, seeds, Schema::Handover,
                   {Policies{HandoverPolicy::rss_forecast(), ApSelectionPolicy::ssf()}},
                   [](const SimulationLog& log) { return build_handover_dataset(log); });
}

Dataset collect_throughput_dataset(const ScenarioConfig& base, std::span<const std::uint64_t> seeds) {
    return collect(base, seeds, Schema::Throughput, ssf_and_llf(),
                   [](const SimulationLog& log) { return build_throughput_dataset(log); });
}

Dataset collect_ap_selection_dataset(const ScenarioConfig& base, std::span<const std::uint64_t> seeds) {
    return collect(base, seeds, Schema::ApSelection, ssf_and_llf(),
                   [](const SimulationLog& log) { return build_ap_selection_dataset(log); });
}

RunMetrics measure(const SimulationLog& log, std::uint64_t seed, double runtime_s) {
    RunMetrics m;
    m.seed = seed;
    m.unnecessary_cumulative = count_unnecessary_handovers(log);
    m.handovers = log.handovers.size();
    m.runtime_s = runtime_s;
    m.log_hash = log.hash();
    m.environment_hash = log.environment_hash();

    const std::size_t n_sta = log.sta_ids.size();
    m.per_sta_mbps.assign(n_sta, 0.0);
    double agg = 0.0;
    for (const auto& rec : log.ticks) {
        const double sum = std::accumulate(rec.bss_throughput_mbps.begin(), rec.bss_throughput_mbps.end(), 0.0);
        agg += sum;
        m.avg_bss_mbps.push_back(rec.bss_throughput_mbps.empty()
                                     ? 0.0
                                     : sum / static_cast<double>(rec.bss_throughput_mbps.size()));
        for (std::size_t s = 0; s < n_sta; ++s) m.per_sta_mbps[s] += rec.sta_throughput_mbps[s];
    }
    const double ticks = static_cast<double>(std::max<std::size_t>(1, log.ticks.size()));
    for (double& v : m.per_sta_mbps) v /= ticks;
    m.aggregate_mbps = agg / ticks;
    return m;
}

double PolicyResult::mean_unnecessary() const {
    if (runs.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : runs) s += r.unnecessary_cumulative.empty() ? 0 : r.unnecessary_cumulative.back();
    return s / static_cast<double>(runs.size());
}

double PolicyResult::mean_aggregate_mbps() const {
    if (runs.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : runs) s += r.aggregate_mbps;
    return s / static_cast<double>(runs.size());
}

double PolicyResult::median_per_sta_mbps() const {
    std::vector<double> all;
    for (const auto& r : runs) all.insert(all.end(), r.per_sta_mbps.begin(), r.per_sta_mbps.end());
    return median(std::move(all));
}

double PolicyResult::max_runtime_s() const {
    double m = 0.0;
    for (const auto& r : runs) m = std::max(m, r.runtime_s);
    return m;
}

std::vector<double> PolicyResult::mean_unnecessary_series() const {
    std::vector<double> out;
    for (const auto& r : runs) {
        out.resize(std::max(out.size(), r.unnecessary_cumulative.size()), 0.0);
        for (std::size_t t = 0; t < r.unnecessary_cumulative.size(); ++t) out[t] += r.unnecessary_cumulative[t];
    }
    for (double& v : out) v /= static_cast<double>(std::max<std::size_t>(1, runs.size()));
    return out;
}

std::vector<double> PolicyResult::mean_bss_series() const {
    std::vector<double> out;
    for (const auto& r : runs) {
        out.resize(std::max(out.size(), r.avg_bss_mbps.size()), 0.0);
        for (std::size_t t = 0; t < r.avg_bss_mbps.size(); ++t) out[t] += r.avg_bss_mbps[t];
    }
    for (double& v : out) v /= static_cast<double>(std::max<std::size_t>(1, runs.size()));
    return out;
}

double gain_pct(double proposed, double baseline) {
    if (baseline == 0.0) return proposed == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return (proposed - baseline) / baseline * 100.0;
}

const PolicyResult& ExperimentReport::handover_result(const std::string& name) const { return find(handover, name); }
const PolicyResult& ExperimentReport::ap_result(const std::string& name) const { return find(ap, name); }

ExperimentReport compare(const ScenarioConfig& base, const CompareOptions& opt) {
    validate(base);
    if (opt.seeds.empty()) throw ValidationError("compare needs at least one seed");
    std::vector<std::uint64_t> train_seeds = opt.training_seeds;
    if (train_seeds.empty())
        for (std::uint64_t s : opt.seeds) train_seeds.push_back(s + 1000);

    ExperimentReport rep;
    rep.scenario_hash = scenario_hash(base);
    rep.seeds = opt.seeds;

    // Handover forest: fit on 70 %, confusion on the rest.
    const Dataset ho = collect_handover_dataset(base, train_seeds);
    rep.handover_rows = ho.size();
    if (ho.size() < 10) throw TrainingError("too few handover rows to train on");
    const ml::Split hs = ml::train_test_split(ho.size(), 0.7, opt.model_seed);
    const Dataset ho_train = ml::subset(ho, hs.train), ho_test = ml::subset(ho, hs.test);
    auto forest = std::make_shared<const ml::ForestModel>(ml::rf_train(ho_train, opt.forest, opt.model_seed));
    {
        std::vector<int> pred, truth;
        for (std::size_t i = 0; i < ho_test.size(); ++i) {
            pred.push_back(ml::rf_predict(*forest, ho_test.x[i]).label);
            truth.push_back(static_cast<int>(ho_test.y[i]));
        }
        rep.rf_confusion = ml::confusion(pred, truth);
    }

    const Dataset aps = collect_ap_selection_dataset(base, train_seeds);
    rep.ap_selection_rows = aps.size();
    ml::MlpFit fit = ml::mlp_train(aps, opt.mlp, opt.model_seed);
    rep.mlp_report = fit.report;
    auto mlp = std::make_shared<const ml::MlpModel>(std::move(fit.model));

    const HandoverPolicy ap_ho = opt.ap_runs_handover == HandoverPolicyKind::Proposed ? HandoverPolicy::proposed(forest)
                                 : opt.ap_runs_handover == HandoverPolicyKind::TravelDistance
                                     ? HandoverPolicy::travel_distance()
                                     : HandoverPolicy::rss_forecast();
    struct Combo {
        bool handover_block;
        std::string name;
        Policies pol;
    };
    const std::vector<Combo> combos = {
        {true, "proposed", {HandoverPolicy::proposed(forest), ApSelectionPolicy::ssf()}},
        {true, "rss_forecast", {HandoverPolicy::rss_forecast(), ApSelectionPolicy::ssf()}},
        {true, "travel_distance", {HandoverPolicy::travel_distance(), ApSelectionPolicy::ssf()}},
        {false, "proposed", {ap_ho, ApSelectionPolicy::proposed(mlp, opt.ap_score)}},
        {false, "ssf", {ap_ho, ApSelectionPolicy::ssf()}},
        {false, "llf", {ap_ho, ApSelectionPolicy::llf()}},
    };

    // Every (seed, combo) job writes its own slot, so the merge is order-free.
    const long n_jobs = static_cast<long>(opt.seeds.size() * combos.size());
    std::vector<RunMetrics> results(static_cast<std::size_t>(n_jobs));
    std::exception_ptr failure;
    const int threads = opt.threads > 0 ? opt.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (long j = 0; j < n_jobs; ++j) {
        const std::size_t seed_i = static_cast<std::size_t>(j) / combos.size();
        const std::size_t c = static_cast<std::size_t>(j) % combos.size();
        try {
            const auto t0 = Clock::now();
            const SimulationLog log = run_seed(base, opt.seeds[seed_i], combos[c].pol, false);
            results[static_cast<std::size_t>(j)] = measure(log, opt.seeds[seed_i], seconds_since(t0));
        } catch (...) {
#pragma omp critical(compare_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    for (std::size_t c = 0; c < combos.size(); ++c) {
        PolicyResult pr;
        pr.name = combos[c].name;
        for (std::size_t s = 0; s < opt.seeds.size(); ++s) pr.runs.push_back(results[s * combos.size() + c]);
        (combos[c].handover_block ? rep.handover : rep.ap).push_back(std::move(pr));
    }
    return rep;
}

void write_report(const ExperimentReport& r, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    std::ostringstream os;
    os << "section,policy,metric,value\n";
    auto row = [&](const std::string& sec, const std::string& pol, const std::string& metric, double v) {
        os << sec << ',' << pol << ',' << metric << ',' << text::format_double(v) << '\n';
    };
    row("model", "rf", "training_rows", static_cast<double>(r.handover_rows));
    row("model", "rf", "tpr", r.rf_confusion.true_positive_rate());
    row("model", "rf", "fnr", r.rf_confusion.false_negative_rate());
    row("model", "rf", "fpr", r.rf_confusion.false_positive_rate());
    row("model", "rf", "tnr", r.rf_confusion.true_negative_rate());
    row("model", "mlp", "training_rows", static_cast<double>(r.ap_selection_rows));
    row("model", "mlp", "mse", r.mlp_report.mse);
    row("model", "mlp", "r_squared", r.mlp_report.r_squared);
    for (const auto& p : r.handover) {
        row("handover", p.name, "mean_unnecessary", p.mean_unnecessary());
        row("handover", p.name, "max_runtime_s", p.max_runtime_s());
    }
    const double prop_u = r.handover_result("proposed").mean_unnecessary();
    for (const char* b : {"rss_forecast", "travel_distance"})
        row("handover", b, "reduction_pct", -gain_pct(prop_u, r.handover_result(b).mean_unnecessary()));
    for (const auto& p : r.ap) {
        row("ap_selection", p.name, "mean_aggregate_mbps", p.mean_aggregate_mbps());
        row("ap_selection", p.name, "median_per_sta_mbps", p.median_per_sta_mbps());
    }
    const double prop_a = r.ap_result("proposed").mean_aggregate_mbps();
    for (const char* b : {"ssf", "llf"})
        row("ap_selection", b, "gain_pct", gain_pct(prop_a, r.ap_result(b).mean_aggregate_mbps()));
    write_text(dir / "report.csv", os.str());

    std::vector<std::string> ho_names, ap_names;
    std::vector<std::vector<double>> ho_cols, ap_cols;
    std::vector<svg::Series> ho_series, ap_series, cdf;
    for (const auto& p : r.handover) {
        ho_names.push_back(p.name);
        ho_cols.push_back(p.mean_unnecessary_series());
        ho_series.push_back(series_of(p.name, ho_cols.back()));
    }
    for (const auto& p : r.ap) {
        ap_names.push_back(p.name);
        ap_cols.push_back(p.mean_bss_series());
        ap_series.push_back(series_of(p.name, ap_cols.back()));
        svg::Series s{p.name, {}, {}};
        for (const auto& run : p.runs) s.y.insert(s.y.end(), run.per_sta_mbps.begin(), run.per_sta_mbps.end());
        cdf.push_back(std::move(s));
    }
    write_series(dir / "unnecessary_handovers.csv", ho_names, ho_cols);
    write_series(dir / "bss_throughput.csv", ap_names, ap_cols);

    std::ostringstream ps;
    ps << "policy,seed,sta_index,mbps\n";
    for (const auto& p : r.ap)
        for (const auto& run : p.runs)
            for (std::size_t s = 0; s < run.per_sta_mbps.size(); ++s)
                ps << p.name << ',' << run.seed << ',' << s << ',' << text::format_double(run.per_sta_mbps[s]) << '\n';
    write_text(dir / "per_sta.csv", ps.str());

    write_text(dir / "unnecessary_handovers.svg",
               svg::line_chart("Cumulative unnecessary handovers (mean over seeds)", "time (s)", "handovers",
                               ho_series));
    write_text(dir / "bss_throughput.svg",
               svg::line_chart("Average BSS throughput (mean over seeds)", "time (s)", "Mbps", ap_series));
    write_text(dir / "per_sta_cdf.svg", svg::cdf_chart("Per-station throughput", "Mbps", cdf));
}

std::string summary_text(const ExperimentReport& r) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(3);
    os << "seeds: " << r.seeds.size() << "  handover rows: " << r.handover_rows
       << "  ap-selection rows: " << r.ap_selection_rows << '\n';
    os << "forest hold-out: tpr " << r.rf_confusion.true_positive_rate() << "  tnr "
       << r.rf_confusion.true_negative_rate() << '\n';
    os << "regressor hold-out: mse " << r.mlp_report.mse << "  r2 " << r.mlp_report.r_squared << '\n';
    os << "unnecessary handovers (mean per run):\n";
    for (const auto& p : r.handover)
        os << "  " << std::left << std::setw(16) << p.name << std::right << p.mean_unnecessary()
           << "  (max run " << p.max_runtime_s() << " s)\n";
    os << "throughput:\n";
    for (const auto& p : r.ap)
        os << "  " << std::left << std::setw(16) << p.name << std::right << "aggregate " << p.mean_aggregate_mbps()
           << " Mbps  per-station median " << p.median_per_sta_mbps() << " Mbps\n";
    return os.str();
}

std::uint64_t file_hash(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw IoError("cannot read " + p.string());
    // FNV-1a
    std::uint64_t h = 1469598103934665603ULL;
    char buf[1 << 14];
    while (f.read(buf, sizeof buf) || f.gcount() > 0) {
        for (std::streamsize i = 0; i < f.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
    }
    return h;
}

void write_manifest(const std::filesystem::path& dir, const std::string& command, const ScenarioConfig& cfg,
                    const std::map<std::string, std::string>& extra) {
    nlohmann::ordered_json j;
    j["tool"] = "cogwifi";
    j["manifest_version"] = 1;
    j["command"] = command;
    j["seed"] = cfg.seed;
    j["scenario_hash"] = hex(scenario_hash(cfg));
    j["scenario"] = save_scenario(cfg);
    for (const auto& [k, v] : extra) j["parameters"][k] = v;
    std::vector<std::filesystem::path> files;
    std::error_code ec;
    for (const auto& e : std::filesystem::directory_iterator(dir, ec))
        if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
    if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
    std::sort(files.begin(), files.end());
    j["files"] = nlohmann::ordered_json::object();
    for (const auto& f : files) {
        j["files"][f.filename().string()] = {{"bytes", std::filesystem::file_size(f)}, {"fnv1a64", hex(file_hash(f))}};
    }
    write_text(dir / "manifest.json", j.dump(2) + "\n");
}

} // namespace cogwifi
