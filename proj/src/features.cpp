#include "cogwifi/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "cogwifi/error.hpp"
#include "cogwifi/textio.hpp"

namespace cogwifi {

Stats5 stats5(std::span<const double> values) {
    if (values.empty()) throw ValidationError("stats5: empty input");
    Stats5 s;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    s.min = *lo;
    s.max = *hi;
    if (s.min == s.max) {
        s.mean = s.min;
        return s;
    }
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : values) {
        const double d = v - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    s.mean = std::clamp(mean, s.min, s.max);
    if (m2 > 0.0) {
        s.skew = m3 / std::pow(m2, 1.5);
        s.kurtosis = m4 / (m2 * m2) - 3.0;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Handover windows and labels

HandoverSample HandoverSample::from_window(std::span<const double, kWindow> window, int label) {
    HandoverSample s;
    std::copy(window.begin(), window.end(), s.rss.begin());
    const auto st = stats5(window);
    s.min = st.min;
    s.max = st.max;
    s.mean = st.mean;
    s.label = label;
    return s;
}

std::array<double, kHandoverFeatures> HandoverSample::features() const {
    std::array<double, kHandoverFeatures> f{};
    std::copy(rss.begin(), rss.end(), f.begin());
    f[kWindow] = min;
    f[kWindow + 1] = max;
    f[kWindow + 2] = mean;
    return f;
}

std::vector<HandoverSample> handover_windows(std::span<const double> series, std::span<const int> labels) {
    if (series.size() < kWindow + 1)
        throw ValidationError("handover_windows: series too short (need >= 11 samples, got "
                              + std::to_string(series.size()) + ")");
    if (labels.size() != series.size()) throw ValidationError("handover_windows: labels and series differ in length");
    std::vector<HandoverSample> out;
    out.reserve(series.size() - kWindow);
    for (std::size_t t = kWindow; t < series.size(); ++t)
        out.push_back(HandoverSample::from_window(series.subspan(t - kWindow).first<kWindow>(), labels[t]));
    return out;
}

int label_handover(std::span<const double> serving_future, std::span<const std::vector<double>> alternatives_future,
                   double t2_dbm, int hysteresis_s) {
    const auto need = static_cast<std::size_t>(std::max(hysteresis_s, 1));
    if (serving_future.size() < need) throw ValidationError("label_handover: insufficient lookahead");
    for (const auto& alt : alternatives_future)
        if (alt.size() < need) throw ValidationError("label_handover: insufficient lookahead");

    if (serving_future[0] < t2_dbm) return 1;
    if (alternatives_future.empty()) return 0;
    for (std::size_t k = 0; k < need; ++k) {
        bool beaten = false;
        for (const auto& alt : alternatives_future) beaten = beaten || alt[k] > serving_future[k];
        if (!beaten) return 0;
    }
    return 1;
}

// ---------------------------------------------------------------------------
// Window rows

std::array<double, 11> ApSelectionSample::features() const {
    return {static_cast<double>(n_clients), snr.mean,       snr.min,       snr.max,
            snr.skew,                       snr.kurtosis,   mac_delay.mean, mac_delay.min,
            mac_delay.max,                  mac_delay.skew, mac_delay.kurtosis};
}

double mac_delay_s(const PacketEvent& p, const RateTable& table) {
    const double rate = phy_rate_mbps(p.snr_db, table);
    if (rate <= 0.0) return 0.0;
    return p.mac_queue_len * (p.size_bytes * 8.0) / (rate * 1e6);
}

namespace {

double delivered_mbps(std::span<const PacketEvent> packets, double window_s) {
    double bytes = 0.0;
    for (const auto& p : packets) bytes += p.size_bytes;
    return bytes * 8.0 / window_s / 1e6;
}

} // namespace

ThroughputSample throughput_row(int n_clients, std::span<const PacketEvent> packets, double window_s) {
    if (packets.size() < 2) throw ValidationError("throughput_row: need >= 2 packets to form an IAT");
    std::vector<double> arrivals;
    arrivals.reserve(packets.size());
    for (const auto& p : packets) arrivals.push_back(p.arrival_time_s);
    std::sort(arrivals.begin(), arrivals.end());
    std::vector<double> iat(arrivals.size() - 1);
    for (std::size_t i = 1; i < arrivals.size(); ++i) iat[i - 1] = arrivals[i] - arrivals[i - 1];
    ThroughputSample row;
    row.n_clients = n_clients;
    row.iat = stats5(iat);
    row.throughput_mbps = delivered_mbps(packets, window_s);
    return row;
}

ApSelectionSample ap_selection_row(int n_clients, std::span<const PacketEvent> packets, double window_s,
                                   const RateTable& table) {
    if (packets.empty()) throw ValidationError("ap_selection_row: no packets in window");
    std::vector<double> snr, delay;
    snr.reserve(packets.size());
    delay.reserve(packets.size());
    for (const auto& p : packets) {
        snr.push_back(p.snr_db);
        delay.push_back(mac_delay_s(p, table));
    }
    ApSelectionSample row;
    row.n_clients = n_clients;
    row.snr = stats5(snr);
    row.mac_delay = stats5(delay);
    row.throughput_mbps = delivered_mbps(packets, window_s);
    return row;
}

// ---------------------------------------------------------------------------
// Dataset container

std::string to_string(Schema s) {
    switch (s) {
    case Schema::Handover: return "handover";
    case Schema::Throughput: return "throughput";
    case Schema::ApSelection: return "ap_selection";
    }
    return "?";
}

Schema schema_from_string(const std::string& s) {
    if (s == "handover") return Schema::Handover;
    if (s == "throughput") return Schema::Throughput;
    if (s == "ap_selection") return Schema::ApSelection;
    throw ValidationError("unknown dataset schema '" + s + "' (expected handover, throughput or ap_selection)");
}

namespace {

std::vector<std::string> stat_names(const std::string& base) {
    return {base + "_mean", base + "_min", base + "_max", base + "_skew", base + "_kurtosis"};
}

} // namespace

std::vector<std::string> csv_header(Schema schema) {
    std::vector<std::string> h;
    switch (schema) {
    case Schema::Handover:
        for (int i = 0; i < kWindow; ++i) h.push_back("rss_" + std::to_string(i));
        h.insert(h.end(), {"min", "max", "mean", "handover"});
        break;
    case Schema::Throughput: {
        h.push_back("n_clients");
        auto s = stat_names("iat");
        h.insert(h.end(), s.begin(), s.end());
        h.push_back("throughput_mbps");
        break;
    }
    case Schema::ApSelection: {
        h.push_back("n_clients");
        auto s = stat_names("snr");
        h.insert(h.end(), s.begin(), s.end());
        s = stat_names("mac_delay");
        h.insert(h.end(), s.begin(), s.end());
        h.push_back("throughput_mbps");
        break;
    }
    }
    return h;
}

Dataset make_dataset(Schema schema) {
    Dataset ds;
    ds.schema = schema;
    auto h = csv_header(schema);
    ds.target_name = h.back();
    h.pop_back();
    ds.feature_names = std::move(h);
    return ds;
}

void Dataset::add(std::vector<double> row, double target) {
    if (row.size() != feature_names.size())
        throw ValidationError("dataset row has " + std::to_string(row.size()) + " features, schema "
                              + to_string(schema) + " expects " + std::to_string(feature_names.size()));
    x.push_back(std::move(row));
    y.push_back(target);
}

Dataset to_dataset(std::span<const HandoverSample> samples) {
    auto ds = make_dataset(Schema::Handover);
    for (const auto& s : samples) {
        auto f = s.features();
        ds.add({f.begin(), f.end()}, s.label);
    }
    return ds;
}

Dataset to_dataset(std::span<const ThroughputSample> samples) {
    auto ds = make_dataset(Schema::Throughput);
    for (const auto& s : samples)
        ds.add({static_cast<double>(s.n_clients), s.iat.mean, s.iat.min, s.iat.max, s.iat.skew, s.iat.kurtosis},
               s.throughput_mbps);
    return ds;
}

Dataset to_dataset(std::span<const ApSelectionSample> samples) {
    auto ds = make_dataset(Schema::ApSelection);
    for (const auto& s : samples) {
        auto f = s.features();
        ds.add({f.begin(), f.end()}, s.throughput_mbps);
    }
    return ds;
}

void validate(const Dataset& ds) {
    const auto header = csv_header(ds.schema);
    if (ds.feature_names.size() + 1 != header.size()
        || !std::equal(ds.feature_names.begin(), ds.feature_names.end(), header.begin())
        || ds.target_name != header.back())
        throw ValidationError("dataset schema mismatch for " + to_string(ds.schema));
    if (ds.x.size() != ds.y.size()) throw ValidationError("dataset has mismatched feature/target counts");

    for (std::size_t r = 0; r < ds.size(); ++r) {
        const auto& row = ds.x[r];
        auto fail = [&](const std::string& col, const std::string& what) {
            throw ValidationError("row " + std::to_string(r + 1) + ", column " + col + ": " + what);
        };
        if (row.size() != ds.n_features()) fail("*", "wrong number of columns");
        for (std::size_t c = 0; c < row.size(); ++c)
            if (!std::isfinite(row[c])) fail(ds.feature_names[c], "non-finite value");
        if (!std::isfinite(ds.y[r])) fail(ds.target_name, "non-finite value");

        auto check_triple = [&](std::size_t base, const std::string& name) {
            if (!(row[base + 1] <= row[base] && row[base] <= row[base + 2])) fail(name, "requires min <= mean <= max");
        };
        switch (ds.schema) {
        case Schema::Handover: {
            const auto st = stats5(std::span<const double>(row.data(), kWindow));
            if (row[kWindow] != st.min) fail("min", "does not equal the minimum of rss_0..rss_9");
            if (row[kWindow + 1] != st.max) fail("max", "does not equal the maximum of rss_0..rss_9");
            if (row[kWindow + 2] != st.mean) fail("mean", "does not equal the mean of rss_0..rss_9");
            if (ds.y[r] != 0.0 && ds.y[r] != 1.0) fail("handover", "label must be 0 or 1");
            break;
        }
        case Schema::Throughput:
            if (row[0] < 1.0 || row[0] != std::floor(row[0])) fail("n_clients", "must be an integer >= 1");
            check_triple(1, "iat_mean");
            if (ds.y[r] < 0.0) fail("throughput_mbps", "must be >= 0");
            break;
        case Schema::ApSelection:
            if (row[0] < 1.0 || row[0] != std::floor(row[0])) fail("n_clients", "must be an integer >= 1");
            check_triple(1, "snr_mean");
            check_triple(6, "mac_delay_mean");
            if (ds.y[r] < 0.0) fail("throughput_mbps", "must be >= 0");
            break;
        }
    }
}

// ---------------------------------------------------------------------------
// Builders over a simulation log

bool register_window(const SimulationLog& log, std::size_t t, std::size_t sta, std::size_t ap,
                     const RateTable& table, std::array<double, kWindow>& out) {
    std::array<double, kWindow> buf{};
    std::size_t n = 0;
    const std::size_t first = t + 1 >= kWindow ? t + 1 - kWindow : 0;
    for (std::size_t tau = first; tau <= t; ++tau) {
        const double r = log.rss(tau, sta, ap);
        if (phy_rate_mbps(snr_db(r, log.noise_floor_dbm), table) > 0.0) buf[n++] = r;
    }
    if (n == 0) return false;
    const std::size_t pad = kWindow - n;
    for (std::size_t i = 0; i < pad; ++i) out[i] = buf[0];
    for (std::size_t i = 0; i < n; ++i) out[pad + i] = buf[i];
    return true;
}

Dataset build_handover_dataset(const SimulationLog& log, const RateTable& table) {
    std::vector<HandoverSample> rows;
    const std::size_t T = log.ticks.size();
    const std::size_t n_aps = log.ap_ids.size();
    for (std::size_t s = 0; s < log.sta_ids.size(); ++s) {
        for (std::size_t t = 1; t < T; ++t) {
            const int serving = log.ticks[t - 1].serving[s];
            if (serving < 0) continue;
            const std::size_t a = log.ap_index(serving);
            const double now = log.rss(t, s, a);
            if (now >= log.t1_dbm) continue;
            std::array<double, kWindow> window{};
            if (!register_window(log, t, s, a, table, window)) window.fill(now);

            int label = 1;
            if (now >= log.t2_dbm) {
                if (t + kHysteresisS >= T) continue;
                std::vector<double> serving_future;
                std::vector<std::vector<double>> alts;
                for (std::size_t b = 0; b < n_aps; ++b)
                    if (b != a) alts.emplace_back();
                for (std::size_t k = 1; k <= kHysteresisS; ++k) {
                    serving_future.push_back(log.rss(t + k, s, a));
                    std::size_t j = 0;
                    for (std::size_t b = 0; b < n_aps; ++b)
                        if (b != a) alts[j++].push_back(log.rss(t + k, s, b));
                }
                label = label_handover(serving_future, alts, log.t2_dbm);
            }
            rows.push_back(HandoverSample::from_window(window, label));
        }
    }
    return to_dataset(std::span<const HandoverSample>(rows));
}

namespace {

struct WindowBucket {
    std::size_t ap = 0;
    long window = 0;
    int n_clients = 0;
    std::vector<PacketEvent> packets;
};

std::vector<WindowBucket> bucket_packets(const SimulationLog& log, double window_s) {
    if (!(window_s > 0.0)) throw ValidationError("window_s must be > 0");
    if (log.packets.empty()) throw ValidationError("log contains no packet events");
    std::map<std::pair<std::size_t, long>, std::vector<PacketEvent>> groups;
    for (const auto& p : log.packets)
        groups[{log.ap_index(p.ap_id), static_cast<long>(std::floor(p.arrival_time_s / window_s))}].push_back(p);
    std::vector<WindowBucket> buckets;
    buckets.reserve(groups.size());
    const long last_tick = static_cast<long>(log.ticks.size()) - 1;
    for (auto& [key, pkts] : groups) {
        if (pkts.size() < 2) continue;
        WindowBucket b;
        b.ap = key.first;
        b.window = key.second;
        const long end_tick =
            std::min(last_tick, static_cast<long>(std::floor((key.second + 1) * window_s)) - 1);
        b.n_clients = end_tick >= 0 ? log.ticks[static_cast<std::size_t>(end_tick)].bss_clients[b.ap] : 0;
        if (b.n_clients < 1) continue;
        b.packets = std::move(pkts);
        buckets.push_back(std::move(b));
    }
    return buckets;
}

template <class Row, class MakeRow>
Dataset build_rows(const std::vector<WindowBucket>& buckets, MakeRow make_row, bool parallel) {
    std::vector<Row> rows(buckets.size());
    const auto n = static_cast<long>(buckets.size());
    if (parallel) {
#pragma omp parallel for schedule(dynamic, 16)
        for (long i = 0; i < n; ++i) rows[i] = make_row(buckets[i]);
    } else {
        for (long i = 0; i < n; ++i) rows[i] = make_row(buckets[i]);
    }
    return to_dataset(std::span<const Row>(rows));
}

Dataset throughput_impl(const SimulationLog& log, double window_s, bool parallel) {
    return build_rows<ThroughputSample>(
        bucket_packets(log, window_s),
        [window_s](const WindowBucket& b) { return throughput_row(b.n_clients, b.packets, window_s); }, parallel);
}

Dataset ap_selection_impl(const SimulationLog& log, double window_s, bool parallel) {
    return build_rows<ApSelectionSample>(
        bucket_packets(log, window_s),
        [window_s](const WindowBucket& b) { return ap_selection_row(b.n_clients, b.packets, window_s); }, parallel);
}

} // namespace

Dataset build_throughput_dataset(const SimulationLog& log, double window_s) {
    return throughput_impl(log, window_s, true);
}
Dataset build_ap_selection_dataset(const SimulationLog& log, double window_s) {
    return ap_selection_impl(log, window_s, true);
}
Dataset build_throughput_dataset_serial(const SimulationLog& log, double window_s) {
    return throughput_impl(log, window_s, false);
}
Dataset build_ap_selection_dataset_serial(const SimulationLog& log, double window_s) {
    return ap_selection_impl(log, window_s, false);
}

// ---------------------------------------------------------------------------
// CSV

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    const auto header = csv_header(ds.schema);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    for (std::size_t r = 0; r < ds.size(); ++r) {
        for (double v : ds.x[r]) out << text::format_double(v) << ",";
        out << text::format_double(ds.y[r]) << "\n";
    }
    if (!out) throw IoError("write failed for " + path.string());
}

Dataset read_csv(const std::filesystem::path& path, Schema schema) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto expected = csv_header(schema);
    std::string joined;
    for (std::size_t i = 0; i < expected.size(); ++i) joined += (i ? "," : "") + expected[i];
    if (line != joined)
        throw ValidationError(path.string() + ": schema mismatch, expected header '" + joined + "'");

    auto ds = make_dataset(schema);
    std::size_t row_no = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        ++row_no;
        auto cells = text::split(line, ',');
        if (cells.size() != expected.size())
            throw ValidationError(path.string() + ": row " + std::to_string(row_no) + " has "
                                  + std::to_string(cells.size()) + " columns, expected "
                                  + std::to_string(expected.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            auto v = text::parse_double(cells[c]);
            if (!v || !std::isfinite(*v))
                throw ValidationError(path.string() + ": row " + std::to_string(row_no) + ", column " + expected[c]
                                      + ": non-finite or malformed value '" + std::string(cells[c]) + "'");
            row.push_back(*v);
        }
        const double target = row.back();
        row.pop_back();
        ds.add(std::move(row), target);
    }
    validate(ds);
    return ds;
}

} // namespace cogwifi
