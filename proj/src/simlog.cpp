#include "cogwifi/simlog.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <sstream>

#include "cogwifi/error.hpp"
#include "cogwifi/rng.hpp"
#include "cogwifi/textio.hpp"

namespace cogwifi {

std::string to_string(HandoverCause c) {
    switch (c) {
    case HandoverCause::Predicted: return "predicted";
    case HandoverCause::ForcedT2: return "forced_t2";
    case HandoverCause::Baseline: return "baseline";
    case HandoverCause::Reselection: return "reselection";
    }
    return "unknown";
}

namespace {

HandoverCause cause_from_string(const std::string& s) {
    if (s == "predicted") return HandoverCause::Predicted;
    if (s == "forced_t2") return HandoverCause::ForcedT2;
    if (s == "baseline") return HandoverCause::Baseline;
    if (s == "reselection") return HandoverCause::Reselection;
    throw ParseError("unknown handover cause '" + s + "'");
}

class Hasher {
public:
    void add(std::uint64_t v) { h_ = rng::splitmix64(h_ ^ v); }
    void add(int v) { add(static_cast<std::uint64_t>(static_cast<std::int64_t>(v))); }
    void add(double v) { add(std::bit_cast<std::uint64_t>(v)); }
    void add(const Position& p) {
        add(p.x);
        add(p.y);
        add(p.z);
    }
    template <class T>
    void add(const std::vector<T>& v) {
        add(static_cast<std::uint64_t>(v.size()));
        for (const auto& e : v) add(e);
    }
    std::uint64_t value() const { return h_; }

private:
    std::uint64_t h_ = 0x243F6A8885A308D3ULL;
};

std::size_t find_index(const std::vector<int>& ids, int id, const char* what) {
    auto it = std::find(ids.begin(), ids.end(), id);
    if (it == ids.end()) throw ValidationError(std::string("unknown ") + what + " id " + std::to_string(id));
    return static_cast<std::size_t>(it - ids.begin());
}

std::string fmt(double v) { return text::format_double(v); }

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write " + p.string());
    return out;
}

// Minimal reader for the files written below: no quoting, comma-separated.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string name;
};

CsvTable read_table(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    CsvTable t;
    t.name = p.filename().string();
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        for (auto c : text::split(line, ',')) cells.emplace_back(c);
        if (first) {
            t.header = std::move(cells);
            first = false;
            continue;
        }
        if (cells.size() != t.header.size())
            throw ParseError(t.name + ": row " + std::to_string(t.rows.size() + 1) + " has " + std::to_string(cells.size())
                             + " fields, expected " + std::to_string(t.header.size()));
        t.rows.push_back(std::move(cells));
    }
    if (first) throw ParseError(t.name + ": empty file");
    return t;
}

void expect_header(const CsvTable& t, const std::vector<std::string>& expected) {
    if (t.header != expected) throw ParseError(t.name + ": unexpected header");
}

double num(const CsvTable& t, std::size_t row, std::size_t col) {
    auto v = text::parse_double(t.rows[row][col]);
    if (!v) throw ParseError(t.name + ": row " + std::to_string(row + 1) + ", column '" + t.header[col]
                             + "' is not a number");
    return *v;
}

int integer(const CsvTable& t, std::size_t row, std::size_t col) {
    auto v = text::parse_int(t.rows[row][col]);
    if (!v) throw ParseError(t.name + ": row " + std::to_string(row + 1) + ", column '" + t.header[col]
                             + "' is not an integer");
    return static_cast<int>(*v);
}

const std::vector<std::string> kHandoverHeader{"t", "sta_id", "from_ap", "to_ap", "cause"};
const std::vector<std::string> kPacketHeader{"timestamp_s", "arrival_time_s", "size_bytes", "snr_db",
                                             "ap_id",       "sta_id",         "mac_queue_len"};
const std::vector<std::string> kTickPrefix{"t", "kind", "id", "x", "y", "z", "serving_ap", "throughput_mbps", "clients"};

} // namespace

std::size_t SimulationLog::ap_index(int ap_id) const { return find_index(ap_ids, ap_id, "AP"); }
std::size_t SimulationLog::sta_index(int sta_id) const { return find_index(sta_ids, sta_id, "station"); }

std::uint64_t SimulationLog::hash() const {
    Hasher h;
    h.add(ap_ids);
    h.add(sta_ids);
    h.add(t1_dbm);
    h.add(t2_dbm);
    h.add(noise_floor_dbm);
    for (const auto& tk : ticks) {
        h.add(tk.t);
        h.add(tk.positions);
        h.add(tk.rss_dbm);
        h.add(tk.serving);
        h.add(tk.sta_throughput_mbps);
        h.add(tk.bss_throughput_mbps);
        h.add(tk.bss_clients);
    }
    for (const auto& e : handovers) {
        h.add(e.t);
        h.add(e.sta_id);
        h.add(e.from_ap);
        h.add(e.to_ap);
        h.add(static_cast<int>(e.cause));
    }
    for (const auto& p : packets) {
        h.add(p.timestamp_s);
        h.add(p.arrival_time_s);
        h.add(p.size_bytes);
        h.add(p.snr_db);
        h.add(p.ap_id);
        h.add(p.sta_id);
        h.add(p.mac_queue_len);
    }
    for (const auto& d : decisions) {
        h.add(d.t);
        h.add(d.sta_id);
        h.add(d.ap_id);
        for (double v : d.window) h.add(v);
        h.add(static_cast<int>(d.kind));
        h.add(static_cast<int>(d.handover));
    }
    h.add(predictor_calls);
    return h.value();
}

std::uint64_t SimulationLog::environment_hash() const {
    Hasher h;
    for (const auto& tk : ticks) {
        h.add(tk.t);
        h.add(tk.positions);
        h.add(tk.rss_dbm);
    }
    return h.value();
}

void write_log_csv(const SimulationLog& log, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
    const std::size_t n_aps = log.ap_ids.size();
    {
        auto out = open_out(dir / "ticks.csv");
        for (std::size_t i = 0; i < kTickPrefix.size(); ++i) out << (i ? "," : "") << kTickPrefix[i];
        for (int id : log.ap_ids) out << ",rss_" << id;
        out << '\n';
        for (const auto& tk : log.ticks) {
            for (std::size_t a = 0; a < n_aps; ++a) {
                out << tk.t << ",ap," << log.ap_ids[a] << ",,,,," << fmt(tk.bss_throughput_mbps[a]) << ','
                    << tk.bss_clients[a];
                for (std::size_t k = 0; k < n_aps; ++k) out << ',';
                out << '\n';
            }
            for (std::size_t s = 0; s < log.sta_ids.size(); ++s) {
                const auto& p = tk.positions[s];
                out << tk.t << ",sta," << log.sta_ids[s] << ',' << fmt(p.x) << ',' << fmt(p.y) << ',' << fmt(p.z) << ','
                    << tk.serving[s] << ',' << fmt(tk.sta_throughput_mbps[s]) << ',';
                for (std::size_t a = 0; a < n_aps; ++a) out << ',' << fmt(tk.rss_dbm[s * n_aps + a]);
                out << '\n';
            }
        }
        if (!out) throw IoError("failed writing ticks.csv");
    }
    {
        auto out = open_out(dir / "handovers.csv");
        out << "t,sta_id,from_ap,to_ap,cause\n";
        for (const auto& e : log.handovers)
            out << e.t << ',' << e.sta_id << ',' << e.from_ap << ',' << e.to_ap << ',' << to_string(e.cause) << '\n';
        if (!out) throw IoError("failed writing handovers.csv");
    }
    {
        auto out = open_out(dir / "packets.csv");
        out << "timestamp_s,arrival_time_s,size_bytes,snr_db,ap_id,sta_id,mac_queue_len\n";
        for (const auto& p : log.packets)
            out << fmt(p.timestamp_s) << ',' << fmt(p.arrival_time_s) << ',' << p.size_bytes << ',' << fmt(p.snr_db)
                << ',' << p.ap_id << ',' << p.sta_id << ',' << p.mac_queue_len << '\n';
        if (!out) throw IoError("failed writing packets.csv");
    }
    {
        auto out = open_out(dir / "meta.csv");
        out << "key,value\n"
            << "t1_dbm," << fmt(log.t1_dbm) << '\n'
            << "t2_dbm," << fmt(log.t2_dbm) << '\n'
            << "noise_floor_dbm," << fmt(log.noise_floor_dbm) << '\n'
            << "predictor_calls," << log.predictor_calls << '\n';
        if (!out) throw IoError("failed writing meta.csv");
    }
}

SimulationLog read_log_csv(const std::filesystem::path& dir) {
    SimulationLog log;

    const auto meta = read_table(dir / "meta.csv");
    expect_header(meta, {"key", "value"});
    for (std::size_t r = 0; r < meta.rows.size(); ++r) {
        const auto& key = meta.rows[r][0];
        if (key == "t1_dbm")
            log.t1_dbm = num(meta, r, 1);
        else if (key == "t2_dbm")
            log.t2_dbm = num(meta, r, 1);
        else if (key == "noise_floor_dbm")
            log.noise_floor_dbm = num(meta, r, 1);
        else if (key == "predictor_calls")
            log.predictor_calls = static_cast<std::uint64_t>(integer(meta, r, 1));
        else
            throw ParseError("meta.csv: unknown key '" + key + "'");
    }

    const auto ticks = read_table(dir / "ticks.csv");
    if (ticks.header.size() < kTickPrefix.size()
        || !std::equal(kTickPrefix.begin(), kTickPrefix.end(), ticks.header.begin()))
        throw ParseError("ticks.csv: unexpected header");
    for (std::size_t c = kTickPrefix.size(); c < ticks.header.size(); ++c) {
        const auto& h = ticks.header[c];
        auto id = h.rfind("rss_", 0) == 0 ? text::parse_int(std::string_view(h).substr(4)) : std::nullopt;
        if (!id) throw ParseError("ticks.csv: bad column '" + h + "'");
        log.ap_ids.push_back(static_cast<int>(*id));
    }
    const std::size_t n_aps = log.ap_ids.size();
    const std::size_t base = kTickPrefix.size();
    bool first_tick_done = false;
    for (std::size_t r = 0; r < ticks.rows.size(); ++r) {
        const int t = integer(ticks, r, 0);
        const auto& kind = ticks.rows[r][1];
        if (log.ticks.empty() || log.ticks.back().t != t) {
            if (!log.ticks.empty()) first_tick_done = true;
            if (!log.ticks.empty() && t < log.ticks.back().t) throw ParseError("ticks.csv: ticks out of order");
            TickRecord tk;
            tk.t = t;
            log.ticks.push_back(std::move(tk));
        }
        auto& tk = log.ticks.back();
        if (kind == "ap") {
            tk.bss_throughput_mbps.push_back(num(ticks, r, 7));
            tk.bss_clients.push_back(integer(ticks, r, 8));
        } else if (kind == "sta") {
            const int id = integer(ticks, r, 2);
            if (!first_tick_done) log.sta_ids.push_back(id);
            tk.positions.push_back({num(ticks, r, 3), num(ticks, r, 4), num(ticks, r, 5)});
            tk.serving.push_back(integer(ticks, r, 6));
            tk.sta_throughput_mbps.push_back(num(ticks, r, 7));
            for (std::size_t a = 0; a < n_aps; ++a) tk.rss_dbm.push_back(num(ticks, r, base + a));
        } else {
            throw ParseError("ticks.csv: row " + std::to_string(r + 1) + " has unknown kind '" + kind + "'");
        }
    }
    for (const auto& tk : log.ticks)
        if (tk.positions.size() != log.sta_ids.size() || tk.bss_clients.size() != n_aps)
            throw ParseError("ticks.csv: tick " + std::to_string(tk.t) + " is incomplete");

    const auto ho = read_table(dir / "handovers.csv");
    expect_header(ho, kHandoverHeader);
    for (std::size_t r = 0; r < ho.rows.size(); ++r)
        log.handovers.push_back(
            {integer(ho, r, 0), integer(ho, r, 1), integer(ho, r, 2), integer(ho, r, 3), cause_from_string(ho.rows[r][4])});

    const auto pk = read_table(dir / "packets.csv");
    expect_header(pk, kPacketHeader);
    for (std::size_t r = 0; r < pk.rows.size(); ++r) {
        PacketEvent p;
        p.timestamp_s = num(pk, r, 0);
        p.arrival_time_s = num(pk, r, 1);
        p.size_bytes = integer(pk, r, 2);
        p.snr_db = num(pk, r, 3);
        p.ap_id = integer(pk, r, 4);
        p.sta_id = integer(pk, r, 5);
        p.mac_queue_len = integer(pk, r, 6);
        log.packets.push_back(p);
    }
    return log;
}

} // namespace cogwifi
