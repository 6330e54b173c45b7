#include "cogwifi/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cogwifi/error.hpp"
#include "cogwifi/rng.hpp"
#include "cogwifi/textio.hpp"

namespace cogwifi {

double distance(const Position& a, const Position& b) {
    const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

namespace {

std::string fmt(double v) { return text::format_double(v); }

bool finite(const Position& p) {
    return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

Rect building_rect(const BuildingSpec& b) { return Rect{0.0, 0.0, b.width_m, b.depth_m}; }

// Centre of the room containing (x, y); keeps default APs off partition lines.
Position room_centre(const BuildingSpec& b, double x, double y, double z) {
    const double rw = b.width_m / b.rooms_x;
    const double rd = b.depth_m / b.rooms_y;
    const double cx = std::min(std::floor(x / rw), b.rooms_x - 1.0) * rw + rw / 2.0;
    const double cy = std::min(std::floor(y / rd), b.rooms_y - 1.0) * rd + rd / 2.0;
    return {cx, cy, z};
}

class KeyValues {
public:
    explicit KeyValues(std::string_view text) {
        std::string section;
        int line_no = 0;
        for (auto raw : text::split(text, '\n')) {
            ++line_no;
            auto line = raw;
            if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
            line = text::trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ParseError("line " + std::to_string(line_no) + ": unterminated section header");
                section = std::string(text::trim(line.substr(1, line.size() - 2)));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string_view::npos)
                throw ParseError("line " + std::to_string(line_no) + ": expected 'key = value'");
            auto key = std::string(text::trim(line.substr(0, eq)));
            auto value = std::string(text::trim(line.substr(eq + 1)));
            if (key.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty key");
            if (!section.empty()) key = section + "." + key;
            if (values_.count(key))
                throw ParseError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
            values_[key] = {value, line_no};
        }
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    double number(const std::string& key, double fallback) {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        used_.insert(key);
        auto v = text::parse_double(it->second.value);
        if (!v) throw ParseError(where(it) + "'" + key + "' is not a number: " + it->second.value);
        return *v;
    }

    long long integer(const std::string& key, long long fallback) {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        used_.insert(key);
        auto v = text::parse_int(it->second.value);
        if (!v) throw ParseError(where(it) + "'" + key + "' is not an integer: " + it->second.value);
        return *v;
    }

    std::string string(const std::string& key, const std::string& fallback) {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        used_.insert(key);
        return it->second.value;
    }

    bool boolean(const std::string& key, bool fallback) {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        used_.insert(key);
        const auto& v = it->second.value;
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        throw ParseError(where(it) + "'" + key + "' is not a boolean: " + v);
    }

    /// Distinct integer ids N appearing as `<prefix>.N.<field>`.
    std::set<int> indexed_ids(const std::string& prefix) const {
        std::set<int> ids;
        const auto pre = prefix + ".";
        for (const auto& [key, v] : values_) {
            if (key.rfind(pre, 0) != 0) continue;
            const auto rest = std::string_view(key).substr(pre.size());
            const auto dot = rest.find('.');
            if (dot == std::string_view::npos) continue;
            if (auto id = text::parse_int(rest.substr(0, dot))) ids.insert(static_cast<int>(*id));
        }
        return ids;
    }

    void reject_unused() const {
        for (const auto& [key, v] : values_)
            if (!used_.count(key)) throw ParseError("line " + std::to_string(v.line) + ": unknown key '" + key + "'");
    }

private:
    struct Entry {
        std::string value;
        int line;
    };
    std::string where(std::map<std::string, Entry>::const_iterator it) const {
        return "line " + std::to_string(it->second.line) + ": ";
    }

    std::map<std::string, Entry> values_;
    std::set<std::string> used_;
};

std::vector<Waypoint> parse_waypoints(const std::string& key, const std::string& spec) {
    std::vector<Waypoint> pts;
    for (auto item : text::split(spec, ';')) {
        item = text::trim(item);
        if (item.empty()) continue;
        auto fields = text::split(item, ',');
        if (fields.size() != 3 && fields.size() != 4)
            throw ParseError("'" + key + "': waypoint must be 'x,y,dwell' or 'x,y,z,dwell'");
        std::vector<double> v;
        for (auto f : fields) {
            auto d = text::parse_double(f);
            if (!d) throw ParseError("'" + key + "': bad number '" + std::string(f) + "'");
            v.push_back(*d);
        }
        Waypoint w;
        w.pos = {v[0], v[1], v.size() == 4 ? v[2] : 1.5};
        w.dwell_s = v.back();
        pts.push_back(w);
    }
    if (pts.empty()) throw ParseError("'" + key + "': empty waypoint list");
    return pts;
}

void read_mobility(KeyValues& kv, const std::string& prefix, MobilitySpec& mob) {
    const std::string kind_default =
        std::holds_alternative<RandomWalk>(mob.kind) ? "random_walk" : "waypoints";
    const auto kind = kv.string(prefix + ".mobility.kind", kind_default);
    if (kind == "random_walk") {
        RandomWalk rw = std::holds_alternative<RandomWalk>(mob.kind) ? std::get<RandomWalk>(mob.kind) : RandomWalk{};
        rw.speed_min_mps = kv.number(prefix + ".mobility.speed_min", rw.speed_min_mps);
        rw.speed_max_mps = kv.number(prefix + ".mobility.speed_max", rw.speed_max_mps);
        rw.turn_interval_s = kv.number(prefix + ".mobility.turn_interval_s", rw.turn_interval_s);
        mob.kind = rw;
    } else if (kind == "waypoints") {
        WaypointPath wp = std::holds_alternative<WaypointPath>(mob.kind) ? std::get<WaypointPath>(mob.kind)
                                                                          : WaypointPath{};
        wp.speed_mps = kv.number(prefix + ".mobility.speed", wp.speed_mps);
        const auto key = prefix + ".waypoints";
        if (kv.has(key)) wp.points = parse_waypoints(key, kv.string(key, ""));
        mob.kind = wp;
    } else {
        throw ParseError("'" + prefix + ".mobility.kind' must be random_walk or waypoints, got '" + kind + "'");
    }
    mob.bounds.x_min = kv.number(prefix + ".mobility.x_min", mob.bounds.x_min);
    mob.bounds.y_min = kv.number(prefix + ".mobility.y_min", mob.bounds.y_min);
    mob.bounds.x_max = kv.number(prefix + ".mobility.x_max", mob.bounds.x_max);
    mob.bounds.y_max = kv.number(prefix + ".mobility.y_max", mob.bounds.y_max);
    mob.height_m = kv.number(prefix + ".height_m", mob.height_m);
}

void write_mobility(std::ostringstream& os, const std::string& prefix, const MobilitySpec& mob) {
    if (const auto* rw = std::get_if<RandomWalk>(&mob.kind)) {
        os << prefix << ".mobility.kind = random_walk\n";
        os << prefix << ".mobility.speed_min = " << fmt(rw->speed_min_mps) << "\n";
        os << prefix << ".mobility.speed_max = " << fmt(rw->speed_max_mps) << "\n";
        os << prefix << ".mobility.turn_interval_s = " << fmt(rw->turn_interval_s) << "\n";
    } else {
        const auto& wp = std::get<WaypointPath>(mob.kind);
        os << prefix << ".mobility.kind = waypoints\n";
        os << prefix << ".mobility.speed = " << fmt(wp.speed_mps) << "\n";
        os << prefix << ".waypoints = ";
        for (std::size_t i = 0; i < wp.points.size(); ++i) {
            const auto& w = wp.points[i];
            if (i) os << "; ";
            os << fmt(w.pos.x) << "," << fmt(w.pos.y) << "," << fmt(w.pos.z) << "," << fmt(w.dwell_s);
        }
        os << "\n";
    }
    os << prefix << ".mobility.x_min = " << fmt(mob.bounds.x_min) << "\n";
    os << prefix << ".mobility.y_min = " << fmt(mob.bounds.y_min) << "\n";
    os << prefix << ".mobility.x_max = " << fmt(mob.bounds.x_max) << "\n";
    os << prefix << ".mobility.y_max = " << fmt(mob.bounds.y_max) << "\n";
    os << prefix << ".height_m = " << fmt(mob.height_m) << "\n";
}

} // namespace

void validate(const ScenarioConfig& cfg) {
    const auto& b = cfg.building;
    if (!(b.width_m > 0.0)) throw ValidationError("building.width_m must be > 0");
    if (!(b.depth_m > 0.0)) throw ValidationError("building.depth_m must be > 0");
    if (b.floors < 1) throw ValidationError("building.floors must be >= 1");
    if (b.rooms_x < 1) throw ValidationError("building.rooms_x must be >= 1");
    if (b.rooms_y < 1) throw ValidationError("building.rooms_y must be >= 1");
    if (!(b.external_wall_loss_db >= 0.0)) throw ValidationError("building.ewl_db must be >= 0");
    if (!(b.internal_wall_loss_db >= 0.0)) throw ValidationError("building.iwl_db must be >= 0");
    validate(cfg.radio);
    if (!(cfg.t2_dbm < cfg.t1_dbm)) throw ValidationError("t2 must be below t1");
    if (!(cfg.reselection.backlog_s > 0.0)) throw ValidationError("ctl.backlog_s must be > 0");
    if (cfg.reselection.ticks < 1) throw ValidationError("ctl.degrade_ticks must be >= 1");
    if (cfg.reselection.holdoff_s < 0) throw ValidationError("ctl.holdoff_s must be >= 0");
    if (cfg.beacon_interval_s != 1.0) throw ValidationError("sim.beacon_interval_s must be 1 (fixed 1 s tick)");
    if (cfg.duration_s < 20) throw ValidationError("sim.duration_s must be >= 20");
    if (cfg.aps.empty()) throw ValidationError("at least one AP is required");
    if (cfg.stations.empty()) throw ValidationError("at least one station is required");

    std::set<int> ids;
    for (const auto& ap : cfg.aps) {
        if (!ids.insert(ap.id).second) throw ValidationError("duplicate AP id " + std::to_string(ap.id));
        if (!finite(ap.pos) || ap.pos.z < 0.0)
            throw ValidationError("AP " + std::to_string(ap.id) + ": position must be finite with z >= 0");
        if (!(ap.tx_power_mw > 0.0)) throw ValidationError("AP " + std::to_string(ap.id) + ": tx_power_mw must be > 0");
    }
    ids.clear();
    for (const auto& sta : cfg.stations) {
        const auto tag = "station " + std::to_string(sta.id);
        if (!ids.insert(sta.id).second) throw ValidationError("duplicate station id " + std::to_string(sta.id));
        if (!(sta.demand_mbps >= 0.0)) throw ValidationError(tag + ": demand_mbps must be >= 0");
        const auto& m = sta.mobility;
        if (!(m.bounds.x_max >= m.bounds.x_min && m.bounds.y_max >= m.bounds.y_min))
            throw ValidationError(tag + ": mobility bounds are inverted");
        if (!(m.height_m >= 0.0)) throw ValidationError(tag + ": height_m must be >= 0");
        if (const auto* rw = std::get_if<RandomWalk>(&m.kind)) {
            if (!(rw->speed_min_mps > 0.0) || !(rw->speed_max_mps >= rw->speed_min_mps))
                throw ValidationError(tag + ": random walk speeds must satisfy 0 < speed_min <= speed_max");
            if (!(rw->turn_interval_s > 0.0)) throw ValidationError(tag + ": turn_interval_s must be > 0");
        } else {
            const auto& wp = std::get<WaypointPath>(m.kind);
            if (!(wp.speed_mps > 0.0)) throw ValidationError(tag + ": waypoint speed must be > 0");
            if (wp.points.empty()) throw ValidationError(tag + ": waypoint list is empty");
            for (const auto& w : wp.points) {
                if (!finite(w.pos) || w.pos.z < 0.0) throw ValidationError(tag + ": waypoint not finite");
                if (!m.bounds.contains(w.pos)) throw ValidationError(tag + ": waypoint outside mobility bounds");
                if (!(w.dwell_s >= 0.0)) throw ValidationError(tag + ": dwell_s must be >= 0");
            }
        }
    }
}

ScenarioConfig load_scenario(std::string_view text) {
    KeyValues kv(text);
    ScenarioConfig cfg;

    auto& b = cfg.building;
    b.width_m = kv.number("building.width_m", b.width_m);
    b.depth_m = kv.number("building.depth_m", b.depth_m);
    b.floors = static_cast<int>(kv.integer("building.floors", b.floors));
    b.rooms_x = static_cast<int>(kv.integer("building.rooms_x", b.rooms_x));
    b.rooms_y = static_cast<int>(kv.integer("building.rooms_y", b.rooms_y));
    b.external_wall_loss_db = kv.number("building.ewl_db", b.external_wall_loss_db);
    b.internal_wall_loss_db = kv.number("building.iwl_db", b.internal_wall_loss_db);
    if (b.rooms_x < 1 || b.rooms_y < 1 || !(b.width_m > 0.0) || !(b.depth_m > 0.0)) validate(cfg);

    auto& r = cfg.radio;
    r.tx_power_mw = kv.number("radio.tx_power_mw", r.tx_power_mw);
    r.path_loss_exponent = kv.number("radio.beta", r.path_loss_exponent);
    r.shadowing_sigma_db = kv.number("radio.sigma_db", r.shadowing_sigma_db);
    r.noise_floor_dbm = kv.number("radio.noise_dbm", r.noise_floor_dbm);
    r.shadowing_corr = kv.number("radio.shadow_corr", r.shadowing_corr);

    cfg.t1_dbm = kv.number("thresholds.t1_dbm", cfg.t1_dbm);
    cfg.t2_dbm = kv.number("thresholds.t2_dbm", cfg.t2_dbm);
    cfg.duration_s = static_cast<int>(kv.integer("sim.duration_s", cfg.duration_s));
    cfg.seed = static_cast<std::uint64_t>(kv.integer("sim.seed", static_cast<long long>(cfg.seed)));
    cfg.beacon_interval_s = kv.number("sim.beacon_interval_s", cfg.beacon_interval_s);
    cfg.record_packets = kv.boolean("sim.record_packets", cfg.record_packets);
    auto& rs = cfg.reselection;
    rs.enabled = kv.boolean("ctl.reselect", rs.enabled);
    rs.backlog_s = kv.number("ctl.backlog_s", rs.backlog_s);
    rs.ticks = static_cast<int>(kv.integer("ctl.degrade_ticks", rs.ticks));
    rs.holdoff_s = static_cast<int>(kv.integer("ctl.holdoff_s", rs.holdoff_s));

    const auto ap_ids = kv.indexed_ids("ap");
    if (ap_ids.empty()) {
        // Three APs a sixth of the width apart around the centre, so their
        // cells overlap and AP choice affects the load.
        for (int i = 0; i < 3; ++i) {
            ApConfig ap;
            ap.id = i + 1;
            ap.pos = room_centre(b, b.width_m * (3 + i - 1) / 6.0, b.depth_m / 2.0, 3.0);
            ap.tx_power_mw = r.tx_power_mw;
            cfg.aps.push_back(ap);
        }
    } else {
        for (int id : ap_ids) {
            const auto pre = "ap." + std::to_string(id);
            ApConfig ap;
            ap.id = id;
            ap.pos.x = kv.number(pre + ".x", 0.0);
            ap.pos.y = kv.number(pre + ".y", 0.0);
            ap.pos.z = kv.number(pre + ".z", 3.0);
            ap.tx_power_mw = kv.number(pre + ".tx_power_mw", r.tx_power_mw);
            cfg.aps.push_back(ap);
        }
    }

    StationConfig tmpl;
    tmpl.mobility.bounds = building_rect(b);
    tmpl.demand_mbps = kv.number("sta.demand_mbps", tmpl.demand_mbps);
    read_mobility(kv, "sta", tmpl.mobility);

    const auto sta_ids = kv.indexed_ids("sta");
    const long long count = kv.integer("sta.count", sta_ids.empty() ? 50 : 0);
    if (count < 0) throw ValidationError("sta.count must be >= 0");
    std::map<int, StationConfig> stations;
    for (int i = 1; i <= count; ++i) {
        auto s = tmpl;
        s.id = i;
        stations[i] = s;
    }
    for (int id : sta_ids) {
        auto it = stations.find(id);
        auto s = it != stations.end() ? it->second : tmpl;
        s.id = id;
        const auto pre = "sta." + std::to_string(id);
        s.demand_mbps = kv.number(pre + ".demand_mbps", s.demand_mbps);
        read_mobility(kv, pre, s.mobility);
        stations[id] = s;
    }
    for (auto& [id, s] : stations) cfg.stations.push_back(s);

    kv.reject_unused();
    validate(cfg);
    return cfg;
}

ScenarioConfig load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return load_scenario(ss.str());
}

std::string save_scenario(const ScenarioConfig& cfg) {
    std::ostringstream os;
    const auto& b = cfg.building;
    os << "building.width_m = " << fmt(b.width_m) << "\n";
    os << "building.depth_m = " << fmt(b.depth_m) << "\n";
    os << "building.floors = " << b.floors << "\n";
    os << "building.rooms_x = " << b.rooms_x << "\n";
    os << "building.rooms_y = " << b.rooms_y << "\n";
    os << "building.ewl_db = " << fmt(b.external_wall_loss_db) << "\n";
    os << "building.iwl_db = " << fmt(b.internal_wall_loss_db) << "\n";
    const auto& r = cfg.radio;
    os << "radio.tx_power_mw = " << fmt(r.tx_power_mw) << "\n";
    os << "radio.beta = " << fmt(r.path_loss_exponent) << "\n";
    os << "radio.sigma_db = " << fmt(r.shadowing_sigma_db) << "\n";
    os << "radio.noise_dbm = " << fmt(r.noise_floor_dbm) << "\n";
    os << "radio.shadow_corr = " << fmt(r.shadowing_corr) << "\n";
    os << "thresholds.t1_dbm = " << fmt(cfg.t1_dbm) << "\n";
    os << "thresholds.t2_dbm = " << fmt(cfg.t2_dbm) << "\n";
    os << "sim.duration_s = " << cfg.duration_s << "\n";
    os << "sim.seed = " << static_cast<long long>(cfg.seed) << "\n";
    os << "sim.beacon_interval_s = " << fmt(cfg.beacon_interval_s) << "\n";
    os << "sim.record_packets = " << (cfg.record_packets ? "true" : "false") << "\n";
    os << "ctl.reselect = " << (cfg.reselection.enabled ? "true" : "false") << "\n";
    os << "ctl.backlog_s = " << fmt(cfg.reselection.backlog_s) << "\n";
    os << "ctl.degrade_ticks = " << cfg.reselection.ticks << "\n";
    os << "ctl.holdoff_s = " << cfg.reselection.holdoff_s << "\n";
    for (const auto& ap : cfg.aps) {
        const auto pre = "ap." + std::to_string(ap.id);
        os << pre << ".x = " << fmt(ap.pos.x) << "\n";
        os << pre << ".y = " << fmt(ap.pos.y) << "\n";
        os << pre << ".z = " << fmt(ap.pos.z) << "\n";
        os << pre << ".tx_power_mw = " << fmt(ap.tx_power_mw) << "\n";
    }
    os << "sta.count = 0\n";
    for (const auto& s : cfg.stations) {
        const auto pre = "sta." + std::to_string(s.id);
        os << pre << ".demand_mbps = " << fmt(s.demand_mbps) << "\n";
        write_mobility(os, pre, s.mobility);
    }
    return os.str();
}

std::string scenario_key_reference() {
    return R"(Scenario file keys (`key = value`, '#' comments, optional [section] headers):
  building.width_m        300      building.depth_m        100
  building.floors         1        building.rooms_x        30
  building.rooms_y        10       building.ewl_db         7    (external wall loss, dB)
  building.iwl_db         3        (internal partition loss, dB)
  ap.N.x / .y / .z        metres   (default: 3 APs at room centres x = 105, 155, 205, y = 55, z = 3)
  ap.N.tx_power_mw        radio.tx_power_mw
  sta.count               50       stations 1..count share the sta.* template
  sta.demand_mbps         2        offered load per station (Poisson, 1200-byte packets)
  sta.height_m            1.5
  sta.mobility.kind       random_walk | waypoints
  sta.mobility.speed_min  0.5      sta.mobility.speed_max  1.5   (m/s)
  sta.mobility.turn_interval_s 10
  sta.mobility.speed      1        (waypoint travel speed, m/s)
  sta.mobility.x_min/y_min/x_max/y_max   building footprint
  sta.N.*                 per-station overrides of any sta.* key, plus
  sta.N.waypoints         "x,y,dwell; x,y,dwell; ..." (or x,y,z,dwell)
  radio.tx_power_mw       1        radio.beta              3
  radio.sigma_db          4        radio.noise_dbm         -95
  radio.shadow_corr       0.8      (lag-1 correlation of per-link shadowing)
  thresholds.t1_dbm       -75      thresholds.t2_dbm       -85  (t2 < t1)
  sim.duration_s          300      (>= 20)
  sim.seed                1        sim.beacon_interval_s   1 (fixed)
  sim.record_packets      true
  ctl.reselect            true     re-run AP selection for stations with a persistent backlog
  ctl.backlog_s           0.5      queued seconds of offered load that count as degraded
  ctl.degrade_ticks       3        consecutive degraded beacons before reselecting
  ctl.holdoff_s           10       minimum seconds between reselections of one station
Default rate table (SNR dB -> Mbps): 5->6 8->9 10->12 13->18 16->24 20->36 24->48 25->54
)";
}

std::uint64_t scenario_hash(const ScenarioConfig& cfg) { return rng::fnv1a(save_scenario(cfg)); }

// ---------------------------------------------------------------------------
// Mobility

namespace {

double fold(double u, double lo, double hi) {
    const double len = hi - lo;
    if (len <= 0.0) return lo;
    double m = std::fmod(u - lo, 2.0 * len);
    if (m < 0.0) m += 2.0 * len;
    return lo + (m <= len ? m : 2.0 * len - m);
}

Position waypoint_position(const WaypointPath& wp, double t) {
    const auto& pts = wp.points;
    double clock = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        clock += pts[i].dwell_s;
        if (t <= clock || i + 1 == pts.size()) return pts[i].pos;
        const double leg = distance(pts[i].pos, pts[i + 1].pos) / wp.speed_mps;
        if (t < clock + leg) {
            const double f = (t - clock) / leg;
            const auto& a = pts[i].pos;
            const auto& b = pts[i + 1].pos;
            return {a.x + f * (b.x - a.x), a.y + f * (b.y - a.y), a.z + f * (b.z - a.z)};
        }
        clock += leg;
    }
    return pts.back().pos;
}

} // namespace

Trajectory::Trajectory(MobilitySpec mob, std::uint64_t seed) : mob_(std::move(mob)), seed_(seed) {}

void Trajectory::extend_to(std::size_t k) {
    const auto& rw = std::get<RandomWalk>(mob_.kind);
    const auto& bd = mob_.bounds;
    while (segments_.size() <= k) {
        Segment seg;
        if (segments_.empty()) {
            auto eng = rng::make_engine(seed_, "walk-start");
            std::uniform_real_distribution<double> ux(bd.x_min, bd.x_max);
            std::uniform_real_distribution<double> uy(bd.y_min, bd.y_max);
            seg.start = {bd.x_min < bd.x_max ? ux(eng) : bd.x_min, bd.y_min < bd.y_max ? uy(eng) : bd.y_min,
                         mob_.height_m};
        } else {
            const auto& prev = segments_.back();
            const double dt = rw.turn_interval_s;
            seg.start = {fold(prev.start.x + prev.vx * dt, bd.x_min, bd.x_max),
                         fold(prev.start.y + prev.vy * dt, bd.y_min, bd.y_max), mob_.height_m};
        }
        auto eng = rng::make_engine(seed_, "walk-leg", segments_.size());
        std::uniform_real_distribution<double> heading(0.0, 2.0 * M_PI);
        const double theta = heading(eng);
        const double speed = rw.speed_min_mps < rw.speed_max_mps
                                 ? std::uniform_real_distribution<double>(rw.speed_min_mps, rw.speed_max_mps)(eng)
                                 : rw.speed_min_mps;
        seg.vx = speed * std::cos(theta);
        seg.vy = speed * std::sin(theta);
        segments_.push_back(seg);
    }
}

Position Trajectory::at(double t) {
    t = std::max(t, 0.0);
    if (const auto* wp = std::get_if<WaypointPath>(&mob_.kind)) return waypoint_position(*wp, t);
    const auto& rw = std::get<RandomWalk>(mob_.kind);
    const auto k = static_cast<std::size_t>(std::floor(t / rw.turn_interval_s));
    extend_to(k);
    const auto& seg = segments_[k];
    const double tau = t - static_cast<double>(k) * rw.turn_interval_s;
    const auto& bd = mob_.bounds;
    return {fold(seg.start.x + seg.vx * tau, bd.x_min, bd.x_max), fold(seg.start.y + seg.vy * tau, bd.y_min, bd.y_max),
            mob_.height_m};
}

Position position_at(const MobilitySpec& mob, double t, std::uint64_t seed) {
    Trajectory traj(mob, seed);
    return traj.at(t);
}

// ---------------------------------------------------------------------------
// Walls

WallCrossings wall_count(const Position& pa, const Position& pb, const BuildingSpec& spec) {
    // Canonical endpoint order makes the count symmetric bit-for-bit.
    Position a = pa, b = pb;
    if (std::tie(b.x, b.y) < std::tie(a.x, a.y)) std::swap(a, b);

    const double W = spec.width_m, D = spec.depth_m;
    WallCrossings out;

    // External: clip the segment against the closed footprint (Liang-Barsky).
    {
        double s0 = 0.0, s1 = 1.0;
        const double dx = b.x - a.x, dy = b.y - a.y;
        bool hit = true;
        auto clip = [&](double p, double q) {
            if (p == 0.0) {
                if (q < 0.0) hit = false;
                return;
            }
            const double r = q / p;
            if (p < 0.0) {
                if (r > s1) hit = false;
                else if (r > s0) s0 = r;
            } else {
                if (r < s0) hit = false;
                else if (r < s1) s1 = r;
            }
        };
        clip(-dx, a.x - 0.0);
        clip(dx, W - a.x);
        clip(-dy, a.y - 0.0);
        clip(dy, D - a.y);
        if (hit) {
            auto inside = [&](const Position& p) { return p.x >= 0.0 && p.x <= W && p.y >= 0.0 && p.y <= D; };
            const int outside = (inside(a) ? 0 : 1) + (inside(b) ? 0 : 1);
            out.external = (outside == 2 && s0 == s1) ? 1 : outside;
        }
    }

    // Internal partitions: interior grid lines, crossings inside the footprint.
    const double rw = W / spec.rooms_x, rd = D / spec.rooms_y;
    for (int k = 1; k < spec.rooms_x; ++k) {
        const double xk = k * rw;
        if (xk < a.x || xk > b.x) continue;
        if (a.x == b.x) {
            if (std::max(std::min(a.y, b.y), 0.0) <= std::min(std::max(a.y, b.y), D)) ++out.internal;
            continue;
        }
        const double y = a.y + (xk - a.x) * (b.y - a.y) / (b.x - a.x);
        if (y >= 0.0 && y <= D) ++out.internal;
    }
    const double ylo = std::min(a.y, b.y), yhi = std::max(a.y, b.y);
    for (int k = 1; k < spec.rooms_y; ++k) {
        const double yk = k * rd;
        if (yk < ylo || yk > yhi) continue;
        if (a.y == b.y) {
            if (std::max(a.x, 0.0) <= std::min(b.x, W)) ++out.internal;
            continue;
        }
        const double x = a.x + (yk - a.y) * (b.x - a.x) / (b.y - a.y);
        if (x >= 0.0 && x <= W) ++out.internal;
    }
    return out;
}

} // namespace cogwifi
