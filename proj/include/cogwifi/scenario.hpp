#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cogwifi/radio.hpp"

namespace cogwifi {

struct Position {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Position&, const Position&) = default;
};

double distance(const Position& a, const Position& b);

/// Single-storey building partitioned into a regular rooms_x x rooms_y grid.
/// The footprint spans [0, width_m] x [0, depth_m].
struct BuildingSpec {
    double width_m = 300.0;
    double depth_m = 100.0;
    int floors = 1;
    int rooms_x = 30;
    int rooms_y = 10;
    double external_wall_loss_db = 7.0;
    double internal_wall_loss_db = 3.0;

    friend bool operator==(const BuildingSpec&, const BuildingSpec&) = default;
};

struct Rect {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    bool contains(const Position& p) const {
        return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
    }
    friend bool operator==(const Rect&, const Rect&) = default;
};

struct Waypoint {
    Position pos;
    double dwell_s = 0.0;

    friend bool operator==(const Waypoint&, const Waypoint&) = default;
};

/// Travel between consecutive waypoints in straight lines at constant speed,
/// pausing dwell_s at each; stays at the last waypoint afterwards.
struct WaypointPath {
    std::vector<Waypoint> points;
    double speed_mps = 1.0;

    friend bool operator==(const WaypointPath&, const WaypointPath&) = default;
};

/// Piecewise-straight walk: heading and speed are redrawn every turn_interval_s,
/// walls of the bounding rectangle reflect the walker.
struct RandomWalk {
    double speed_min_mps = 0.5;
    double speed_max_mps = 1.5;
    double turn_interval_s = 10.0;

    friend bool operator==(const RandomWalk&, const RandomWalk&) = default;
};

struct MobilitySpec {
    std::variant<WaypointPath, RandomWalk> kind = RandomWalk{};
    Rect bounds;
    double height_m = 1.5;

    friend bool operator==(const MobilitySpec&, const MobilitySpec&) = default;
};

struct ApConfig {
    int id = 0;
    Position pos;
    double tx_power_mw = 1.0;

    friend bool operator==(const ApConfig&, const ApConfig&) = default;
};

struct StationConfig {
    int id = 0;
    MobilitySpec mobility;
    double demand_mbps = 2.0;

    friend bool operator==(const StationConfig&, const StationConfig&) = default;
};

/// Load-driven reselection: a station whose queue holds more than
/// `backlog_s` seconds of its offered load for `ticks` consecutive beacons is
/// re-offered to the AP selection policy, at most once per `holdoff_s`.
struct ReselectionConfig {
    bool enabled = true;
    double backlog_s = 0.5;
    int ticks = 3;
    int holdoff_s = 10;

    friend bool operator==(const ReselectionConfig&, const ReselectionConfig&) = default;
};

struct ScenarioConfig {
    BuildingSpec building;
    std::vector<ApConfig> aps;
    std::vector<StationConfig> stations;
    RadioParams radio;
    double t1_dbm = -75.0;
    double t2_dbm = -85.0;
    double beacon_interval_s = 1.0;
    ReselectionConfig reselection;
    int duration_s = 300;
    std::uint64_t seed = 1;
    // Packet events are only kept in the log when set; aggregate statistics are
    // always recorded.
    bool record_packets = true;

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Throws ValidationError naming the first violated invariant.
void validate(const ScenarioConfig& cfg);

/// Parses the `key = value` scenario format (see README, "Scenario files").
/// Absent keys take the defaults: a 300 x 100 m commercial building with
/// 30 x 10 rooms and 7 dB external walls, 3 APs and 50 random-walking stations.
ScenarioConfig load_scenario(std::string_view text);
ScenarioConfig load_scenario_file(const std::filesystem::path& path);

/// Serialises every field explicitly; load_scenario(save_scenario(c)) == c.
std::string save_scenario(const ScenarioConfig& cfg);

/// Reference text listing every key with its default, printed by `--help`.
std::string scenario_key_reference();

/// Stable 64-bit digest of the serialised configuration.
std::uint64_t scenario_hash(const ScenarioConfig& cfg);

/// Deterministic position of a station at time t (s) for a mobility seed.
Position position_at(const MobilitySpec& mob, double t, std::uint64_t seed);

/// Incremental evaluator behind position_at: caches walk segments so a
/// simulation sweeping t forward pays O(1) per query. Gives the same values
/// as position_at for any query order.
class Trajectory {
public:
    Trajectory(MobilitySpec mob, std::uint64_t seed);
    Position at(double t);

private:
    struct Segment {
        Position start;
        double vx = 0.0;
        double vy = 0.0;
    };
    void extend_to(std::size_t k);

    MobilitySpec mob_;
    std::uint64_t seed_;
    std::vector<Segment> segments_;
};

struct WallCrossings {
    int external = 0;
    int internal = 0;

    friend bool operator==(const WallCrossings&, const WallCrossings&) = default;
};

/// Building-boundary and room-partition crossings of the 2-D segment ab.
/// A segment that touches a grid line counts one crossing for it.
WallCrossings wall_count(const Position& a, const Position& b, const BuildingSpec& spec);

} // namespace cogwifi
