#pragma once

#include <vector>

namespace cogwifi {

struct RadioParams {
    double tx_power_mw = 1.0;          // E_t
    double path_loss_exponent = 3.0;   // beta
    double shadowing_sigma_db = 4.0;   // std-dev of the zero-mean shadowing term
    double noise_floor_dbm = -95.0;
    // Lag-one correlation of a link's shadowing between consecutive beacons.
    // 0 gives independent draws every second.
    double shadowing_corr = 0.8;

    friend bool operator==(const RadioParams&, const RadioParams&) = default;
};

void validate(const RadioParams& p);

struct WallLosses {
    double external_db = 7.0;
    double internal_db = 3.0;
};

inline constexpr double kMinDistanceM = 0.1;

/// Log-distance path loss with log-normal shadowing, evaluated in the dB
/// domain:
///   RSS = 10 log10(E_t) - 10 beta log10(d) + sigma * draw - wall losses
/// `noise_draw` is a standard-normal sample owned by the caller. Distances
/// below kMinDistanceM are clamped.
double rss_dbm(const RadioParams& p, double distance_m, int ext_walls, int int_walls,
               WallLosses losses, double noise_draw);

/// The same model evaluated in the mW domain as a product, converted to dBm.
/// Used to cross-check the dB form.
double rss_dbm_linear(const RadioParams& p, double distance_m, int ext_walls, int int_walls,
                      WallLosses losses, double noise_draw);

inline double snr_db(double rss_dbm, double noise_floor_dbm) { return rss_dbm - noise_floor_dbm; }

/// Distance at which the noise-free, wall-free model yields `rss_dbm`.
double estimate_distance_m(double rss_dbm, const RadioParams& p);

struct RateStep {
    double min_snr_db;
    double rate_mbps;
};

/// SNR -> PHY rate ladder. Rows are strictly increasing in both columns.
class RateTable {
public:
    explicit RateTable(std::vector<RateStep> steps);

    /// 802.11a/g-like ladder: 6..54 Mbps for SNR thresholds 5..25 dB.
    static const RateTable& default_table();

    const std::vector<RateStep>& steps() const { return steps_; }
    double max_rate() const { return steps_.back().rate_mbps; }
    double min_snr() const { return steps_.front().min_snr_db; }

private:
    std::vector<RateStep> steps_;
};

double phy_rate_mbps(double snr_db, const RateTable& table);

} // namespace cogwifi
