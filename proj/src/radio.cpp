#include "cogwifi/radio.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cogwifi/error.hpp"

namespace cogwifi {

void validate(const RadioParams& p) {
    if (!(p.tx_power_mw > 0.0) || !std::isfinite(p.tx_power_mw))
        throw ValidationError("radio: tx_power_mw must be > 0");
    if (!(p.path_loss_exponent > 0.0) || !std::isfinite(p.path_loss_exponent))
        throw ValidationError("radio: path loss exponent (beta) must be > 0");
    if (!(p.shadowing_sigma_db >= 0.0) || !std::isfinite(p.shadowing_sigma_db))
        throw ValidationError("radio: sigma_db must be >= 0");
    if (!std::isfinite(p.noise_floor_dbm))
        throw ValidationError("radio: noise_dbm must be finite");
    if (!(p.shadowing_corr >= 0.0 && p.shadowing_corr < 1.0))
        throw ValidationError("radio: shadow_corr must lie in [0, 1)");
}

double rss_dbm(const RadioParams& p, double distance_m, int ext_walls, int int_walls,
               WallLosses losses, double noise_draw) {
    const double d = std::max(distance_m, kMinDistanceM);
    const double eps = p.shadowing_sigma_db * noise_draw;
    return 10.0 * std::log10(p.tx_power_mw) - 10.0 * p.path_loss_exponent * std::log10(d) + eps
           - ext_walls * losses.external_db - int_walls * losses.internal_db;
}

double rss_dbm_linear(const RadioParams& p, double distance_m, int ext_walls, int int_walls,
                      WallLosses losses, double noise_draw) {
    const double d = std::max(distance_m, kMinDistanceM);
    const double eps = p.shadowing_sigma_db * noise_draw;
    const double walls_db = ext_walls * losses.external_db + int_walls * losses.internal_db;
    const double mw = p.tx_power_mw * std::pow(d, -p.path_loss_exponent) * std::pow(10.0, eps / 10.0)
                      * std::pow(10.0, -walls_db / 10.0);
    return 10.0 * std::log10(mw);
}

double estimate_distance_m(double rss, const RadioParams& p) {
    return std::pow(10.0, (10.0 * std::log10(p.tx_power_mw) - rss) / (10.0 * p.path_loss_exponent));
}

RateTable::RateTable(std::vector<RateStep> steps) : steps_(std::move(steps)) {
    if (steps_.empty()) throw ValidationError("rate table must not be empty");
    for (std::size_t i = 1; i < steps_.size(); ++i) {
        if (!(steps_[i].min_snr_db > steps_[i - 1].min_snr_db)
            || !(steps_[i].rate_mbps > steps_[i - 1].rate_mbps))
            throw ValidationError("rate table rows must be strictly increasing (row "
                                  + std::to_string(i) + ")");
    }
    if (steps_.front().rate_mbps < 0.0) throw ValidationError("rate table rates must be >= 0");
}

const RateTable& RateTable::default_table() {
    static const RateTable table({{5.0, 6.0},
                                  {8.0, 9.0},
                                  {10.0, 12.0},
                                  {13.0, 18.0},
                                  {16.0, 24.0},
                                  {20.0, 36.0},
                                  {24.0, 48.0},
                                  {25.0, 54.0}});
    return table;
}

double phy_rate_mbps(double snr, const RateTable& table) {
    double rate = 0.0;
    for (const auto& step : table.steps()) {
        if (snr >= step.min_snr_db)
            rate = step.rate_mbps;
        else
            break;
    }
    return rate;
}

} // namespace cogwifi
