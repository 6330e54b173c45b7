#pragma once

// Independent reference computations the suites compare the library against.
// Each one takes the slow, obvious route on purpose.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "cogwifi/features.hpp"
#include "cogwifi/ml/forest.hpp"
#include "cogwifi/ml/mlp.hpp"
#include "cogwifi/ml/svr.hpp"
#include "cogwifi/scenario.hpp"
#include "cogwifi/simcore.hpp"

namespace oracle {

inline double rel_err(double got, double want) {
    const double d = std::fabs(got - want);
    const double s = std::max(std::fabs(want), 1e-300);
    return want == 0.0 ? d : d / s;
}

/// Population moments in long double, straight from the definitions.
struct Moments {
    long double mean, min, max, skew, kurtosis, variance;
};

inline Moments moments(std::span<const double> v) {
    const auto n = static_cast<long double>(v.size());
    long double sum = 0;
    for (double x : v) sum += x;
    const long double mean = sum / n;
    long double m2 = 0, m3 = 0, m4 = 0;
    for (double x : v) {
        const long double d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    Moments out{mean, *std::min_element(v.begin(), v.end()), *std::max_element(v.begin(), v.end()), 0, 0, m2};
    if (m2 > 0) {
        out.skew = m3 / std::pow(m2, 1.5L);
        out.kurtosis = m4 / (m2 * m2) - 3;
    }
    return out;
}

/// Wall crossings found by walking the segment in tiny steps and counting
/// inside/outside flips and room-index changes. Only valid for segments that
/// do not graze a grid line or corner.
inline cogwifi::WallCrossings walk_walls(const cogwifi::Position& a, const cogwifi::Position& b,
                                         const cogwifi::BuildingSpec& s, int steps = 200000) {
    const double rw = s.width_m / s.rooms_x, rd = s.depth_m / s.rooms_y;
    auto inside = [&](double x, double y) { return x >= 0 && x <= s.width_m && y >= 0 && y <= s.depth_m; };
    cogwifi::WallCrossings out;
    double px = a.x, py = a.y;
    for (int i = 1; i <= steps; ++i) {
        const double f = static_cast<double>(i) / steps;
        const double x = a.x + f * (b.x - a.x), y = a.y + f * (b.y - a.y);
        const bool in0 = inside(px, py), in1 = inside(x, y);
        if (in0 != in1) ++out.external;
        if (in0 && in1) {
            out.internal += std::abs(static_cast<int>(std::floor(x / rw)) - static_cast<int>(std::floor(px / rw)));
            out.internal += std::abs(static_cast<int>(std::floor(y / rd)) - static_cast<int>(std::floor(py / rd)));
        }
        px = x;
        py = y;
    }
    return out;
}

/// Airtime-fair sharing played out slot by slot: in every slot each station
/// that still wants traffic gets one equal turn. Returns delivered Mbps.
inline std::vector<double> airtime_slots(std::span<const cogwifi::BssMember> m, double eta, int slots = 2000000) {
    const std::size_t n = m.size();
    std::vector<double> got(n, 0.0);
    const double dt = 1.0 / slots;
    std::vector<bool> active(n);
    for (int k = 0; k < slots; ++k) {
        std::size_t want = 0;
        for (std::size_t i = 0; i < n; ++i) {
            active[i] = m[i].phy_rate_mbps > 0 && got[i] < m[i].demand_mbps - 1e-12;
            want += active[i];
        }
        if (want == 0) break;
        for (std::size_t i = 0; i < n; ++i)
            if (active[i])
                got[i] = std::min(m[i].demand_mbps, got[i] + dt / static_cast<double>(want) * eta * m[i].phy_rate_mbps);
    }
    return got;
}

/// Least-squares fit of x_t on (1, x_{t-1}) by solving the 2x2 normal
/// equations with Cramer's rule.
struct LineFit {
    long double slope, intercept;
};

inline LineFit normal_equations(std::span<const double> s) {
    long double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t t = 1; t < s.size(); ++t) {
        const long double x = s[t - 1], y = s[t];
        n += 1;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const long double det = n * sxx - sx * sx;
    return {(n * sxy - sx * sy) / det, (sxx * sy - sx * sxy) / det};
}

/// Worst violation of the epsilon-SVR optimality conditions over the training
/// rows, recomputing the decision function from the stored support vectors.
inline double svr_kkt_violation(const cogwifi::ml::SvrModel& m, const cogwifi::ml::Matrix& x,
                                std::span<const double> y) {
    double worst = 0.0;
    const double tiny = 1e-8 * m.C;
    auto coef_of = [&](const std::vector<double>& xz) {
        for (std::size_t k = 0; k < m.support.size(); ++k)
            if (m.support[k] == xz) return m.coef[k];
        return 0.0;
    };
    double coef_sum = 0.0;
    for (double c : m.coef) coef_sum += c;
    worst = std::fabs(coef_sum);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto xz = m.x_norm.apply(x[i]);
        double f = m.bias;
        for (std::size_t k = 0; k < m.support.size(); ++k)
            f += m.coef[k] * std::exp(-m.gamma * [&] {
                double d = 0;
                for (std::size_t j = 0; j < xz.size(); ++j) d += (xz[j] - m.support[k][j]) * (xz[j] - m.support[k][j]);
                return d;
            }());
        const double r = m.y_scale.to_z(y[i]) - f;   // residual
        const double c = coef_of(xz);
        double v = 0.0;
        if (std::fabs(c) <= tiny) v = std::max(0.0, std::fabs(r) - m.epsilon);
        else if (std::fabs(c) >= m.C - tiny) v = std::max(0.0, m.epsilon - std::fabs(r)) + (c * r < 0 ? std::fabs(r) : 0.0);
        else v = std::fabs(std::fabs(r) - m.epsilon) + (c * r < 0 ? std::fabs(r) : 0.0);
        worst = std::max(worst, v);
    }
    return worst;
}

/// Central finite differences of the MLP loss over every weight and bias,
/// flattened in layer order (weights, then biases).
inline std::vector<double> mlp_fd_gradient(cogwifi::ml::MlpModel m, const cogwifi::ml::Matrix& xz,
                                           std::span<const double> yz, double h = 1e-6) {
    std::vector<double> g;
    cogwifi::ml::MlpGradients scratch;
    auto probe = [&](double& p) {
        const double keep = p;
        p = keep + h;
        const double up = cogwifi::ml::mlp_loss_and_gradient(m, xz, yz, scratch);
        p = keep - h;
        const double dn = cogwifi::ml::mlp_loss_and_gradient(m, xz, yz, scratch);
        p = keep;
        g.push_back((up - dn) / (2 * h));
    };
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        for (auto& w : m.weights[l]) probe(w);
        for (auto& b : m.biases[l]) probe(b);
    }
    return g;
}

inline std::vector<double> flatten(const cogwifi::ml::MlpGradients& g) {
    std::vector<double> out;
    for (std::size_t l = 0; l < g.weights.size(); ++l) {
        out.insert(out.end(), g.weights[l].begin(), g.weights[l].end());
        out.insert(out.end(), g.biases[l].begin(), g.biases[l].end());
    }
    return out;
}

/// Vote by asking every tree separately; ties go to 0.
inline int tree_mode(const cogwifi::ml::ForestModel& f, std::span<const double> x) {
    int ones = 0;
    for (const auto& t : f.trees) ones += t.predict(x) == 1;
    return 2 * ones > static_cast<int>(f.trees.size()) ? 1 : 0;
}

} // namespace oracle
