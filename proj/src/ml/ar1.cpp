#include "cogwifi/ml/ar1.hpp"

#include <cmath>

#include "cogwifi/error.hpp"

namespace cogwifi::ml {

Ar1Model ar1_fit(std::span<const double> series) {
    if (series.size() < 3) throw ValidationError("ar1_fit: need at least 3 points");
    const std::size_t m = series.size() - 1;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        mx += series[i];
        my += series[i + 1];
    }
    mx /= static_cast<double>(m);
    my /= static_cast<double>(m);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (series[i] - mx) * (series[i] - mx);
        sxy += (series[i] - mx) * (series[i + 1] - my);
    }
    if (!(sxx > 0.0)) throw ValidationError("ar1_fit: constant series");
    Ar1Model model;
    model.phi = sxy / sxx;
    model.intercept = my - model.phi * mx;
    model.window = static_cast<int>(series.size());
    return model;
}

std::vector<double> ar1_forecast(const Ar1Model& m, double last, int steps) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(std::max(steps, 0)));
    double v = last;
    for (int k = 0; k < steps; ++k) {
        v = m.intercept + m.phi * v;
        out.push_back(v);
    }
    return out;
}

} // namespace cogwifi::ml
