#pragma once

#include <span>
#include <vector>

namespace cogwifi::ml {

/// x_t = intercept + phi * x_{t-1}, fitted by least squares on consecutive pairs.
struct Ar1Model {
    double phi = 0.0;
    double intercept = 0.0;
    int window = 0;
};

/// Needs >= 3 points and a non-constant series.
Ar1Model ar1_fit(std::span<const double> series);

/// Applies the recurrence `steps` times starting from `last`.
std::vector<double> ar1_forecast(const Ar1Model& m, double last, int steps);

} // namespace cogwifi::ml
