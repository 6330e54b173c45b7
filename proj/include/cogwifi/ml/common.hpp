#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cogwifi/features.hpp"

namespace cogwifi::ml {

using Matrix = std::vector<std::vector<double>>;

/// Per-feature z-score statistics learned on a training split. Constant
/// features get a unit scale so they map to 0.
struct Normalizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Normalizer fit(const Matrix& x);
    std::vector<double> apply(std::span<const double> row) const;
    Matrix apply(const Matrix& x) const;

    friend bool operator==(const Normalizer&, const Normalizer&) = default;
};

struct TargetScaler {
    double mean = 0.0;
    double scale = 1.0;

    static TargetScaler fit(std::span<const double> y);
    double to_z(double v) const { return (v - mean) / scale; }
    double from_z(double z) const { return z * scale + mean; }

    friend bool operator==(const TargetScaler&, const TargetScaler&) = default;
};

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Seeded shuffle, first round(train_frac * n) rows for training.
Split train_test_split(std::size_t n, double train_frac, std::uint64_t seed);

Dataset subset(const Dataset& ds, std::span<const std::size_t> rows);

/// Regression quality on held-out rows. `mse` is measured on z-scored targets
/// (training-split statistics) so it is comparable across datasets.
struct RegressionReport {
    double mse = 0.0;
    double r_squared = 0.0;
    double training_time_s = 0.0;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
};

} // namespace cogwifi::ml
