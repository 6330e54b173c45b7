#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cogwifi/ml/common.hpp"

namespace cogwifi::ml {

/// Positive class = handover.
struct ConfusionMatrix {
    long tp = 0;
    long fn = 0;
    long fp = 0;
    long tn = 0;

    long total() const { return tp + fn + fp + tn; }
    double accuracy() const;
    // Rates per actual class; each pair sums to 1.
    double true_positive_rate() const;
    double false_negative_rate() const;
    double false_positive_rate() const;
    double true_negative_rate() const;

    ConfusionMatrix& operator+=(const ConfusionMatrix& o);
};

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels);
double mse(std::span<const double> predictions, std::span<const double> targets);
double r_squared(std::span<const double> predictions, std::span<const double> targets);

/// Seeded k-fold assignment: folds partition 0..n-1, sizes differ by at most one.
std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, int k, std::uint64_t seed);

/// Runs `trainer(train, validation)` once per fold. Folds are evaluated in
/// parallel; results come back in fold order.
template <class Report>
std::vector<Report> kfold_cv(const Dataset& ds, int k, std::uint64_t seed,
                             const std::function<Report(const Dataset&, const Dataset&)>& trainer) {
    const auto folds = kfold_indices(ds.size(), k, seed);
    std::vector<Report> reports(folds.size());
    const long n_folds = static_cast<long>(folds.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long f = 0; f < n_folds; ++f) {
        std::vector<std::size_t> train;
        for (long g = 0; g < n_folds; ++g)
            if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());
        reports[f] = trainer(subset(ds, train), subset(ds, folds[f]));
    }
    return reports;
}

} // namespace cogwifi::ml
