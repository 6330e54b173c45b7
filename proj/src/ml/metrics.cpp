#include "cogwifi/ml/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "cogwifi/error.hpp"
#include "cogwifi/rng.hpp"

namespace cogwifi::ml {

namespace {
double ratio(long a, long b) { return b > 0 ? static_cast<double>(a) / static_cast<double>(b) : 0.0; }
} // namespace

double ConfusionMatrix::accuracy() const { return ratio(tp + tn, total()); }
double ConfusionMatrix::true_positive_rate() const { return ratio(tp, tp + fn); }
double ConfusionMatrix::false_negative_rate() const { return ratio(fn, tp + fn); }
double ConfusionMatrix::false_positive_rate() const { return ratio(fp, fp + tn); }
double ConfusionMatrix::true_negative_rate() const { return ratio(tn, fp + tn); }

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
    tp += o.tp;
    fn += o.fn;
    fp += o.fp;
    tn += o.tn;
    return *this;
}

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels) {
    if (predictions.size() != labels.size()) throw ValidationError("confusion: length mismatch");
    if (predictions.empty()) throw ValidationError("confusion: empty input");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool p = predictions[i] != 0, a = labels[i] != 0;
        if (a && p) ++cm.tp;
        else if (a) ++cm.fn;
        else if (p) ++cm.fp;
        else ++cm.tn;
    }
    return cm;
}

double mse(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size()) throw ValidationError("mse: length mismatch");
    if (predictions.empty()) throw ValidationError("mse: empty input");
    double s = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) s += (predictions[i] - targets[i]) * (predictions[i] - targets[i]);
    return s / static_cast<double>(targets.size());
}

double r_squared(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size()) throw ValidationError("r_squared: length mismatch");
    if (predictions.empty()) throw ValidationError("r_squared: empty input");
    const double mean = std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(targets.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        ss_res += (targets[i] - predictions[i]) * (targets[i] - predictions[i]);
        ss_tot += (targets[i] - mean) * (targets[i] - mean);
    }
    if (!(ss_tot > 0.0)) throw ValidationError("r_squared: targets have zero variance");
    return 1.0 - ss_res / ss_tot;
}

std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2) throw ValidationError("kfold: k must be >= 2");
    if (static_cast<std::size_t>(k) > n)
        throw ValidationError("kfold: k = " + std::to_string(k) + " exceeds the " + std::to_string(n) + " rows");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    auto eng = rng::make_engine(seed, "kfold");
    std::shuffle(idx.begin(), idx.end(), eng);
    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < n; ++i) folds[i % static_cast<std::size_t>(k)].push_back(idx[i]);
    return folds;
}

} // namespace cogwifi::ml
