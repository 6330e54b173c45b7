#include "cogwifi/ml/common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cogwifi/error.hpp"
#include "cogwifi/rng.hpp"

namespace cogwifi::ml {

Normalizer Normalizer::fit(const Matrix& x) {
    Normalizer n;
    if (x.empty()) return n;
    const std::size_t d = x.front().size();
    n.mean.assign(d, 0.0);
    n.scale.assign(d, 1.0);
    for (const auto& row : x)
        for (std::size_t j = 0; j < d; ++j) n.mean[j] += row[j];
    for (auto& m : n.mean) m /= static_cast<double>(x.size());
    std::vector<double> var(d, 0.0);
    for (const auto& row : x)
        for (std::size_t j = 0; j < d; ++j) var[j] += (row[j] - n.mean[j]) * (row[j] - n.mean[j]);
    for (std::size_t j = 0; j < d; ++j) {
        const double sd = std::sqrt(var[j] / static_cast<double>(x.size()));
        n.scale[j] = sd > 1e-12 ? sd : 1.0;
    }
    return n;
}

std::vector<double> Normalizer::apply(std::span<const double> row) const {
    if (row.size() != mean.size())
        throw ValidationError("feature vector has " + std::to_string(row.size()) + " values, model expects "
                              + std::to_string(mean.size()));
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean[j]) / scale[j];
    return out;
}

Matrix Normalizer::apply(const Matrix& x) const {
    Matrix out;
    out.reserve(x.size());
    for (const auto& row : x) out.push_back(apply(row));
    return out;
}

TargetScaler TargetScaler::fit(std::span<const double> y) {
    TargetScaler s;
    if (y.empty()) return s;
    s.mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double var = 0.0;
    for (double v : y) var += (v - s.mean) * (v - s.mean);
    const double sd = std::sqrt(var / static_cast<double>(y.size()));
    s.scale = sd > 1e-12 ? sd : 1.0;
    return s;
}

Split train_test_split(std::size_t n, double train_frac, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    auto eng = rng::make_engine(seed, "split");
    std::shuffle(idx.begin(), idx.end(), eng);
    const auto n_train = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(n)));
    Split s;
    s.train.assign(idx.begin(), idx.begin() + static_cast<long>(std::min(n_train, n)));
    s.test.assign(idx.begin() + static_cast<long>(std::min(n_train, n)), idx.end());
    return s;
}

Dataset subset(const Dataset& ds, std::span<const std::size_t> rows) {
    Dataset out = make_dataset(ds.schema);
    out.x.reserve(rows.size());
    out.y.reserve(rows.size());
    for (auto r : rows) {
        out.x.push_back(ds.x.at(r));
        out.y.push_back(ds.y.at(r));
    }
    return out;
}

} // namespace cogwifi::ml
