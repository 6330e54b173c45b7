#include "cogwifi/ml/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <omp.h>

#include "cogwifi/error.hpp"
#include "cogwifi/rng.hpp"

namespace cogwifi::ml {

int DecisionTree::predict(std::span<const double> x) const {
    int i = 0;
    while (nodes[i].feature >= 0) i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
    return nodes[i].label;
}

int DecisionTree::depth() const {
    std::vector<int> d(nodes.size(), 0);
    int best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        best = std::max(best, d[i]);
        if (nodes[i].feature >= 0) {
            d[nodes[i].left] = d[i] + 1;
            d[nodes[i].right] = d[i] + 1;
        }
    }
    return best;
}

int ForestModel::features_per_split() const {
    const int k = static_cast<int>(std::ceil(params.feat_frac * n_features - 1e-12));
    return std::clamp(k, 1, n_features);
}

namespace {

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
};

double gini_sum(double n0, double n1) {
    const double n = n0 + n1;
    if (n <= 0.0) return 0.0;
    // n * gini = n * (1 - p0^2 - p1^2)
    return n - (n0 * n0 + n1 * n1) / n;
}

class TreeGrower {
public:
    TreeGrower(const Matrix& x, std::span<const int> y, const ForestParams& p, int n_features, int mtry,
               rng::Engine& eng)
        : x_(x), y_(y), p_(p), n_features_(n_features), mtry_(mtry), eng_(eng) {
        features_.resize(static_cast<std::size_t>(n_features));
        std::iota(features_.begin(), features_.end(), 0);
    }

    DecisionTree grow(std::vector<std::size_t> rows) {
        tree_.nodes.clear();
        build(rows, 0);
        return std::move(tree_);
    }

private:
    int build(std::vector<std::size_t>& rows, int depth) {
        const int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        long n1 = 0;
        for (auto r : rows) n1 += y_[r];
        const long n0 = static_cast<long>(rows.size()) - n1;
        tree_.nodes[id].label = n1 > n0 ? 1 : 0;

        if (depth >= p_.max_depth || n0 == 0 || n1 == 0
            || rows.size() < 2 * static_cast<std::size_t>(std::max(p_.min_leaf, 1)))
            return id;
        const auto split = best_split(rows, static_cast<double>(n0), static_cast<double>(n1));
        if (split.feature < 0) return id;

        std::vector<std::size_t> left, right;
        for (auto r : rows) (x_[r][split.feature] <= split.threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();
        tree_.nodes[id].feature = split.feature;
        tree_.nodes[id].threshold = split.threshold;
        const int l = build(left, depth + 1);
        const int r = build(right, depth + 1);
        tree_.nodes[id].left = l;
        tree_.nodes[id].right = r;
        return id;
    }

    SplitChoice best_split(const std::vector<std::size_t>& rows, double n0, double n1) {
        // Partial Fisher-Yates draws the candidate feature subset.
        for (int i = 0; i < mtry_; ++i) {
            std::uniform_int_distribution<int> pick(i, n_features_ - 1);
            std::swap(features_[i], features_[pick(eng_)]);
        }
        SplitChoice best;
        best.impurity = gini_sum(n0, n1) - 1e-12;
        const std::size_t min_leaf = static_cast<std::size_t>(std::max(p_.min_leaf, 1));
        std::vector<std::pair<double, int>> vals(rows.size());
        for (int fi = 0; fi < mtry_; ++fi) {
            const int f = features_[fi];
            for (std::size_t i = 0; i < rows.size(); ++i) vals[i] = {x_[rows[i]][f], y_[rows[i]]};
            std::sort(vals.begin(), vals.end());
            double l0 = 0.0, l1 = 0.0;
            for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
                (vals[i].second ? l1 : l0) += 1.0;
                if (vals[i].first == vals[i + 1].first) continue;
                const std::size_t nl = i + 1;
                if (nl < min_leaf || vals.size() - nl < min_leaf) continue;
                const double imp = gini_sum(l0, l1) + gini_sum(n0 - l0, n1 - l1);
                if (imp < best.impurity) {
                    best.impurity = imp;
                    best.feature = f;
                    best.threshold = 0.5 * (vals[i].first + vals[i + 1].first);
                    // Midpoint can round onto the upper value for adjacent doubles.
                    if (!(best.threshold < vals[i + 1].first)) best.threshold = vals[i].first;
                }
            }
        }
        return best;
    }

    const Matrix& x_;
    std::span<const int> y_;
    const ForestParams& p_;
    int n_features_;
    int mtry_;
    rng::Engine& eng_;
    std::vector<int> features_;
    DecisionTree tree_;
};

DecisionTree grow_tree(const Matrix& x, std::span<const int> y, const ForestParams& p, int n_features, int mtry,
                       std::uint64_t seed, int tree_index) {
    auto eng = rng::make_engine(seed, "rf-tree", static_cast<std::uint64_t>(tree_index));
    std::vector<std::size_t> rows(x.size());
    std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
    for (auto& r : rows) r = pick(eng);
    TreeGrower grower(x, y, p, n_features, mtry, eng);
    return grower.grow(std::move(rows));
}

ForestModel prepare(const Matrix& x, std::span<const int> y, const ForestParams& params, std::uint64_t seed) {
    if (x.empty()) throw ValidationError("rf_train: empty dataset");
    if (x.size() != y.size()) throw ValidationError("rf_train: feature/label count mismatch");
    if (params.n_trees < 1) throw ValidationError("rf_train: n_trees must be >= 1");
    if (params.max_depth < 0) throw ValidationError("rf_train: max_depth must be >= 0");
    if (!(params.feat_frac > 0.0 && params.feat_frac <= 1.0))
        throw ValidationError("rf_train: feat_frac must lie in (0, 1]");
    bool has0 = false, has1 = false;
    for (int v : y) {
        if (v != 0 && v != 1) throw ValidationError("rf_train: labels must be 0 or 1");
        (v ? has1 : has0) = true;
    }
    if (!has0 || !has1) throw TrainingError("rf_train: single-class dataset");
    ForestModel m;
    m.n_features = static_cast<int>(x.front().size());
    m.params = params;
    m.seed = seed;
    m.trees.resize(static_cast<std::size_t>(params.n_trees));
    return m;
}

std::vector<int> labels_of(const Dataset& ds) {
    std::vector<int> y(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) y[i] = ds.y[i] != 0.0 ? 1 : 0;
    return y;
}

} // namespace

ForestModel rf_train(const Matrix& x, std::span<const int> labels, const ForestParams& params, std::uint64_t seed,
                     int threads) {
    auto m = prepare(x, labels, params, seed);
    const int mtry = m.features_per_split();
    const int n = params.n_trees;
    const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
    for (int t = 0; t < n; ++t) m.trees[t] = grow_tree(x, labels, params, m.n_features, mtry, seed, t);
    return m;
}

ForestModel rf_train(const Dataset& ds, const ForestParams& params, std::uint64_t seed, int threads) {
    const auto y = labels_of(ds);
    return rf_train(ds.x, y, params, seed, threads);
}

ForestModel rf_train_serial(const Matrix& x, std::span<const int> labels, const ForestParams& params,
                            std::uint64_t seed) {
    auto m = prepare(x, labels, params, seed);
    const int mtry = m.features_per_split();
    for (int t = 0; t < params.n_trees; ++t) m.trees[t] = grow_tree(x, labels, params, m.n_features, mtry, seed, t);
    return m;
}

ForestVote rf_predict(const ForestModel& model, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(model.n_features))
        throw ValidationError("rf_predict: expected " + std::to_string(model.n_features) + " features, got "
                              + std::to_string(x.size()));
    for (double v : x)
        if (!std::isfinite(v)) throw ValidationError("rf_predict: non-finite feature");
    int votes = 0;
    for (const auto& tree : model.trees) votes += tree.predict(x);
    const int n = static_cast<int>(model.trees.size());
    ForestVote v;
    v.label = 2 * votes > n ? 1 : 0;
    v.prob = n > 0 ? static_cast<double>(votes) / n : 0.0;
    return v;
}

} // namespace cogwifi::ml
