#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cogwifi/ml/common.hpp"

namespace cogwifi::ml {

struct ForestParams {
    int n_trees = 100;
    int max_depth = 12;
    int min_leaf = 2;
    double feat_frac = 0.27735009811261457;   // sqrt(13) / 13

    friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

struct TreeNode {
    int feature = -1;   // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = 0;

    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Binary CART tree with axis-aligned splits (x[feature] <= threshold goes left).
struct DecisionTree {
    std::vector<TreeNode> nodes;

    int predict(std::span<const double> x) const;
    int depth() const;

    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct ForestModel {
    int n_features = 0;
    ForestParams params;
    std::uint64_t seed = 0;
    std::vector<DecisionTree> trees;

    int features_per_split() const;

    friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

/// Grows every tree on its own bootstrap sample with a per-tree RNG substream,
/// so the forest is identical for any number of worker threads.
/// `threads` <= 0 uses the OpenMP default.
/// Throws TrainingError when the labels hold a single class.
ForestModel rf_train(const Matrix& x, std::span<const int> labels, const ForestParams& params,
                     std::uint64_t seed, int threads = 0);
ForestModel rf_train(const Dataset& ds, const ForestParams& params, std::uint64_t seed, int threads = 0);

/// Reference implementation: grows the trees one after another.
ForestModel rf_train_serial(const Matrix& x, std::span<const int> labels, const ForestParams& params,
                            std::uint64_t seed);

struct ForestVote {
    int label = 0;
    double prob = 0.0;   // fraction of trees voting 1
};

/// Majority vote over the trees; an exact tie predicts 0 (no handover).
ForestVote rf_predict(const ForestModel& model, std::span<const double> x);

} // namespace cogwifi::ml
