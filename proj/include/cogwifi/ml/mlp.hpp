#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cogwifi/ml/common.hpp"

namespace cogwifi::ml {

struct MlpParams {
    std::vector<int> hidden{64, 64};
    int epochs = 200;
    double learning_rate = 1e-3;
    int batch = 32;
    double train_frac = 0.7;
};

/// Fully connected regressor: softplus hidden layers, linear scalar output.
/// Inputs and target are z-scored with statistics stored in the model.
struct MlpModel {
    std::vector<int> layers;                      // input, hidden..., 1
    std::vector<std::vector<double>> weights;     // per layer, row-major [out][in]
    std::vector<std::vector<double>> biases;
    Normalizer x_norm;
    TargetScaler y_scale;

    std::size_t n_features() const { return static_cast<std::size_t>(layers.front()); }

    friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

struct MlpGradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

/// Fresh network: Glorot-uniform weights from `seed`, zero biases.
MlpModel mlp_init(std::size_t n_features, const std::vector<int>& hidden, std::uint64_t seed);

/// Mean of 0.5 * (prediction - target)^2 over the rows (both already in z units),
/// with its exact gradient by backpropagation.
double mlp_loss_and_gradient(const MlpModel& m, const Matrix& xz, std::span<const double> yz, MlpGradients& grad);

/// Forward pass on a z-scored input row; returns the z-scored output.
double mlp_forward_z(const MlpModel& m, std::span<const double> xz);

/// Trains on the given rows only (normalisation fitted on them).
/// Throws TrainingError if the loss becomes non-finite.
MlpModel mlp_fit(const Matrix& x, std::span<const double> y, const MlpParams& params, std::uint64_t seed);

struct MlpFit {
    MlpModel model;
    RegressionReport report;
};

/// 70-30 split, fit on the 70 %, report on the 30 %.
MlpFit mlp_train(const Dataset& ds, const MlpParams& params, std::uint64_t seed);

/// Prediction in physical units (Mbps for throughput datasets).
double mlp_predict(const MlpModel& m, std::span<const double> x);

RegressionReport evaluate(const MlpModel& m, const Dataset& test);

} // namespace cogwifi::ml
