#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cogwifi/ml/common.hpp"

namespace cogwifi::ml {

struct SvrParams {
    double C = 1.0;
    double epsilon = 0.1;       // tube half-width on z-scored targets
    double gamma = 0.0;         // RBF width; <= 0 means 1 / n_features
    double tol = 1e-3;          // KKT violation at which SMO stops
    long max_iter = 10'000'000;
    double train_frac = 0.7;
};

/// epsilon-insensitive RBF support vector regressor on z-scored data:
///   f(x) = sum_i coef_i K(sv_i, x) + bias,  K(a, b) = exp(-gamma |a - b|^2)
struct SvrModel {
    Matrix support;                 // z-scored support vectors
    std::vector<double> coef;       // alpha_i - alpha_i*, |coef| <= C
    double bias = 0.0;
    double gamma = 0.0;
    double epsilon = 0.0;
    double C = 0.0;
    Normalizer x_norm;
    TargetScaler y_scale;
    long iterations = 0;
    double kkt_violation = 0.0;

    friend bool operator==(const SvrModel&, const SvrModel&) = default;
};

double rbf(std::span<const double> a, std::span<const double> b, double gamma);

/// Gram matrix of the rows (row-major n x n), computed in parallel.
std::vector<double> kernel_matrix(const Matrix& xz, double gamma);
std::vector<double> kernel_matrix_serial(const Matrix& xz, double gamma);

/// SMO on the dual with maximal-violating-pair working sets. Throws
/// TrainingError (with the final violation) when max_iter is exhausted.
SvrModel svr_fit(const Matrix& x, std::span<const double> y, const SvrParams& params);

struct SvrFit {
    SvrModel model;
    RegressionReport report;
};

SvrFit svr_train(const Dataset& ds, const SvrParams& params, std::uint64_t seed);

double svr_predict_z(const SvrModel& m, std::span<const double> xz);
double svr_predict(const SvrModel& m, std::span<const double> x);

RegressionReport evaluate(const SvrModel& m, const Dataset& test);

} // namespace cogwifi::ml
