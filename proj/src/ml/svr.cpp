#include "cogwifi/ml/svr.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "cogwifi/error.hpp"
#include "cogwifi/ml/metrics.hpp"

namespace cogwifi::ml {

double rbf(std::span<const double> a, std::span<const double> b, double gamma) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

std::vector<double> kernel_matrix(const Matrix& xz, double gamma) {
    const auto n = static_cast<long>(xz.size());
    std::vector<double> k(static_cast<std::size_t>(n * n));
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < n; ++i) {
        for (long j = i; j < n; ++j) {
            const double v = rbf(xz[i], xz[j], gamma);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    return k;
}

std::vector<double> kernel_matrix_serial(const Matrix& xz, double gamma) {
    const std::size_t n = xz.size();
    std::vector<double> k(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) k[i * n + j] = rbf(xz[i], xz[j], gamma);
    return k;
}

SvrModel svr_fit(const Matrix& x, std::span<const double> y, const SvrParams& params) {
    if (x.empty() || x.size() != y.size()) throw ValidationError("svr: empty or mismatched training data");
    if (!(params.C > 0.0)) throw ValidationError("svr: C must be positive");
    if (!(params.epsilon >= 0.0)) throw ValidationError("svr: epsilon must be >= 0");
    if (!(params.tol > 0.0)) throw ValidationError("svr: tol must be positive");

    SvrModel m;
    m.C = params.C;
    m.epsilon = params.epsilon;
    m.gamma = params.gamma > 0.0 ? params.gamma : 1.0 / static_cast<double>(x.front().size());
    m.x_norm = Normalizer::fit(x);
    m.y_scale = TargetScaler::fit(y);
    const Matrix xz = m.x_norm.apply(x);
    const std::size_t n = xz.size();
    const auto K = kernel_matrix(xz, m.gamma);

    // Variables 0..n-1 carry alpha (sign +1), n..2n-1 carry alpha* (sign -1).
    const std::size_t n2 = 2 * n;
    std::vector<double> alpha(n2, 0.0), grad(n2);
    std::vector<int> sign(n2);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = m.y_scale.to_z(y[i]);
        sign[i] = 1;
        sign[i + n] = -1;
        grad[i] = params.epsilon - z;
        grad[i + n] = params.epsilon + z;
    }
    const double C = params.C;
    auto in_up = [&](std::size_t t) { return sign[t] > 0 ? alpha[t] < C : alpha[t] > 0.0; };
    auto in_low = [&](std::size_t t) { return sign[t] > 0 ? alpha[t] > 0.0 : alpha[t] < C; };

    long iter = 0;
    double gap = 0.0;
    for (;; ++iter) {
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        std::size_t i = 0, j = 0;
        for (std::size_t t = 0; t < n2; ++t) {
            const double v = -sign[t] * grad[t];
            if (in_up(t) && v > gmax) {
                gmax = v;
                i = t;
            }
            if (in_low(t) && v < gmin) {
                gmin = v;
                j = t;
            }
        }
        gap = gmax - gmin;
        if (gap < params.tol) break;
        if (iter >= params.max_iter)
            throw TrainingError("svr: no convergence after " + std::to_string(iter)
                                + " iterations (KKT violation " + std::to_string(gap) + ")");

        const std::size_t bi = i % n, bj = j % n;
        double curv = K[bi * n + bi] + K[bj * n + bj] - 2.0 * K[bi * n + bj];
        if (curv <= 1e-12) curv = 1e-12;
        double step = gap / curv;
        step = std::min(step, sign[i] > 0 ? C - alpha[i] : alpha[i]);
        step = std::min(step, sign[j] > 0 ? alpha[j] : C - alpha[j]);
        alpha[i] += sign[i] * step;
        alpha[j] -= sign[j] * step;
        // Snap to the box so bound membership is exact.
        for (std::size_t t : {i, j}) {
            if (alpha[t] < 1e-15 * C) alpha[t] = 0.0;
            if (alpha[t] > C * (1.0 - 1e-15)) alpha[t] = C;
        }
        const double* ki = &K[bi * n];
        const double* kj = &K[bj * n];
        for (std::size_t t = 0; t < n2; ++t) {
            const std::size_t bt = t % n;
            grad[t] += sign[t] * step * (ki[bt] - kj[bt]);
        }
    }

    // Bias: mean of -sign*grad over free variables, else midpoint of the bounds.
    double sum = 0.0, ub = std::numeric_limits<double>::infinity(), lb = -ub;
    long free = 0;
    for (std::size_t t = 0; t < n2; ++t) {
        const double v = sign[t] * grad[t];
        if (alpha[t] > 0.0 && alpha[t] < C) {
            sum += v;
            ++free;
        } else if ((sign[t] > 0) == (alpha[t] >= C)) {
            lb = std::max(lb, v);
        } else {
            ub = std::min(ub, v);
        }
    }
    const double rho = free > 0 ? sum / static_cast<double>(free) : 0.5 * (ub + lb);
    m.bias = -rho;

    for (std::size_t i = 0; i < n; ++i) {
        const double c = alpha[i] - alpha[i + n];
        if (c != 0.0) {
            m.support.push_back(xz[i]);
            m.coef.push_back(c);
        }
    }
    m.iterations = iter;
    m.kkt_violation = gap;
    return m;
}

double svr_predict_z(const SvrModel& m, std::span<const double> xz) {
    double f = m.bias;
    for (std::size_t i = 0; i < m.support.size(); ++i) f += m.coef[i] * rbf(m.support[i], xz, m.gamma);
    return f;
}

double svr_predict(const SvrModel& m, std::span<const double> x) {
    if (x.size() != m.x_norm.mean.size()) throw ValidationError("svr_predict: feature count mismatch");
    for (double v : x)
        if (!std::isfinite(v)) throw ValidationError("svr_predict: non-finite feature");
    return m.y_scale.from_z(svr_predict_z(m, m.x_norm.apply(x)));
}

RegressionReport evaluate(const SvrModel& m, const Dataset& test) {
    RegressionReport r;
    r.n_test = test.size();
    std::vector<double> pz, tz;
    for (std::size_t i = 0; i < test.size(); ++i) {
        pz.push_back(m.y_scale.to_z(svr_predict(m, test.x[i])));
        tz.push_back(m.y_scale.to_z(test.y[i]));
    }
    r.mse = mse(pz, tz);
    r.r_squared = r_squared(pz, tz);
    return r;
}

SvrFit svr_train(const Dataset& ds, const SvrParams& params, std::uint64_t seed) {
    if (ds.size() < 50) throw ValidationError("svr_train: need >= 50 rows, got " + std::to_string(ds.size()));
    const auto split = train_test_split(ds.size(), params.train_frac, seed);
    const auto train = subset(ds, split.train);
    const auto test = subset(ds, split.test);
    const auto t0 = std::chrono::steady_clock::now();
    SvrFit fit{svr_fit(train.x, train.y, params), {}};
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fit.report = evaluate(fit.model, test);
    fit.report.training_time_s = secs;
    fit.report.n_train = train.size();
    return fit;
}

} // namespace cogwifi::ml
