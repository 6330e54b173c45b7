#include "cogwifi/ml/mlp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "cogwifi/error.hpp"
#include "cogwifi/ml/metrics.hpp"
#include "cogwifi/rng.hpp"

namespace cogwifi::ml {

namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }
double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

std::size_t n_layers(const MlpModel& m) { return m.weights.size(); }

// Pre-activations and activations of every layer for one input row.
struct Trace {
    std::vector<std::vector<double>> z;
    std::vector<std::vector<double>> a;   // a[0] is the input
};

void forward(const MlpModel& m, std::span<const double> xz, Trace& tr) {
    const std::size_t L = n_layers(m);
    tr.a.resize(L + 1);
    tr.z.resize(L);
    tr.a[0].assign(xz.begin(), xz.end());
    for (std::size_t l = 0; l < L; ++l) {
        const std::size_t in = static_cast<std::size_t>(m.layers[l]);
        const std::size_t out = static_cast<std::size_t>(m.layers[l + 1]);
        auto& z = tr.z[l];
        z.assign(out, 0.0);
        const auto& W = m.weights[l];
        const auto& prev = tr.a[l];
        for (std::size_t o = 0; o < out; ++o) {
            double s = m.biases[l][o];
            const double* w = &W[o * in];
            for (std::size_t i = 0; i < in; ++i) s += w[i] * prev[i];
            z[o] = s;
        }
        auto& a = tr.a[l + 1];
        a.resize(out);
        const bool hidden = l + 1 < L;
        for (std::size_t o = 0; o < out; ++o) a[o] = hidden ? softplus(z[o]) : z[o];
    }
}

void zero_like(const MlpModel& m, MlpGradients& g) {
    g.weights.resize(m.weights.size());
    g.biases.resize(m.biases.size());
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        g.weights[l].assign(m.weights[l].size(), 0.0);
        g.biases[l].assign(m.biases[l].size(), 0.0);
    }
}

// Accumulates d(0.5 * scale * err^2)/dtheta for one row into g.
void backward(const MlpModel& m, const Trace& tr, double err, double scale, MlpGradients& g) {
    const std::size_t L = n_layers(m);
    std::vector<double> delta{err * scale};
    for (std::size_t l = L; l-- > 0;) {
        const std::size_t in = static_cast<std::size_t>(m.layers[l]);
        const std::size_t out = static_cast<std::size_t>(m.layers[l + 1]);
        const auto& prev = tr.a[l];
        auto& gW = g.weights[l];
        for (std::size_t o = 0; o < out; ++o) {
            g.biases[l][o] += delta[o];
            double* gw = &gW[o * in];
            for (std::size_t i = 0; i < in; ++i) gw[i] += delta[o] * prev[i];
        }
        if (l == 0) break;
        std::vector<double> next(in, 0.0);
        const auto& W = m.weights[l];
        for (std::size_t o = 0; o < out; ++o) {
            const double* w = &W[o * in];
            for (std::size_t i = 0; i < in; ++i) next[i] += w[i] * delta[o];
        }
        for (std::size_t i = 0; i < in; ++i) next[i] *= sigmoid(tr.z[l - 1][i]);
        delta = std::move(next);
    }
}

} // namespace

MlpModel mlp_init(std::size_t n_features, const std::vector<int>& hidden, std::uint64_t seed) {
    if (n_features == 0) throw ValidationError("mlp: no input features");
    MlpModel m;
    m.layers.push_back(static_cast<int>(n_features));
    for (int h : hidden) {
        if (h < 1) throw ValidationError("mlp: hidden layer sizes must be >= 1");
        m.layers.push_back(h);
    }
    m.layers.push_back(1);
    auto eng = rng::make_engine(seed, "mlp-init");
    for (std::size_t l = 0; l + 1 < m.layers.size(); ++l) {
        const auto in = static_cast<std::size_t>(m.layers[l]);
        const auto out = static_cast<std::size_t>(m.layers[l + 1]);
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        std::uniform_real_distribution<double> u(-limit, limit);
        std::vector<double> W(in * out);
        for (auto& w : W) w = u(eng);
        m.weights.push_back(std::move(W));
        m.biases.emplace_back(out, 0.0);
    }
    m.x_norm.mean.assign(n_features, 0.0);
    m.x_norm.scale.assign(n_features, 1.0);
    return m;
}

double mlp_forward_z(const MlpModel& m, std::span<const double> xz) {
    Trace tr;
    forward(m, xz, tr);
    return tr.a.back()[0];
}

double mlp_loss_and_gradient(const MlpModel& m, const Matrix& xz, std::span<const double> yz, MlpGradients& grad) {
    zero_like(m, grad);
    if (xz.empty()) return 0.0;
    const double scale = 1.0 / static_cast<double>(xz.size());
    double loss = 0.0;
    Trace tr;
    for (std::size_t i = 0; i < xz.size(); ++i) {
        forward(m, xz[i], tr);
        const double err = tr.a.back()[0] - yz[i];
        loss += 0.5 * err * err * scale;
        backward(m, tr, err, scale, grad);
    }
    return loss;
}

MlpModel mlp_fit(const Matrix& x, std::span<const double> y, const MlpParams& params, std::uint64_t seed) {
    if (x.empty() || x.size() != y.size()) throw ValidationError("mlp: empty or mismatched training data");
    if (params.batch < 1) throw ValidationError("mlp: batch must be >= 1");
    if (params.epochs < 0) throw ValidationError("mlp: epochs must be >= 0");
    auto m = mlp_init(x.front().size(), params.hidden, seed);
    m.x_norm = Normalizer::fit(x);
    m.y_scale = TargetScaler::fit(y);
    const Matrix xz = m.x_norm.apply(x);
    std::vector<double> yz(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) yz[i] = m.y_scale.to_z(y[i]);

    // Adam state
    constexpr double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    MlpGradients g, mom, vel;
    zero_like(m, mom);
    zero_like(m, vel);
    long step = 0;

    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    auto eng = rng::make_engine(seed, "mlp-shuffle");
    const auto batch = static_cast<std::size_t>(params.batch);
    Trace tr;
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), eng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t end = std::min(order.size(), start + batch);
            zero_like(m, g);
            const double scale = 1.0 / static_cast<double>(end - start);
            for (std::size_t k = start; k < end; ++k) {
                forward(m, xz[order[k]], tr);
                const double err = tr.a.back()[0] - yz[order[k]];
                epoch_loss += 0.5 * err * err;
                backward(m, tr, err, scale, g);
            }
            ++step;
            const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            auto update = [&](std::vector<double>& p, const std::vector<double>& gp, std::vector<double>& mp,
                              std::vector<double>& vp) {
                for (std::size_t i = 0; i < p.size(); ++i) {
                    mp[i] = beta1 * mp[i] + (1.0 - beta1) * gp[i];
                    vp[i] = beta2 * vp[i] + (1.0 - beta2) * gp[i] * gp[i];
                    p[i] -= params.learning_rate * (mp[i] / c1) / (std::sqrt(vp[i] / c2) + adam_eps);
                }
            };
            for (std::size_t l = 0; l < m.weights.size(); ++l) {
                update(m.weights[l], g.weights[l], mom.weights[l], vel.weights[l]);
                update(m.biases[l], g.biases[l], mom.biases[l], vel.biases[l]);
            }
        }
        if (!std::isfinite(epoch_loss))
            throw TrainingError("mlp: training diverged (non-finite loss) at epoch " + std::to_string(epoch));
    }
    return m;
}

double mlp_predict(const MlpModel& m, std::span<const double> x) {
    for (double v : x)
        if (!std::isfinite(v)) throw ValidationError("mlp_predict: non-finite feature");
    const auto xz = m.x_norm.apply(x);
    return m.y_scale.from_z(mlp_forward_z(m, xz));
}

RegressionReport evaluate(const MlpModel& m, const Dataset& test) {
    RegressionReport r;
    r.n_test = test.size();
    std::vector<double> pz, tz;
    for (std::size_t i = 0; i < test.size(); ++i) {
        pz.push_back(m.y_scale.to_z(mlp_predict(m, test.x[i])));
        tz.push_back(m.y_scale.to_z(test.y[i]));
    }
    r.mse = mse(pz, tz);
    r.r_squared = r_squared(pz, tz);
    return r;
}

MlpFit mlp_train(const Dataset& ds, const MlpParams& params, std::uint64_t seed) {
    if (ds.size() < 50) throw ValidationError("mlp_train: need >= 50 rows, got " + std::to_string(ds.size()));
    const auto split = train_test_split(ds.size(), params.train_frac, seed);
    const auto train = subset(ds, split.train);
    const auto test = subset(ds, split.test);
    const auto t0 = std::chrono::steady_clock::now();
    MlpFit fit{mlp_fit(train.x, train.y, params, seed), {}};
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fit.report = evaluate(fit.model, test);
    fit.report.training_time_s = secs;
    fit.report.n_train = train.size();
    return fit;
}

} // namespace cogwifi::ml
