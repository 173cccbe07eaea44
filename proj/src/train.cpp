#include "mgcast/train.hpp"

#include <cmath>

namespace mgcast {

double mse(const Vector& y, const Vector& yhat) {
    if (y.size() != yhat.size() || y.empty())
        throw DimensionError("mse: lengths " + std::to_string(y.size()) + " vs " +
                             std::to_string(yhat.size()));
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - yhat[i];
        s += d * d;
    }
    return s / static_cast<double>(y.size());
}

double mae(const Vector& y, const Vector& yhat) {
    if (y.size() != yhat.size() || y.empty())
        throw DimensionError("mae: lengths " + std::to_string(y.size()) + " vs " +
                             std::to_string(yhat.size()));
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += std::fabs(y[i] - yhat[i]);
    return s / static_cast<double>(y.size());
}

void TrainConfig::validate() const {
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (patience < 1) throw ConfigError("patience must be >= 1");
    if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
    if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
    if (clip_norm < 0.0) throw ConfigError("clip_norm must be >= 0 (0 disables)");
}

AdamState make_adam_state(const ParamSet& params) {
    return AdamState{zero_grads_like(params), zero_grads_like(params), 0};
}

void adam_step(ParamSet& params, const Grads& grads, AdamState& state, const TrainConfig& cfg) {
    if (grads.size() != params.slots.size() || state.m.size() != params.slots.size())
        throw InternalError("adam_step: gradient/state slots do not match parameters");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t s = 0; s < params.slots.size(); ++s) {
        double* p = params.slots[s].data.data();
        const double* g = grads[s].data.data();
        double* m = state.m[s].data.data();
        double* v = state.v[s].data.data();
        const std::size_t n = params.slots[s].data.size();
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.eps_opt);
        }
    }
}

void clip_global_norm(Grads& grads, double clip_norm) {
    if (clip_norm <= 0.0) return;
    double sq = 0.0;
    for (const Matrix& g : grads)
        for (double x : g.data) sq += x * x;
    const double norm = std::sqrt(sq);
    if (norm <= clip_norm) return;
    const double scale = clip_norm / norm;
    for (Matrix& g : grads)
        for (double& x : g.data) x *= scale;
}

}  // namespace mgcast
