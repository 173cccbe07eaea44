// Loss metrics, the Adam update, and the per-run training records shared by
// the trainer, checkpoints, and the CLI.
#pragma once

#include <cstdint>
#include <vector>

#include "mgcast/tape.hpp"

namespace mgcast {

// Exactly (1/H) sum (y - yhat)^2 and (1/H) sum |y - yhat|.
double mse(const Vector& y, const Vector& yhat);
double mae(const Vector& y, const Vector& yhat);

struct TrainConfig {
    std::size_t batch_size = 16;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_opt = 1e-8;
    std::size_t max_epochs = 100;
    std::size_t patience = 10;
    std::uint64_t seed = 1;
    // gradient clipping at this global norm; 0 switches it off
    double clip_norm = 5.0;

    void validate() const;
};

struct AdamState {
    Grads m;
    Grads v;
    std::uint64_t t = 0;
};

AdamState make_adam_state(const ParamSet& params);

// Bias-corrected adaptive moment update; grads must be keyed identically to
// params (same slot order and shapes).
void adam_step(ParamSet& params, const Grads& grads, AdamState& state, const TrainConfig& cfg);

// Scales grads to global norm clip_norm when they exceed it; no-op otherwise.
void clip_global_norm(Grads& grads, double clip_norm);

struct TrainHistory {
    std::vector<double> train_loss;  // per epoch, standardized scale
    std::vector<double> val_mse;
    std::size_t best_epoch = 0;  // index into the vectors above
};

struct EvalResult {
    double mse = 0.0;
    double mae = 0.0;
    std::size_t n_windows = 0;
};

}  // namespace mgcast
