// Test-only gradient oracle: central finite differences over every
// parameter scalar, evaluated through the plain (non-recording) forward so
// it stays independent of the tape reverse pass it checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "mgcast/model.hpp"

namespace mgcast::testing {

inline bool close(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

inline double rel_err(double a, double b) {
    const double scale = std::max({std::fabs(a), std::fabs(b)});
    if (scale < 1e-10) return 0.0;  // both below double-precision FD resolution
    return std::fabs(a - b) / std::max(scale, 1e-6);
}

struct FdReport {
    double max_rel = 0.0;
    std::string worst_slot;
    double worst_analytic = 0.0;
    double worst_fd = 0.0;
    double min_relu_margin = 0.0;
};

// Gradients of L = sum(y) checked against (L(th+h) - L(th-h)) / 2h.
inline FdReport fd_check(ModelParams& p, const Vector& x, double h = 1e-5) {
    const auto loss = [&p, &x] {
        double s = 0.0;
        for (double v : forward(p, x)) s += v;
        return s;
    };

    Recorded rec = record_forward(p, x);
    Grads grads = zero_grads_like(p.set);
    rec.tape.backward(rec.output_slot, Vector(rec.y.size(), 1.0), grads);

    FdReport rep;
    rep.min_relu_margin = min_abs_relu_input(rec.tape);
    for (std::size_t s = 0; s < p.set.slots.size(); ++s) {
        for (std::size_t i = 0; i < p.set.slots[s].data.size(); ++i) {
            double& th = p.set.slots[s].data[i];
            const double orig = th;
            th = orig + h;
            const double lp = loss();
            th = orig - h;
            const double lm = loss();
            th = orig;
            const double fd = (lp - lm) / (2.0 * h);
            const double analytic = grads[s].data[i];
            const double e = rel_err(analytic, fd);
            if (e > rep.max_rel) {
                rep.max_rel = e;
                rep.worst_slot = p.set.names[s] + "[" + std::to_string(i) + "]";
                rep.worst_analytic = analytic;
                rep.worst_fd = fd;
            }
        }
    }
    return rep;
}

inline Vector random_input(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Vector x(n);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    return x;
}

// Finds (params seed, input) whose forward keeps every activation input at
// least `margin` away from the ReLU kink, so finite differences at step h
// cannot cross it.
struct MarginCase {
    ModelParams params;
    Vector input;
    std::uint64_t seed = 0;
};

inline std::optional<MarginCase> find_margin_case(const ModelConfig& cfg, double margin,
                                                  std::uint64_t first_seed = 1,
                                                  int tries = 200) {
    for (int t = 0; t < tries; ++t) {
        const std::uint64_t seed = first_seed + static_cast<std::uint64_t>(t);
        ModelParams p = make_params(cfg, InitSpec{InitSpec::Scheme::UniformFanIn, seed});
        Vector x = random_input(cfg.input_len, seed * 7919 + 13);
        Recorded rec = record_forward(p, x);
        if (min_abs_relu_input(rec.tape) > margin)
            return MarginCase{std::move(p), std::move(x), seed};
    }
    return std::nullopt;
}

}  // namespace mgcast::testing
