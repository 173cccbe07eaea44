#include "mgcast/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mgcast {

std::string to_string(Variant v) {
    switch (v) {
        case Variant::FvMgnet: return "fv-mgnet";
        case Variant::BackslashMgnet: return "backslash-mgnet";
        case Variant::Residual: return "residual";
    }
    return "?";
}

std::string to_string(OpChoice c) { return c == OpChoice::Fc ? "fc" : "conv"; }

Variant variant_from_string(const std::string& s) {
    if (s == "fv-mgnet" || s == "fv") return Variant::FvMgnet;
    if (s == "backslash-mgnet" || s == "backslash") return Variant::BackslashMgnet;
    if (s == "residual") return Variant::Residual;
    throw ConfigError("unknown model variant '" + s +
                      "' (expected fv-mgnet, backslash-mgnet, or residual)");
}

OpChoice op_choice_from_string(const std::string& s) {
    if (s == "fc") return OpChoice::Fc;
    if (s == "conv") return OpChoice::Conv;
    throw ConfigError("unknown operator choice '" + s + "' (expected fc or conv)");
}

void ModelConfig::validate() const {
    if (input_len < 1 || output_len < 1)
        throw ConfigError("input_len and output_len must be >= 1");
    if (grids < 1) throw ConfigError("grids must be >= 1");
    if (variant == Variant::Residual && grids != 1)
        throw ConfigError("residual variant requires grids == 1, got " + std::to_string(grids));
    if (smoothing_iters.size() != grids)
        throw ConfigError("smoothing_iters has length " + std::to_string(smoothing_iters.size()) +
                          " but grids == " + std::to_string(grids));
    for (std::size_t nu : smoothing_iters)
        if (nu < 1) throw ConfigError("every smoothing_iters entry must be >= 1");
    const std::size_t div = std::size_t{1} << (grids - 1);
    if (input_len % div != 0)
        throw ConfigError("input_len " + std::to_string(input_len) +
                          " is not divisible by 2^(grids-1) = " + std::to_string(div) +
                          "; level sizes I/2^(l-1) must be integral");
    if (conv_kernel < 1 || conv_kernel % 2 == 0)
        throw ConfigError("conv_kernel must be odd and >= 1, got " + std::to_string(conv_kernel));
}

std::size_t ModelConfig::level_len(std::size_t level) const {
    return input_len >> (level - 1);
}

std::size_t ModelConfig::head_input_len() const {
    return variant == Variant::BackslashMgnet ? level_len(grids) : input_len;
}

namespace {

OperatorHandle add_fc(ParamSet& set, Rng& rng, const std::string& name, std::size_t out_len,
                      std::size_t in_len) {
    Matrix w(out_len, in_len);
    fill_uniform_fan_in(w, rng);
    OperatorHandle h;
    h.conv = false;
    h.w = set.add(name + ".w", std::move(w));
    h.b = set.add(name + ".b", Matrix(out_len, 1));
    return h;
}

OperatorHandle add_op(ParamSet& set, Rng& rng, const std::string& name, OpChoice choice,
                      std::size_t len, std::size_t conv_kernel) {
    if (choice == OpChoice::Fc) return add_fc(set, rng, name, len, len);
    Matrix k(1, conv_kernel);
    fill_uniform_fan_in(k, rng);
    OperatorHandle h;
    h.conv = true;
    h.stride = 1;
    h.padding = static_cast<std::uint32_t>((conv_kernel - 1) / 2);
    h.w = set.add(name + ".k", std::move(k));
    h.b = set.add(name + ".b", Matrix(1, 1));
    return h;
}

}  // namespace

ModelParams make_params(const ModelConfig& cfg, const InitSpec& init) {
    cfg.validate();
    ModelParams p;
    p.cfg = cfg;
    Rng rng(init.seed);
    const std::size_t J = cfg.grids;

    p.embed = add_fc(p.set, rng, "w_embed", cfg.input_len, cfg.input_len);

    p.a.resize(J);
    p.b.resize(J);
    for (std::size_t l = 1; l <= J; ++l) {
        const std::size_t n = cfg.level_len(l);
        p.a[l - 1] = add_op(p.set, rng, "a" + std::to_string(l), cfg.op_a, n, cfg.conv_kernel);
        p.b[l - 1].resize(cfg.smoothing_iters[l - 1]);
        for (std::size_t i = 1; i <= cfg.smoothing_iters[l - 1]; ++i)
            p.b[l - 1][i - 1] = add_op(p.set, rng, "b" + std::to_string(l) + "_" + std::to_string(i),
                                       cfg.op_b, n, cfg.conv_kernel);
    }

    for (std::size_t l = 1; l + 1 <= J; ++l) {
        const std::size_t fine = cfg.level_len(l), coarse = cfg.level_len(l + 1);
        p.pi_down.push_back(add_fc(p.set, rng, "pi_down" + std::to_string(l), coarse, fine));
        p.r.push_back(add_fc(p.set, rng, "r" + std::to_string(l), coarse, fine));
    }

    if (cfg.variant == Variant::FvMgnet && J > 1) {
        p.pi_up.resize(J - 1);
        p.abar.resize(J - 1);
        p.bbar.resize(J - 1);
        for (std::size_t l = J - 1; l >= 1; --l) {
            const std::size_t fine = cfg.level_len(l), coarse = cfg.level_len(l + 1);
            p.pi_up[l - 1] = add_fc(p.set, rng, "pi_up" + std::to_string(l), fine, coarse);
            p.abar[l - 1] =
                add_op(p.set, rng, "abar" + std::to_string(l), cfg.op_a, fine, cfg.conv_kernel);
            p.bbar[l - 1].resize(cfg.smoothing_iters[l - 1]);
            for (std::size_t i = 1; i <= cfg.smoothing_iters[l - 1]; ++i)
                p.bbar[l - 1][i - 1] =
                    add_op(p.set, rng, "bbar" + std::to_string(l) + "_" + std::to_string(i),
                           cfg.op_b, fine, cfg.conv_kernel);
            if (l == 1) break;
        }
    }

    p.head1 = add_fc(p.set, rng, "w_head1", cfg.output_len, cfg.head_input_len());
    p.head2 = add_fc(p.set, rng, "w_head2", cfg.output_len, cfg.output_len);
    return p;
}

std::size_t param_count(const ModelConfig& cfg) {
    cfg.validate();
    const auto fc = [](std::size_t m, std::size_t n) { return m * n + m; };
    const std::size_t conv = cfg.conv_kernel + 1;
    const std::size_t J = cfg.grids;

    std::size_t total = fc(cfg.input_len, cfg.input_len);  // W
    for (std::size_t l = 1; l <= J; ++l) {
        const std::size_t n = cfg.level_len(l);
        total += cfg.op_a == OpChoice::Conv ? conv : fc(n, n);
        total += cfg.smoothing_iters[l - 1] * (cfg.op_b == OpChoice::Conv ? conv : fc(n, n));
    }
    for (std::size_t l = 1; l + 1 <= J; ++l)
        total += 2 * fc(cfg.level_len(l + 1), cfg.level_len(l));  // Pi + R
    if (cfg.variant == Variant::FvMgnet) {
        for (std::size_t l = 1; l + 1 <= J; ++l) {
            const std::size_t n = cfg.level_len(l);
            total += fc(n, cfg.level_len(l + 1));  // Pi up
            total += cfg.op_a == OpChoice::Conv ? conv : fc(n, n);
            total += cfg.smoothing_iters[l - 1] * (cfg.op_b == OpChoice::Conv ? conv : fc(n, n));
        }
    }
    total += fc(cfg.output_len, cfg.head_input_len());
    total += fc(cfg.output_len, cfg.output_len);
    return total;
}

int EvalEngine::affine(int w, int b, int x) {
    const Matrix& wm = params_->slots[w];
    const Matrix& bm = params_->slots[b];
    const Vector& xv = vals_[x];
    if (wm.cols != xv.size() || wm.rows != bm.rows || bm.cols != 1)
        throw DimensionError("affine: W is " + shape_str(wm) + ", b is " + shape_str(bm) +
                             ", x has length " + std::to_string(xv.size()));
    Vector y(wm.rows);
    matvec(wm, xv.data(), y.data());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += bm.data[i];
    return leaf(std::move(y));
}

int EvalEngine::add(int x, int y) {
    const Vector& a = vals_[x];
    const Vector& b = vals_[y];
    if (a.size() != b.size())
        throw DimensionError("add: lengths " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
    Vector r(a.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = a[i] + b[i];
    return leaf(std::move(r));
}

int EvalEngine::subtract(int x, int y) {
    const Vector& a = vals_[x];
    const Vector& b = vals_[y];
    if (a.size() != b.size())
        throw DimensionError("subtract: lengths " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
    Vector r(a.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = a[i] - b[i];
    return leaf(std::move(r));
}

int EvalEngine::conv1d(int w, int b, int x, std::uint32_t stride, std::uint32_t padding) {
    const Matrix& k = params_->slots[w];
    const Matrix& bm = params_->slots[b];
    if (k.rows != 1 || bm.rows != 1 || bm.cols != 1)
        throw DimensionError("conv1d: kernel must be 1 x k and bias scalar; got " + shape_str(k) +
                             " and " + shape_str(bm));
    Vector kv(k.data.begin(), k.data.end());
    return leaf(conv1d_apply(kv, bm.data[0], vals_[x], stride, padding));
}

template <class Engine>
int run_model(const ModelParams& p, Engine& eng, int f_slot, ForwardTrace* trace,
              bool stop_after_down) {
    const ModelConfig& cfg = p.cfg;
    const std::size_t J = cfg.grids;
    if (eng.value(f_slot).size() != cfg.input_len)
        throw DimensionError("forward: input has length " +
                             std::to_string(eng.value(f_slot).size()) + ", config expects " +
                             std::to_string(cfg.input_len));

    std::vector<int> f_of(J + 1, -1);   // f^l
    std::vector<int> u_of(J + 1, -1);   // u^l after down-phase smoothing
    std::vector<int> u0_of(J + 1, -1);  // u^{l,0} entering level l (l >= 2)

    f_of[1] = apply_operator(eng, p.embed, f_slot);
    int u = eng.zeros(cfg.input_len);

    for (std::size_t l = 1; l <= J; ++l) {
        for (std::size_t i = 0; i < cfg.smoothing_iters[l - 1]; ++i) {
            u = smooth_once(eng, p.a[l - 1], p.b[l - 1][i], u, f_of[l], cfg.double_activation);
            if (trace && l == 1) trace->u_level1_iters.push_back(eng.value(u));
        }
        u_of[l] = u;
        if (l < J) {
            const int u0 = apply_operator(eng, p.pi_down[l - 1], u);
            const int res = eng.subtract(f_of[l], apply_operator(eng, p.a[l - 1], u));
            f_of[l + 1] = eng.add(apply_operator(eng, p.r[l - 1], res),
                                  apply_operator(eng, p.a[l], u0));
            u0_of[l + 1] = u0;
            u = u0;
        }
    }

    if (trace) {
        for (std::size_t l = 1; l <= J; ++l) {
            trace->f_levels.push_back(eng.value(f_of[l]));
            trace->u_down.push_back(eng.value(u_of[l]));
        }
        for (std::size_t l = 2; l <= J; ++l) trace->u0_coarse.push_back(eng.value(u0_of[l]));
    }

    if (stop_after_down) return u;  // debug path for the phase-isolation check

    if (cfg.variant == Variant::FvMgnet && J > 1) {
        for (std::size_t l = J - 1; l >= 1; --l) {
            const int delta = eng.subtract(u, u0_of[l + 1]);
            u = eng.add(u_of[l], apply_operator(eng, p.pi_up[l - 1], delta));
            for (std::size_t i = 0; i < cfg.smoothing_iters[l - 1]; ++i)
                u = smooth_once(eng, p.abar[l - 1], p.bbar[l - 1][i], u, f_of[l],
                                cfg.double_activation);
            if (l == 1) break;
        }
    }

    const int hidden = eng.relu(apply_operator(eng, p.head1, u));
    return apply_operator(eng, p.head2, hidden);
}

template int run_model<Tape>(const ModelParams&, Tape&, int, ForwardTrace*, bool);
template int run_model<EvalEngine>(const ModelParams&, EvalEngine&, int, ForwardTrace*, bool);

Vector forward(const ModelParams& p, const Vector& f) {
    EvalEngine eng(p.set);
    const int out = run_model(p, eng, eng.leaf(f));
    return eng.value(out);
}

Vector forward_traced(const ModelParams& p, const Vector& f, ForwardTrace& trace,
                      bool stop_after_down) {
    EvalEngine eng(p.set);
    const int out = run_model(p, eng, eng.leaf(f), &trace, stop_after_down);
    return eng.value(out);
}

Recorded record_forward(const ModelParams& p, const Vector& f) {
    Recorded rec{Tape(p.set), -1, -1, {}};
    rec.input_slot = rec.tape.leaf(f);
    rec.output_slot = run_model(p, rec.tape, rec.input_slot);
    rec.y = rec.tape.value(rec.output_slot);
    return rec;
}

double min_abs_relu_input(const Tape& tape) {
    double best = std::numeric_limits<double>::infinity();
    for (const TapeOp& op : tape.ops()) {
        if (op.kind != OpKind::Relu) continue;
        for (double v : tape.value(op.x))
            best = std::min(best, std::fabs(v));
    }
    return best;
}

namespace {

// Wraps loose matrices as a ParamSet so the standalone steps run the same
// engine code as the full model.
struct LooseOps {
    ParamSet set;
    OperatorHandle wrap(const Matrix& w, const Vector& b, const std::string& name) {
        OperatorHandle h;
        h.w = set.add(name + ".w", w);
        Matrix bm(b.size(), 1);
        bm.data = b;
        h.b = set.add(name + ".b", std::move(bm));
        return h;
    }
};

}  // namespace

Vector smooth_step(const Vector& u, const Vector& f, const Matrix& a_w, const Vector& a_b,
                   const Matrix& b_w, const Vector& b_b, bool double_activation) {
    LooseOps ops;
    const OperatorHandle a = ops.wrap(a_w, a_b, "a");
    const OperatorHandle b = ops.wrap(b_w, b_b, "b");
    EvalEngine eng(ops.set);
    const int out = smooth_once(eng, a, b, eng.leaf(u), eng.leaf(f), double_activation);
    return eng.value(out);
}

std::pair<Vector, Vector> restrict_level(const Vector& u, const Vector& f, const Matrix& pi_w,
                                         const Vector& pi_b, const Matrix& r_w, const Vector& r_b,
                                         const Matrix& a_w, const Vector& a_b,
                                         const Matrix& a_next_w, const Vector& a_next_b) {
    LooseOps ops;
    const OperatorHandle pi = ops.wrap(pi_w, pi_b, "pi");
    const OperatorHandle r = ops.wrap(r_w, r_b, "r");
    const OperatorHandle a = ops.wrap(a_w, a_b, "a");
    const OperatorHandle a_next = ops.wrap(a_next_w, a_next_b, "a_next");
    EvalEngine eng(ops.set);
    const int u_slot = eng.leaf(u), f_slot = eng.leaf(f);
    const int u0 = apply_operator(eng, pi, u_slot);
    const int res = eng.subtract(f_slot, apply_operator(eng, a, u_slot));
    const int f_next =
        eng.add(apply_operator(eng, r, res), apply_operator(eng, a_next, u0));
    return {eng.value(u0), eng.value(f_next)};
}

Vector prolongate(const Vector& u_saved, const Vector& u_coarse_final, const Vector& u_coarse0,
                  const Matrix& pi_up_w, const Vector& pi_up_b) {
    LooseOps ops;
    const OperatorHandle pi = ops.wrap(pi_up_w, pi_up_b, "pi_up");
    EvalEngine eng(ops.set);
    const int delta = eng.subtract(eng.leaf(u_coarse_final), eng.leaf(u_coarse0));
    const int out = eng.add(eng.leaf(u_saved), apply_operator(eng, pi, delta));
    return eng.value(out);
}

}  // namespace mgcast
