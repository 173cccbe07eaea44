// The three forward architectures (full V-cycle, down-phase-only, single
// grid residual) built from the numerics primitives. One grid hierarchy:
// level len I_l = I / 2^(l-1), l = 1..J. A^l is shared between smoothing on
// level l and the restriction that produces f^(l+1); the up-phase smoothers
// (Abar, Bbar) are distinct parameters. The head is y = W2 sigma(W1 u).
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mgcast/matrix.hpp"
#include "mgcast/tape.hpp"

namespace mgcast {

enum class Variant : std::uint8_t { FvMgnet, BackslashMgnet, Residual };
enum class OpChoice : std::uint8_t { Fc, Conv };

std::string to_string(Variant v);
std::string to_string(OpChoice c);
Variant variant_from_string(const std::string& s);    // throws ConfigError
OpChoice op_choice_from_string(const std::string& s); // throws ConfigError

struct ModelConfig {
    Variant variant = Variant::FvMgnet;
    std::size_t input_len = 96;   // I
    std::size_t output_len = 96;  // O
    std::size_t grids = 3;        // J
    std::vector<std::size_t> smoothing_iters;  // nu_l, length J
    OpChoice op_a = OpChoice::Fc;
    OpChoice op_b = OpChoice::Fc;
    // Smoothing conv uses kernel size k, stride 1, padding (k-1)/2 so it
    // preserves length like the fc operators; k must be odd.
    std::size_t conv_kernel = 3;
    // Algorithm-box form is u + sigma(B(f - Au)); the double-activation flag
    // switches to u + sigma(B sigma(f - Au)).
    bool double_activation = false;

    void validate() const;  // throws ConfigError with the offending numbers
    std::size_t level_len(std::size_t level) const;  // I_l, level is 1-based
    std::size_t head_input_len() const;              // I, or I_J for backslash
};

// Reference to one learnable operator inside a ParamSet: either an affine
// map (w: m x n, b: m x 1) or a conv (w: 1 x k kernel, b: 1 x 1).
struct OperatorHandle {
    bool conv = false;
    int w = -1;
    int b = -1;
    std::uint32_t stride = 1;
    std::uint32_t padding = 0;
};

struct ModelParams {
    ModelConfig cfg;
    ParamSet set;

    OperatorHandle embed;                          // W, f1 = W f
    std::vector<OperatorHandle> a;                 // A^l, l = 1..J
    std::vector<std::vector<OperatorHandle>> b;    // B^{l,i}
    std::vector<OperatorHandle> pi_down;           // Pi_l^{l+1}, l = 1..J-1
    std::vector<OperatorHandle> r;                 // R_l^{l+1}
    std::vector<OperatorHandle> pi_up;             // Pi_{l+1}^l (fv only)
    std::vector<OperatorHandle> abar;              // Abar^l (fv only)
    std::vector<std::vector<OperatorHandle>> bbar; // Bbar^{l,i} (fv only)
    OperatorHandle head1, head2;                   // W1, W2
};

// Builds and initializes the full parameter set. Parameters are registered
// and initialized in a fixed declaration order (embedding, down-phase per
// level, restriction pairs, up-phase per level from J-1 to 1, head), all
// weights drawn from one seeded stream, biases zero.
ModelParams make_params(const ModelConfig& cfg, const InitSpec& init);

// Analytic count of learnable scalars; matches ParamSet::scalar_count of
// make_params by construction and by test.
std::size_t param_count(const ModelConfig& cfg);

// Optional capture of down-phase state for invariant checks.
struct ForwardTrace {
    std::vector<Vector> f_levels;        // f^l, l = 1..J
    std::vector<Vector> u_down;          // u^l after down-phase smoothing
    std::vector<Vector> u0_coarse;       // u^{l,0} entering level l, l = 2..J
    std::vector<Vector> u_level1_iters;  // u^{1,i} during the first-level down phase
};

// Plain (non-recording) evaluation engine with the same slot interface as
// Tape, so the model algorithm is written once.
class EvalEngine {
  public:
    explicit EvalEngine(const ParamSet& params) : params_(&params) {}

    int leaf(Vector v) {
        vals_.push_back(std::move(v));
        return static_cast<int>(vals_.size()) - 1;
    }
    int zeros(std::size_t n) { return leaf(Vector(n, 0.0)); }
    int affine(int w, int b, int x);
    int relu(int x) { return leaf(mgcast::relu(vals_[x])); }
    int add(int x, int y);
    int subtract(int x, int y);
    int conv1d(int w, int b, int x, std::uint32_t stride, std::uint32_t padding);
    const Vector& value(int slot) const { return vals_[slot]; }

  private:
    const ParamSet* params_;
    std::vector<Vector> vals_;
};

template <class Engine>
int apply_operator(Engine& eng, const OperatorHandle& op, int x) {
    return op.conv ? eng.conv1d(op.w, op.b, x, op.stride, op.padding)
                   : eng.affine(op.w, op.b, x);
}

// One smoothing update u + sigma(B(f - A u)) (or the double-activation
// form), on whatever engine is supplied.
template <class Engine>
int smooth_once(Engine& eng, const OperatorHandle& a, const OperatorHandle& b, int u, int f,
                bool double_activation) {
    int res = eng.subtract(f, apply_operator(eng, a, u));
    if (double_activation) res = eng.relu(res);
    return eng.add(u, eng.relu(apply_operator(eng, b, res)));
}

// Runs the configured architecture on an engine; returns the output slot.
// stop_after_down skips the up phase (used by the phase-isolation check).
template <class Engine>
int run_model(const ModelParams& p, Engine& eng, int f_slot, ForwardTrace* trace = nullptr,
              bool stop_after_down = false);

// y for one input window; f.size() must equal cfg.input_len.
Vector forward(const ModelParams& p, const Vector& f);
Vector forward_traced(const ModelParams& p, const Vector& f, ForwardTrace& trace,
                      bool stop_after_down = false);

struct Recorded {
    Tape tape;
    int input_slot = -1;
    int output_slot = -1;
    Vector y;
};
Recorded record_forward(const ModelParams& p, const Vector& f);

// Smallest |x| over every activation input recorded on a tape (the margin
// the gradient checks need away from the ReLU kink).
double min_abs_relu_input(const Tape& tape);

// Standalone single steps, exercised directly by the hand-computed oracles.
// These run exactly the engine code paths the full model uses.
Vector smooth_step(const Vector& u, const Vector& f, const Matrix& a_w, const Vector& a_b,
                   const Matrix& b_w, const Vector& b_b, bool double_activation = false);
// Returns (u^{l+1,0}, f^{l+1}) given level-l state and the three operators.
std::pair<Vector, Vector> restrict_level(const Vector& u, const Vector& f, const Matrix& pi_w,
                                         const Vector& pi_b, const Matrix& r_w, const Vector& r_b,
                                         const Matrix& a_w, const Vector& a_b,
                                         const Matrix& a_next_w, const Vector& a_next_b);
Vector prolongate(const Vector& u_saved, const Vector& u_coarse_final, const Vector& u_coarse0,
                  const Matrix& pi_up_w, const Vector& pi_up_b);

}  // namespace mgcast
