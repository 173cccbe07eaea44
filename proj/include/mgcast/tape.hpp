// Recorded forward pass over the primitive set {affine, relu, add, subtract,
// conv1d} plus one reverse traversal producing exact gradients for every
// registered parameter slot. The tape is rebuilt per batch element; ops are
// appended in execution order so they are topologically sorted by
// construction. ReLU subgradient at exactly 0 is 0.
#pragma once

#include <cstdint>
#include <vector>

#include "mgcast/matrix.hpp"

namespace mgcast {

// A parameter slot is one learnable tensor. Vectors are stored as n x 1,
// scalars as 1 x 1. Gradients are keyed by slot index and share shapes.
struct ParamSet {
    std::vector<Matrix> slots;
    std::vector<std::string> names;

    int add(std::string name, Matrix value) {
        names.push_back(std::move(name));
        slots.push_back(std::move(value));
        return static_cast<int>(slots.size()) - 1;
    }
    std::size_t scalar_count() const {
        std::size_t n = 0;
        for (const Matrix& m : slots) n += m.size();
        return n;
    }
};

using Grads = std::vector<Matrix>;  // aligned with ParamSet::slots

Grads zero_grads_like(const ParamSet& p);

enum class OpKind : std::uint8_t { Affine, Relu, Add, Subtract, Conv1d };

struct TapeOp {
    OpKind kind;
    int out;          // value slot written
    int x = -1;       // first input value slot
    int y = -1;       // second input value slot (add/subtract)
    int w = -1;       // parameter slot: affine weight / conv kernel
    int b = -1;       // parameter slot: bias (m x 1 for affine, 1 x 1 for conv)
    std::uint32_t stride = 1, padding = 0;
};

class Tape {
  public:
    explicit Tape(const ParamSet& params) : params_(&params) {}

    // Value-slot constructors. leaf() copies an external input onto the tape.
    int leaf(Vector v);
    int zeros(std::size_t n) { return leaf(Vector(n, 0.0)); }

    int affine(int w_slot, int b_slot, int x);
    int relu(int x);
    int add(int x, int y);
    int subtract(int x, int y);
    int conv1d(int kernel_slot, int bias_slot, int x, std::uint32_t stride,
               std::uint32_t padding);

    const Vector& value(int slot) const { return vals_[slot]; }
    const std::vector<TapeOp>& ops() const { return ops_; }
    std::size_t op_count() const { return ops_.size(); }
    std::size_t value_count() const { return vals_.size(); }
    std::size_t value_scalars() const;

    // Reverse pass from dL/d(value at seed_slot). Gradients accumulate into
    // grads, which must be shaped like the parameter set (see zero_grads_like).
    void backward(int seed_slot, const Vector& dL_dout, Grads& grads) const;

  private:
    const Matrix& pslot(int idx) const;

    const ParamSet* params_;
    std::vector<Vector> vals_;
    std::vector<TapeOp> ops_;
};

}  // namespace mgcast
