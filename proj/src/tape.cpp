#include "mgcast/tape.hpp"

namespace mgcast {

Grads zero_grads_like(const ParamSet& p) {
    Grads g;
    g.reserve(p.slots.size());
    for (const Matrix& m : p.slots) g.emplace_back(m.rows, m.cols);
    return g;
}

const Matrix& Tape::pslot(int idx) const {
    if (idx < 0 || idx >= static_cast<int>(params_->slots.size()))
        throw InternalError("tape references unknown parameter slot " + std::to_string(idx));
    return params_->slots[idx];
}

int Tape::leaf(Vector v) {
    vals_.push_back(std::move(v));
    return static_cast<int>(vals_.size()) - 1;
}

int Tape::affine(int w_slot, int b_slot, int x) {
    const Matrix& w = pslot(w_slot);
    const Matrix& b = pslot(b_slot);
    const Vector& xv = vals_[x];
    if (w.cols != xv.size() || w.rows != b.rows || b.cols != 1)
        throw DimensionError("affine: W is " + shape_str(w) + ", b is " + shape_str(b) +
                             ", x has length " + std::to_string(xv.size()));
    Vector y(w.rows);
    matvec(w, xv.data(), y.data());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += b.data[i];
    const int out = leaf(std::move(y));
    ops_.push_back({OpKind::Affine, out, x, -1, w_slot, b_slot});
    return out;
}

int Tape::relu(int x) {
    const int out = leaf(mgcast::relu(vals_[x]));
    ops_.push_back({OpKind::Relu, out, x});
    return out;
}

int Tape::add(int x, int y) {
    const Vector& a = vals_[x];
    const Vector& b = vals_[y];
    if (a.size() != b.size())
        throw DimensionError("add: lengths " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
    Vector r(a.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = a[i] + b[i];
    const int out = leaf(std::move(r));
    ops_.push_back({OpKind::Add, out, x, y});
    return out;
}

int Tape::subtract(int x, int y) {
    const Vector& a = vals_[x];
    const Vector& b = vals_[y];
    if (a.size() != b.size())
        throw DimensionError("subtract: lengths " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
    Vector r(a.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = a[i] - b[i];
    const int out = leaf(std::move(r));
    ops_.push_back({OpKind::Subtract, out, x, y});
    return out;
}

int Tape::conv1d(int kernel_slot, int bias_slot, int x, std::uint32_t stride,
                 std::uint32_t padding) {
    const Matrix& k = pslot(kernel_slot);
    const Matrix& b = pslot(bias_slot);
    if (k.rows != 1 || b.rows != 1 || b.cols != 1)
        throw DimensionError("conv1d: kernel must be 1 x k and bias scalar; got " +
                             shape_str(k) + " and " + shape_str(b));
    Vector kv(k.data.begin(), k.data.end());
    const int out = leaf(conv1d_apply(kv, b.data[0], vals_[x], stride, padding));
    ops_.push_back({OpKind::Conv1d, out, x, -1, kernel_slot, bias_slot, stride, padding});
    return out;
}

std::size_t Tape::value_scalars() const {
    std::size_t n = 0;
    for (const Vector& v : vals_) n += v.size();
    return n;
}

void Tape::backward(int seed_slot, const Vector& dL_dout, Grads& grads) const {
    if (grads.size() != params_->slots.size())
        throw InternalError("backward: gradient store does not match parameter slots");
    if (seed_slot < 0 || seed_slot >= static_cast<int>(vals_.size()))
        throw InternalError("backward: seed slot out of range");
    if (dL_dout.size() != vals_[seed_slot].size())
        throw DimensionError("backward: seed gradient length " + std::to_string(dL_dout.size()) +
                             " vs output length " + std::to_string(vals_[seed_slot].size()));

    std::vector<Vector> dvals(vals_.size());
    for (std::size_t i = 0; i < vals_.size(); ++i) dvals[i].assign(vals_[i].size(), 0.0);
    dvals[seed_slot] = dL_dout;

    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
        const TapeOp& op = *it;
        const Vector& dout = dvals[op.out];
        switch (op.kind) {
            case OpKind::Affine: {
                const Matrix& w = params_->slots[op.w];
                matvec_transpose_add(w, dout.data(), dvals[op.x].data());
                outer_add(grads[op.w], dout.data(), vals_[op.x].data());
                double* db = grads[op.b].data.data();
                for (std::size_t i = 0; i < dout.size(); ++i) db[i] += dout[i];
                break;
            }
            case OpKind::Relu: {
                const Vector& x = vals_[op.x];
                Vector& dx = dvals[op.x];
                for (std::size_t i = 0; i < x.size(); ++i)
                    if (x[i] > 0.0) dx[i] += dout[i];
                break;
            }
            case OpKind::Add: {
                Vector& dx = dvals[op.x];
                Vector& dy = dvals[op.y];
                for (std::size_t i = 0; i < dout.size(); ++i) {
                    dx[i] += dout[i];
                    dy[i] += dout[i];
                }
                break;
            }
            case OpKind::Subtract: {
                Vector& dx = dvals[op.x];
                Vector& dy = dvals[op.y];
                for (std::size_t i = 0; i < dout.size(); ++i) {
                    dx[i] += dout[i];
                    dy[i] -= dout[i];
                }
                break;
            }
            case OpKind::Conv1d: {
                const Matrix& kmat = params_->slots[op.w];
                const std::size_t k = kmat.cols;
                const Vector& x = vals_[op.x];
                Vector& dx = dvals[op.x];
                double* dk = grads[op.w].data.data();
                double& db = grads[op.b].data[0];
                const auto n = static_cast<std::ptrdiff_t>(x.size());
                for (std::size_t j = 0; j < dout.size(); ++j) {
                    const double g = dout[j];
                    db += g;
                    const std::ptrdiff_t base =
                        static_cast<std::ptrdiff_t>(j * op.stride) -
                        static_cast<std::ptrdiff_t>(op.padding);
                    for (std::size_t t = 0; t < k; ++t) {
                        const std::ptrdiff_t src = base + static_cast<std::ptrdiff_t>(t);
                        if (src >= 0 && src < n) {
                            dk[t] += g * x[src];
                            dx[src] += g * kmat.data[t];
                        }
                    }
                }
                break;
            }
        }
    }
}

}  // namespace mgcast
