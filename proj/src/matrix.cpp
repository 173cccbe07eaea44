#include "mgcast/matrix.hpp"

#include <cmath>

namespace mgcast {

void matvec(const Matrix& w, const double* x, double* y) {
    const std::size_t m = w.rows, n = w.cols;
    const double* wp = w.data.data();
    for (std::size_t i = 0; i < m; ++i, wp += n) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += wp[j] * x[j];
        y[i] = acc;
    }
}

void matvec_add(const Matrix& w, const double* x, double* y) {
    const std::size_t m = w.rows, n = w.cols;
    const double* wp = w.data.data();
    for (std::size_t i = 0; i < m; ++i, wp += n) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += wp[j] * x[j];
        y[i] += acc;
    }
}

void matvec_transpose_add(const Matrix& w, const double* x, double* y) {
    // y (len cols) += W^T x, streamed row by row so access stays sequential
    const std::size_t m = w.rows, n = w.cols;
    const double* wp = w.data.data();
    for (std::size_t i = 0; i < m; ++i, wp += n) {
        const double xi = x[i];
        for (std::size_t j = 0; j < n; ++j) y[j] += wp[j] * xi;
    }
}

void outer_add(Matrix& dw, const double* a, const double* b) {
    const std::size_t m = dw.rows, n = dw.cols;
    double* dp = dw.data.data();
    for (std::size_t i = 0; i < m; ++i, dp += n) {
        const double ai = a[i];
        for (std::size_t j = 0; j < n; ++j) dp[j] += ai * b[j];
    }
}

Vector affine_apply(const Matrix& w, const Vector& b, const Vector& x) {
    if (w.cols != x.size() || w.rows != b.size()) {
        throw DimensionError("affine_apply: W is " + shape_str(w) + ", b has length " +
                             std::to_string(b.size()) + ", x has length " +
                             std::to_string(x.size()));
    }
    Vector y(w.rows);
    matvec(w, x.data(), y.data());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += b[i];
    return y;
}

Vector relu(const Vector& x) {
    Vector y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
    return y;
}

Vector conv1d_apply(const Vector& kernel, double bias, const Vector& x,
                    std::size_t stride, std::size_t padding) {
    const std::size_t k = kernel.size(), n = x.size();
    if (k == 0 || stride == 0) throw DimensionError("conv1d_apply: kernel and stride must be nonempty");
    const std::ptrdiff_t span = static_cast<std::ptrdiff_t>(n + 2 * padding) -
                                static_cast<std::ptrdiff_t>(k);
    if (span < 0) {
        throw DimensionError("conv1d_apply: kernel length " + std::to_string(k) +
                             " exceeds padded input length " + std::to_string(n + 2 * padding));
    }
    const std::size_t out_len = static_cast<std::size_t>(span) / stride + 1;
    Vector y(out_len);
    for (std::size_t j = 0; j < out_len; ++j) {
        double acc = bias;
        const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(j * stride) -
                                    static_cast<std::ptrdiff_t>(padding);
        for (std::size_t t = 0; t < k; ++t) {
            const std::ptrdiff_t src = base + static_cast<std::ptrdiff_t>(t);
            if (src >= 0 && src < static_cast<std::ptrdiff_t>(n)) acc += kernel[t] * x[src];
        }
        y[j] = acc;
    }
    return y;
}

bool all_finite(const Vector& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

bool all_finite(const Matrix& m) {
    for (double x : m.data)
        if (!std::isfinite(x)) return false;
    return true;
}

std::uint64_t Rng::below(std::uint64_t n) {
    // rejection sampling over the top of the 64-bit range
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return v % n;
}

void fill_uniform_fan_in(Matrix& m, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(m.cols));
    for (double& v : m.data) v = rng.uniform(-bound, bound);
}

Matrix init_matrix(std::size_t rows, std::size_t cols, const InitSpec& spec) {
    Matrix m(rows, cols);
    Rng rng(spec.seed);
    fill_uniform_fan_in(m, rng);
    return m;
}

Vector init_bias(std::size_t len, const InitSpec&) { return Vector(len, 0.0); }

}  // namespace mgcast
