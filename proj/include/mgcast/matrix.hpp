// Dense row-major matrix / vector containers and the small kernel set the
// models are built from. Everything is 64-bit float; shapes are checked at
// the public boundaries and violations throw DimensionError.
#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgcast {

// Error taxonomy. The CLI maps these onto its exit-code contract
// (config -> 2, data -> 3, numeric -> 4).
struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InternalError : std::logic_error {
    using std::logic_error::logic_error;
};

using Vector = std::vector<double>;

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major, data.size() == rows*cols

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }
    double* row(std::size_t i) { return data.data() + i * cols; }
    std::size_t size() const { return data.size(); }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }
};

inline std::string shape_str(const Matrix& m) {
    return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

// y = W x + b
Vector affine_apply(const Matrix& w, const Vector& b, const Vector& x);

// elementwise max(0, x)
Vector relu(const Vector& x);

// Cross-correlation with zero padding, one in/out channel.
// out[j] = sum_k kernel[k] * xpad[j*stride + k] + bias,
// out length = floor((n + 2*padding - k)/stride) + 1, must be >= 1.
Vector conv1d_apply(const Vector& kernel, double bias, const Vector& x,
                    std::size_t stride, std::size_t padding);

// In-place building blocks used by the hot paths (no allocation).
void matvec(const Matrix& w, const double* x, double* y);            // y = W x
void matvec_add(const Matrix& w, const double* x, double* y);        // y += W x
void matvec_transpose_add(const Matrix& w, const double* x, double* y);  // y += W^T x
void outer_add(Matrix& dw, const double* a, const double* b);        // dw += a b^T

bool all_finite(const Vector& v);
bool all_finite(const Matrix& m);

// Seeded initialization. Entries of init_matrix are uniform on
// [-1/sqrt(cols), +1/sqrt(cols)]; biases are zero. The draw is built
// directly on mt19937_64 output so identical (scheme, seed, shape
// sequence) is bit-identical on every platform.
struct InitSpec {
    enum class Scheme { UniformFanIn } scheme = Scheme::UniformFanIn;
    std::uint64_t seed = 0;
};

// mt19937_64 is fully pinned by the standard; only the distributions are
// implementation-defined, so double/int construction lives here.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }
    // uniform in [0, 1), 53-bit resolution
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + next_unit() * (hi - lo); }
    // uniform integer in [0, n), rejection sampled, n >= 1
    std::uint64_t below(std::uint64_t n);

  private:
    std::mt19937_64 eng_;
};

Matrix init_matrix(std::size_t rows, std::size_t cols, const InitSpec& spec);
Vector init_bias(std::size_t len, const InitSpec& spec);
// Fill from an already-seeded generator (used when one stream initializes a
// whole parameter set in declaration order).
void fill_uniform_fan_in(Matrix& m, Rng& rng);

}  // namespace mgcast
