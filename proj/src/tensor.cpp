#include "gearnet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <numeric>
#include <sstream>

namespace gearnet {

std::string format_shape(const Shape& shape) {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out << 'x';
        out << shape[i];
    }
    out << ']';
    return out.str();
}

std::size_t shape_product(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

namespace {

void require_valid_shape(const Shape& shape) {
    if (shape.empty()) throw ShapeError("tensor shape must have at least one dimension");
    for (auto d : shape) {
        if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + format_shape(shape));
    }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + format_shape(a.shape()) + " vs " +
                         format_shape(b.shape()));
    }
}

template <typename F>
Tensor map(const Tensor& x, F f) {
    Tensor out(x.shape());
    const auto in = x.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < in.size(); ++i) dst[i] = f(in[i]);
    return out;
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
    require_valid_shape(shape_);
    data_.assign(shape_product(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    require_valid_shape(shape_);
    if (shape_product(shape_) != data_.size()) {
        throw ShapeError("tensor of shape " + format_shape(shape_) + " needs " +
                         std::to_string(shape_product(shape_)) + " values, got " +
                         std::to_string(data_.size()));
    }
}

Tensor Tensor::vector(std::initializer_list<double> values) {
    return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
    if (rows.size() == 0) throw ShapeError("matrix literal needs at least one row");
    const std::size_t cols = rows.begin()->size();
    std::vector<double> flat;
    flat.reserve(rows.size() * cols);
    for (const auto& row : rows) {
        if (row.size() != cols) throw ShapeError("matrix literal rows differ in length");
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return Tensor({rows.size(), cols}, std::move(flat));
}

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= shape_.size()) {
        throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " + format_shape(shape_));
    }
    return shape_[axis];
}

Tensor Tensor::reshaped(Shape shape) const {
    if (shape_product(shape) != data_.size()) {
        throw ShapeError("cannot reshape " + format_shape(shape_) + " to " + format_shape(shape));
    }
    return Tensor(std::move(shape), data_);
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
        throw ShapeError("matmul: incompatible shapes " + format_shape(a.shape()) + " and " +
                         format_shape(b.shape()));
    }
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    Tensor out({m, n});
    kernel::gemm_acc(a.ptr(), k, b.ptr(), n, out.ptr(), n, m, k, n);
    return out;
}

Tensor transpose(const Tensor& m) {
    if (m.rank() != 2) throw ShapeError("transpose: expected a matrix, got " + format_shape(m.shape()));
    const std::size_t rows = m.dim(0), cols = m.dim(1);
    Tensor out({cols, rows});
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) out(j, i) = m(i, j);
    return out;
}

double sigmoid(double x) noexcept {
    // Branching keeps exp() from overflowing for large |x|.
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Tensor sigmoid(const Tensor& x) { return map(x, [](double v) { return sigmoid(v); }); }

Tensor tanh_act(const Tensor& x) { return map(x, [](double v) { return std::tanh(v); }); }

Tensor relu(const Tensor& x) { return map(x, [](double v) { return v > 0.0 ? v : 0.0; }); }

Tensor hadamard(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "hadamard");
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

Tensor scale(const Tensor& a, double factor) {
    return map(a, [factor](double v) { return v * factor; });
}

Tensor softmax(const Tensor& logits) {
    if (logits.rank() != 1 || logits.size() < 2) {
        throw ShapeError("softmax: expected a vector of at least 2 logits, got " + format_shape(logits.shape()));
    }
    const auto in = logits.data();
    const double peak = *std::max_element(in.begin(), in.end());
    Tensor out(logits.shape());
    double total = 0.0;
    for (std::size_t i = 0; i < in.size(); ++i) {
        out[i] = std::exp(in[i] - peak);
        total += out[i];
    }
    for (std::size_t i = 0; i < in.size(); ++i) out[i] /= total;
    return out;
}

namespace kernel {

namespace {

// Register-tiled micro-kernel: a block of R output rows by V vectors of
// eight columns stays in registers while p runs over the shared index, so
// every element still sums its products in increasing p.
using Vec8 = double __attribute__((vector_size(64)));
constexpr std::size_t kLanes = 8;

inline Vec8 load8(const double* p) noexcept {
    Vec8 v;
    std::memcpy(&v, p, sizeof v);
    return v;
}

inline void store8(double* p, Vec8 v) noexcept { std::memcpy(p, &v, sizeof v); }

// The unroll pragmas keep acc in registers; without them GCC spills the
// accumulators to the stack on every step of p.
template <std::size_t R, std::size_t V, typename AccessA>
inline void tile(AccessA a_at, std::size_t i, const double* b, std::size_t ldb, double* c, std::size_t ldc,
                 std::size_t p0, std::size_t p1) noexcept {
    Vec8 acc[R][V];
#pragma GCC unroll 8
    for (std::size_t r = 0; r < R; ++r)
#pragma GCC unroll 8
        for (std::size_t v = 0; v < V; ++v) acc[r][v] = load8(c + r * ldc + kLanes * v);
    for (std::size_t p = p0; p < p1; ++p) {
        Vec8 bv[V];
#pragma GCC unroll 8
        for (std::size_t v = 0; v < V; ++v) bv[v] = load8(b + p * ldb + kLanes * v);
#pragma GCC unroll 8
        for (std::size_t r = 0; r < R; ++r) {
            const double x = a_at(i + r, p);
#pragma GCC unroll 8
            for (std::size_t v = 0; v < V; ++v) acc[r][v] += x * bv[v];
        }
    }
#pragma GCC unroll 8
    for (std::size_t r = 0; r < R; ++r)
#pragma GCC unroll 8
        for (std::size_t v = 0; v < V; ++v) store8(c + r * ldc + kLanes * v, acc[r][v]);
}

// Columns left over after the vector panels (fewer than eight). Four rows
// advance together so their accumulation chains overlap.
template <typename AccessA>
inline void scalar_rows(AccessA a_at, std::size_t m, const double* b, std::size_t ldb, double* c, std::size_t ldc,
                        std::size_t p0, std::size_t p1, std::size_t j0, std::size_t j1) noexcept {
    const std::size_t w = j1 - j0;
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        double acc[4][kLanes];
        for (std::size_t r = 0; r < 4; ++r)
            for (std::size_t j = 0; j < w; ++j) acc[r][j] = c[(i + r) * ldc + j0 + j];
        for (std::size_t p = p0; p < p1; ++p) {
            const double* brow = b + p * ldb + j0;
            const double x0 = a_at(i, p), x1 = a_at(i + 1, p), x2 = a_at(i + 2, p), x3 = a_at(i + 3, p);
            for (std::size_t j = 0; j < w; ++j) {
                acc[0][j] += x0 * brow[j];
                acc[1][j] += x1 * brow[j];
                acc[2][j] += x2 * brow[j];
                acc[3][j] += x3 * brow[j];
            }
        }
        for (std::size_t r = 0; r < 4; ++r)
            for (std::size_t j = 0; j < w; ++j) c[(i + r) * ldc + j0 + j] = acc[r][j];
    }
    for (; i < m; ++i) {
        double* crow = c + i * ldc;
        for (std::size_t p = p0; p < p1; ++p) {
            const double x = a_at(i, p);
            const double* brow = b + p * ldb;
            for (std::size_t j = j0; j < j1; ++j) crow[j] += x * brow[j];
        }
    }
}

// One column panel of width V·8 over every row block, so the panel of b
// stays cache resident while the rows stream past it.
template <std::size_t V, typename AccessA>
inline void panel(AccessA a_at, const double* b, std::size_t ldb, double* c, std::size_t ldc, std::size_t m,
                  std::size_t p0, std::size_t p1) noexcept {
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) tile<4, V>(a_at, i, b, ldb, c + i * ldc, ldc, p0, p1);
    for (; i < m; ++i) tile<1, V>(a_at, i, b, ldb, c + i * ldc, ldc, p0, p1);
}

template <typename AccessA>
void gemm_rows(AccessA a_at, const double* b, std::size_t ldb, double* c, std::size_t ldc, std::size_t m,
               std::size_t k, std::size_t n) noexcept {
    constexpr std::size_t kWide = 3;
    constexpr std::size_t kDepth = 128;  // keeps a wide panel of b within L1
    // Blocks of p are visited in increasing order, so the summation order per
    // element matches a plain triple loop.
    for (std::size_t p0 = 0; p0 < k; p0 += kDepth) {
        const std::size_t p1 = std::min(k, p0 + kDepth);
        std::size_t j = 0;
        for (; j + kWide * kLanes <= n; j += kWide * kLanes) panel<kWide>(a_at, b + j, ldb, c + j, ldc, m, p0, p1);
        for (; j + kLanes <= n; j += kLanes) panel<1>(a_at, b + j, ldb, c + j, ldc, m, p0, p1);
        if (j < n) scalar_rows(a_at, m, b, ldb, c, ldc, p0, p1, j, n);
    }
}

}  // namespace

void gemm_acc(const double* a, std::size_t lda, const double* b, std::size_t ldb, double* c, std::size_t ldc,
              std::size_t m, std::size_t k, std::size_t n) noexcept {
    gemm_rows([a, lda](std::size_t i, std::size_t p) { return a[i * lda + p]; }, b, ldb, c, ldc, m, k, n);
}

void gemm_at_b_acc(const double* a, std::size_t lda, const double* b, std::size_t ldb, double* c,
                   std::size_t ldc, std::size_t m, std::size_t k, std::size_t n) noexcept {
    gemm_rows([a, lda](std::size_t i, std::size_t p) { return a[p * lda + i]; }, b, ldb, c, ldc, m, k, n);
}

}  // namespace kernel

}  // namespace gearnet
