#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gearnet {

using Shape = std::vector<std::size_t>;

std::string format_shape(const Shape& shape);

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Dense row-major array of doubles with an explicit shape.
///
/// Every dimension is positive and the flat buffer always holds exactly
/// product(shape) values. A default-constructed tensor is empty (rank 0,
/// no data) and only serves as a placeholder.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> data);

    static Tensor vector(std::initializer_list<double> values);
    static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return data_.size(); }
    std::size_t dim(std::size_t axis) const;
    bool empty() const noexcept { return data_.empty(); }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    double* ptr() noexcept { return data_.data(); }
    const double* ptr() const noexcept { return data_.data(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
    double& operator()(std::size_t i, std::size_t j, std::size_t k) {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }

    Tensor reshaped(Shape shape) const;
    void fill(double value);

    bool all_finite() const noexcept;

    friend bool operator==(const Tensor& a, const Tensor& b) = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

std::size_t shape_product(const Shape& shape);

// Kernel operations. All are pure: inputs are never modified and every
// result is freshly allocated.

/// Matrix product. Each output element is accumulated left to right over the
/// inner dimension, so results are bit-reproducible for a given build.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& m);

Tensor sigmoid(const Tensor& x);
Tensor tanh_act(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);

/// Numerically stable softmax over a vector of at least two logits.
Tensor softmax(const Tensor& logits);

double sigmoid(double x) noexcept;

namespace kernel {

// Raw accumulate kernels used by the layers on hot paths. Row strides are
// explicit so overlapping row views (convolution windows) need no copy.
// Each output element is accumulated in increasing order of the shared index.

/// c[m×n] += a[m×k] · b[k×n]
void gemm_acc(const double* a, std::size_t lda, const double* b, std::size_t ldb, double* c,
              std::size_t ldc, std::size_t m, std::size_t k, std::size_t n) noexcept;

/// c[m×n] += aᵀ · b where a is [k×m] and b is [k×n]
void gemm_at_b_acc(const double* a, std::size_t lda, const double* b, std::size_t ldb, double* c,
                   std::size_t ldc, std::size_t m, std::size_t k, std::size_t n) noexcept;

/// Elementwise activations over a contiguous range, vectorised. Results agree
/// with std::tanh to within a few ulp and do not depend on buffer position.
void tanh_inplace(double* v, std::size_t n) noexcept;
void sigmoid_inplace(double* v, std::size_t n) noexcept;

}  // namespace kernel

}  // namespace gearnet
