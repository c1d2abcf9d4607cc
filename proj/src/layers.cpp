#include "gearnet/layers.hpp"

#include <algorithm>
#include <cmath>

namespace gearnet {

namespace {

Tensor uniform(Shape shape, double limit, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-limit, limit);
    Tensor t(std::move(shape));
    for (auto& v : t.data()) v = dist(rng);
    return t;
}

// Y_b [L×F] = bias + X_b · Wᵀ for every sample, where X_b rows are the
// overlapping K·C windows starting at each time step.
void conv_forward_into(const double* input, std::size_t batch, std::size_t steps, const ConvFilterBank& bank,
                       double* out) {
    const std::size_t f_n = bank.count(), k_n = bank.width(), c_n = bank.channels();
    const std::size_t span = k_n * c_n, len = steps - k_n + 1;
    std::vector<double> wt(span * f_n);
    for (std::size_t f = 0; f < f_n; ++f)
        for (std::size_t j = 0; j < span; ++j) wt[j * f_n + f] = bank.filters[f * span + j];
    for (std::size_t b = 0; b < batch; ++b) {
        double* y = out + b * len * f_n;
        for (std::size_t t = 0; t < len; ++t) std::copy_n(bank.biases.ptr(), f_n, y + t * f_n);
        kernel::gemm_acc(input + b * steps * c_n, c_n, wt.data(), f_n, y, f_n, len, span, f_n);
    }
}

}  // namespace

ConvFilterBank ConvFilterBank::glorot(std::size_t filters, std::size_t width, std::size_t channels,
                                      std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(width * channels + width * filters));
    return {uniform({filters, width, channels}, limit, rng), Tensor({filters})};
}

Tensor conv1d_forward(const Tensor& X, const ConvFilterBank& bank) {
    if (X.rank() != 2) throw ShapeError("conv1d_forward: expected [T x C], got " + format_shape(X.shape()));
    Conv1dLayer layer(bank);
    const Shape out = layer.output_shape({1, X.dim(0), X.dim(1)});
    Tensor y({out[1], out[2]});
    conv_forward_into(X.ptr(), 1, X.dim(0), bank, y.ptr());
    return y;
}

Tensor maxpool1d(const Tensor& Y, std::size_t pool) {
    if (Y.rank() != 2) throw ShapeError("maxpool1d: expected [L x F], got " + format_shape(Y.shape()));
    MaxPool1dLayer layer(pool);
    const Tensor out = layer.forward(Y.reshaped({1, Y.dim(0), Y.dim(1)}));
    return out.reshaped({out.dim(1), out.dim(2)});
}

Tensor dense_forward(const Tensor& x, const Tensor& W, const Tensor& b, Activation activation) {
    if (x.rank() != 1 || W.rank() != 2 || b.rank() != 1 || W.dim(1) != x.size() || W.dim(0) != b.size()) {
        throw ShapeError("dense_forward: incompatible shapes x" + format_shape(x.shape()) + " W" +
                         format_shape(W.shape()) + " b" + format_shape(b.shape()));
    }
    Tensor y = add(matmul(W, x.reshaped({x.size(), 1})).reshaped({W.dim(0)}), b);
    return activation == Activation::relu ? relu(y) : y;
}

// ---------------------------------------------------------------------------
// Conv1dLayer
// ---------------------------------------------------------------------------

Conv1dLayer::Conv1dLayer(ConvFilterBank bank) : bank_(std::move(bank)) {
    if (bank_.filters.rank() != 3) {
        throw ShapeError("filter bank must be [F x K x C], got " + format_shape(bank_.filters.shape()));
    }
    if (bank_.biases.shape() != Shape{bank_.count()}) {
        throw ShapeError("filter bank biases " + format_shape(bank_.biases.shape()) + " do not match " +
                         std::to_string(bank_.count()) + " filters");
    }
    grad_filters_ = Tensor(bank_.filters.shape());
    grad_biases_ = Tensor(bank_.biases.shape());
}

Shape Conv1dLayer::output_shape(const Shape& input) const {
    if (input.size() != 3 || input[2] != bank_.channels()) {
        throw ShapeError("conv1d expects [B x T x " + std::to_string(bank_.channels()) + "], got " +
                         format_shape(input));
    }
    if (input[1] < bank_.width()) {
        throw ShapeError("conv1d: sequence length " + std::to_string(input[1]) + " is shorter than filter width " +
                         std::to_string(bank_.width()));
    }
    return {input[0], input[1] - bank_.width() + 1, bank_.count()};
}

Tensor Conv1dLayer::forward(const Tensor& input) {
    Tensor out(output_shape(input.shape()));
    conv_forward_into(input.ptr(), input.dim(0), input.dim(1), bank_, out.ptr());
    input_ = input;
    return out;
}

Tensor Conv1dLayer::backward(const Tensor& grad_output) {
    if (!input_) throw MissingForwardCache("conv1d backward called without a forward pass");
    const Tensor& input = *input_;
    const Shape out_shape = output_shape(input.shape());
    if (grad_output.shape() != out_shape) {
        throw ShapeError("conv1d backward: gradient " + format_shape(grad_output.shape()) + " does not match output " +
                         format_shape(out_shape));
    }
    const std::size_t batch = input.dim(0), steps = input.dim(1), c_n = bank_.channels();
    const std::size_t f_n = bank_.count(), span = bank_.width() * c_n, len = out_shape[1];

    std::vector<double> dwt(span * f_n, 0.0), cols(len * span);
    Tensor grad_input(input.shape());
    for (std::size_t b = 0; b < batch; ++b) {
        const double* dy = grad_output.ptr() + b * len * f_n;
        kernel::gemm_at_b_acc(input.ptr() + b * steps * c_n, c_n, dy, f_n, dwt.data(), f_n, span, len, f_n);
        for (std::size_t t = 0; t < len; ++t)
            for (std::size_t f = 0; f < f_n; ++f) grad_biases_[f] += dy[t * f_n + f];

        std::fill(cols.begin(), cols.end(), 0.0);
        kernel::gemm_acc(dy, f_n, bank_.filters.ptr(), span, cols.data(), span, len, f_n, span);
        double* dx = grad_input.ptr() + b * steps * c_n;
        for (std::size_t t = 0; t < len; ++t)
            for (std::size_t j = 0; j < span; ++j) dx[t * c_n + j] += cols[t * span + j];
    }
    for (std::size_t f = 0; f < f_n; ++f)
        for (std::size_t j = 0; j < span; ++j) grad_filters_[f * span + j] += dwt[j * f_n + f];
    return grad_input;
}

std::vector<ParamRef> Conv1dLayer::parameters() {
    return {{"filters", &bank_.filters, &grad_filters_}, {"biases", &bank_.biases, &grad_biases_}};
}

// ---------------------------------------------------------------------------
// MaxPool1dLayer
// ---------------------------------------------------------------------------

MaxPool1dLayer::MaxPool1dLayer(std::size_t pool) : pool_(pool) {
    if (pool_ == 0) throw std::invalid_argument("pool size must be at least 1");
}

Shape MaxPool1dLayer::output_shape(const Shape& input) const {
    if (input.size() != 3) throw ShapeError("maxpool1d expects [B x L x F], got " + format_shape(input));
    if (input[1] < pool_) {
        throw ShapeError("maxpool1d: length " + std::to_string(input[1]) + " is shorter than pool " +
                         std::to_string(pool_));
    }
    return {input[0], input[1] / pool_, input[2]};
}

Tensor MaxPool1dLayer::forward(const Tensor& input) {
    const Shape shape = output_shape(input.shape());
    const std::size_t batch = shape[0], out_len = shape[1], f_n = shape[2], in_len = input.dim(1);
    Tensor out(shape);
    argmax_.assign(out.size(), 0);
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t t = 0; t < out_len; ++t) {
            for (std::size_t f = 0; f < f_n; ++f) {
                std::size_t best = (b * in_len + t * pool_) * f_n + f;
                for (std::size_t k = 1; k < pool_; ++k) {
                    const std::size_t idx = (b * in_len + t * pool_ + k) * f_n + f;
                    if (input[idx] > input[best]) best = idx;
                }
                const std::size_t o = (b * out_len + t) * f_n + f;
                out[o] = input[best];
                argmax_[o] = best;
            }
        }
    }
    input_shape_ = input.shape();
    return out;
}

Tensor MaxPool1dLayer::backward(const Tensor& grad_output) {
    if (input_shape_.empty()) throw MissingForwardCache("maxpool1d backward called without a forward pass");
    if (grad_output.shape() != output_shape(input_shape_)) {
        throw ShapeError("maxpool1d backward: unexpected gradient shape " + format_shape(grad_output.shape()));
    }
    Tensor grad_input(input_shape_);
    for (std::size_t o = 0; o < grad_output.size(); ++o) grad_input[argmax_[o]] += grad_output[o];
    return grad_input;
}

// ---------------------------------------------------------------------------
// ReluLayer / FlattenLayer
// ---------------------------------------------------------------------------

Tensor ReluLayer::forward(const Tensor& input) {
    Tensor out(input.shape());
    Tensor mask(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) {
        const bool on = input[i] > 0.0;
        out[i] = on ? input[i] : 0.0;
        mask[i] = on ? 1.0 : 0.0;
    }
    mask_ = std::move(mask);
    return out;
}

Tensor ReluLayer::backward(const Tensor& grad_output) {
    if (!mask_) throw MissingForwardCache("relu backward called without a forward pass");
    return hadamard(grad_output, *mask_);
}

Shape FlattenLayer::output_shape(const Shape& input) const {
    if (input.size() < 2) throw ShapeError("flatten expects a batch axis plus features, got " + format_shape(input));
    return {input[0], shape_product(input) / input[0]};
}

Tensor FlattenLayer::forward(const Tensor& input) {
    input_shape_ = input.shape();
    return input.reshaped(output_shape(input.shape()));
}

Tensor FlattenLayer::backward(const Tensor& grad_output) {
    if (input_shape_.empty()) throw MissingForwardCache("flatten backward called without a forward pass");
    return grad_output.reshaped(input_shape_);
}

// ---------------------------------------------------------------------------
// DenseLayer
// ---------------------------------------------------------------------------

DenseLayer::DenseLayer(Tensor weights, Tensor bias, Activation activation)
    : weights_(std::move(weights)), bias_(std::move(bias)), activation_(activation) {
    if (weights_.rank() != 2 || bias_.shape() != Shape{weights_.dim(0)}) {
        throw ShapeError("dense layer: weights " + format_shape(weights_.shape()) + " and bias " +
                         format_shape(bias_.shape()) + " disagree");
    }
    grad_weights_ = Tensor(weights_.shape());
    grad_bias_ = Tensor(bias_.shape());
}

DenseLayer DenseLayer::glorot(std::size_t inputs, std::size_t outputs, Activation activation, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(inputs + outputs));
    return DenseLayer(uniform({outputs, inputs}, limit, rng), Tensor({outputs}), activation);
}

Shape DenseLayer::output_shape(const Shape& input) const {
    if (input.size() != 2 || input[1] != weights_.dim(1)) {
        throw ShapeError("dense layer expects [B x " + std::to_string(weights_.dim(1)) + "], got " +
                         format_shape(input));
    }
    return {input[0], weights_.dim(0)};
}

Tensor DenseLayer::forward(const Tensor& input) {
    const Shape shape = output_shape(input.shape());
    const std::size_t batch = shape[0], m = shape[1], n = weights_.dim(1);
    // Blocked transpose of the [m×n] weights so the product streams rows.
    std::vector<double> wt(n * m);
    constexpr std::size_t kBlock = 16;
    const double* w = weights_.ptr();
    for (std::size_t i0 = 0; i0 < m; i0 += kBlock)
        for (std::size_t j0 = 0; j0 < n; j0 += kBlock)
            for (std::size_t i = i0; i < std::min(m, i0 + kBlock); ++i)
                for (std::size_t j = j0; j < std::min(n, j0 + kBlock); ++j) wt[j * m + i] = w[i * n + j];
    Tensor out(shape);
    for (std::size_t b = 0; b < batch; ++b) std::copy_n(bias_.ptr(), m, out.ptr() + b * m);
    kernel::gemm_acc(input.ptr(), n, wt.data(), m, out.ptr(), m, batch, n, m);
    if (activation_ == Activation::relu) {
        for (auto& v : out.data()) v = v > 0.0 ? v : 0.0;
    }
    input_ = input;
    output_ = out;
    return out;
}

Tensor DenseLayer::backward(const Tensor& grad_output) {
    if (!input_) throw MissingForwardCache("dense backward called without a forward pass");
    const Tensor& input = *input_;
    const std::size_t batch = input.dim(0), m = weights_.dim(0), n = weights_.dim(1);
    if (grad_output.shape() != Shape{batch, m}) {
        throw ShapeError("dense backward: gradient " + format_shape(grad_output.shape()) + " does not match output " +
                         format_shape({batch, m}));
    }
    Tensor dz = grad_output;
    if (activation_ == Activation::relu) {
        for (std::size_t k = 0; k < dz.size(); ++k)
            if (!((*output_)[k] > 0.0)) dz[k] = 0.0;
    }
    kernel::gemm_at_b_acc(dz.ptr(), m, input.ptr(), n, grad_weights_.ptr(), n, m, batch, n);
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t i = 0; i < m; ++i) grad_bias_[i] += dz[b * m + i];
    Tensor grad_input({batch, n});
    kernel::gemm_acc(dz.ptr(), m, weights_.ptr(), n, grad_input.ptr(), n, batch, m, n);
    return grad_input;
}

std::vector<ParamRef> DenseLayer::parameters() {
    return {{"weights", &weights_, &grad_weights_}, {"bias", &bias_, &grad_bias_}};
}

}  // namespace gearnet
