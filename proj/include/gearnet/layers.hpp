#pragma once

#include "gearnet/layer.hpp"
#include "gearnet/tensor.hpp"

#include <optional>
#include <random>

namespace gearnet {

enum class Activation { identity, relu };

/// F filters of width K over C channels, stored as [F×K×C], plus F biases.
struct ConvFilterBank {
    Tensor filters;
    Tensor biases;

    std::size_t count() const { return filters.dim(0); }
    std::size_t width() const { return filters.dim(1); }
    std::size_t channels() const { return filters.dim(2); }

    static ConvFilterBank glorot(std::size_t filters, std::size_t width, std::size_t channels, std::mt19937_64& rng);
};

/// Valid, stride-1 convolution of X [T×C]: Y[t,f] = b_f + sum_{k,c} W[f,k,c]·X[t+k,c].
Tensor conv1d_forward(const Tensor& X, const ConvFilterBank& bank);

/// Non-overlapping max over windows of `pool` rows; a trailing remainder is dropped.
Tensor maxpool1d(const Tensor& Y, std::size_t pool);

/// activation(W·x + b) for x [n], W [m×n], b [m].
Tensor dense_forward(const Tensor& x, const Tensor& W, const Tensor& b, Activation activation);

class Conv1dLayer final : public Layer {
public:
    explicit Conv1dLayer(ConvFilterBank bank);

    std::string kind() const override { return "conv1d"; }
    Shape output_shape(const Shape& input) const override;
    Tensor forward(const Tensor& input) override;
    Tensor backward(const Tensor& grad_output) override;
    std::vector<ParamRef> parameters() override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv1dLayer>(*this); }

    const ConvFilterBank& bank() const { return bank_; }
    ConvFilterBank& bank() { return bank_; }

private:
    ConvFilterBank bank_;
    Tensor grad_filters_;
    Tensor grad_biases_;
    std::optional<Tensor> input_;
};

class MaxPool1dLayer final : public Layer {
public:
    explicit MaxPool1dLayer(std::size_t pool);

    std::string kind() const override { return "maxpool1d"; }
    Shape output_shape(const Shape& input) const override;
    Tensor forward(const Tensor& input) override;
    Tensor backward(const Tensor& grad_output) override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<MaxPool1dLayer>(*this); }

    std::size_t pool() const { return pool_; }

private:
    std::size_t pool_;
    Shape input_shape_;
    std::vector<std::size_t> argmax_;
};

class ReluLayer final : public Layer {
public:
    std::string kind() const override { return "relu"; }
    Shape output_shape(const Shape& input) const override { return input; }
    Tensor forward(const Tensor& input) override;
    Tensor backward(const Tensor& grad_output) override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<ReluLayer>(*this); }

private:
    std::optional<Tensor> mask_;
};

/// Collapses every axis after the batch axis.
class FlattenLayer final : public Layer {
public:
    std::string kind() const override { return "flatten"; }
    Shape output_shape(const Shape& input) const override;
    Tensor forward(const Tensor& input) override;
    Tensor backward(const Tensor& grad_output) override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<FlattenLayer>(*this); }

private:
    Shape input_shape_;
};

/// Fully connected layer over [B×n] with weights [m×n] and bias [m].
class DenseLayer final : public Layer {
public:
    DenseLayer(Tensor weights, Tensor bias, Activation activation);
    static DenseLayer glorot(std::size_t inputs, std::size_t outputs, Activation activation, std::mt19937_64& rng);

    std::string kind() const override { return activation_ == Activation::relu ? "dense-relu" : "dense"; }
    Shape output_shape(const Shape& input) const override;
    Tensor forward(const Tensor& input) override;
    Tensor backward(const Tensor& grad_output) override;
    std::vector<ParamRef> parameters() override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<DenseLayer>(*this); }

    const Tensor& weights() const { return weights_; }
    Tensor& weights() { return weights_; }
    const Tensor& bias() const { return bias_; }
    Tensor& bias() { return bias_; }
    Activation activation() const { return activation_; }

private:
    Tensor weights_, bias_;
    Tensor grad_weights_, grad_bias_;
    Activation activation_;
    std::optional<Tensor> input_;
    std::optional<Tensor> output_;
};

}  // namespace gearnet
