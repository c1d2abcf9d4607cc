#pragma once

#include "gearnet/tensor.hpp"

#include <cstddef>
#include <span>

namespace gearnet {

struct LossAndGradient {
    double loss;
    Tensor gradient;
};

/// -log softmax(logits)[label] and its gradient softmax(logits) - onehot(label).
LossAndGradient xent_loss(const Tensor& logits, std::size_t label);

/// Mean cross-entropy over a [B×c] batch of logits; the gradient is already
/// divided by B.
LossAndGradient batch_xent_loss(const Tensor& logits, std::span<const std::size_t> labels);

/// Index of the largest logit, ties resolved toward the lower index.
std::size_t argmax(std::span<const double> logits);

}  // namespace gearnet
