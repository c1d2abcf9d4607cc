#include "gearnet/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gearnet {

namespace {

// Writes softmax(row) into probs and returns log-sum-exp of the row.
double softmax_row(const double* row, std::size_t classes, double* probs) {
    double peak = row[0];
    for (std::size_t k = 1; k < classes; ++k) peak = std::max(peak, row[k]);
    double total = 0.0;
    for (std::size_t k = 0; k < classes; ++k) {
        probs[k] = std::exp(row[k] - peak);
        total += probs[k];
    }
    for (std::size_t k = 0; k < classes; ++k) probs[k] /= total;
    return peak + std::log(total);
}

void require_label(std::size_t label, std::size_t classes) {
    if (label >= classes) {
        throw std::out_of_range("label " + std::to_string(label) + " out of range for " + std::to_string(classes) +
                                " classes");
    }
}

}  // namespace

LossAndGradient xent_loss(const Tensor& logits, std::size_t label) {
    if (logits.rank() != 1 || logits.size() < 2) {
        throw ShapeError("xent_loss: expected at least 2 logits, got " + format_shape(logits.shape()));
    }
    require_label(label, logits.size());
    Tensor grad(logits.shape());
    const double lse = softmax_row(logits.ptr(), logits.size(), grad.ptr());
    grad[label] -= 1.0;
    return {lse - logits[label], std::move(grad)};
}

LossAndGradient batch_xent_loss(const Tensor& logits, std::span<const std::size_t> labels) {
    if (logits.rank() != 2 || logits.dim(1) < 2 || logits.dim(0) != labels.size()) {
        throw ShapeError("batch_xent_loss: logits " + format_shape(logits.shape()) + " vs " +
                         std::to_string(labels.size()) + " labels");
    }
    const std::size_t batch = logits.dim(0), classes = logits.dim(1);
    Tensor grad(logits.shape());
    double total = 0.0;
    const double inv = 1.0 / static_cast<double>(batch);
    for (std::size_t b = 0; b < batch; ++b) {
        require_label(labels[b], classes);
        const double* row = logits.ptr() + b * classes;
        double* g = grad.ptr() + b * classes;
        total += softmax_row(row, classes, g) - row[labels[b]];
        g[labels[b]] -= 1.0;
        for (std::size_t k = 0; k < classes; ++k) g[k] *= inv;
    }
    return {total * inv, std::move(grad)};
}

std::size_t argmax(std::span<const double> logits) {
    if (logits.empty()) throw std::invalid_argument("argmax of an empty vector");
    std::size_t best = 0;
    for (std::size_t k = 1; k < logits.size(); ++k)
        if (logits[k] > logits[best]) best = k;
    return best;
}

}  // namespace gearnet
