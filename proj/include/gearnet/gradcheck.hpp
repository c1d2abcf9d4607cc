#pragma once

#include "gearnet/layer.hpp"
#include "gearnet/tensor.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gearnet {

class GradCheckError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GradEntry {
    std::string parameter;
    std::size_t index;
    double analytic;
    double numeric;
    double relative_error;
};

struct GradReport {
    std::string layer;
    std::vector<GradEntry> entries;
    double tolerance = 1e-4;

    double max_relative_error() const;
    bool passed() const { return max_relative_error() <= tolerance; }
    /// Entry with the largest relative error, or nullptr for an empty report.
    const GradEntry* worst() const;
};

/// |a - n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric);

/// Per-scalar (f(θ+ε) - f(θ-ε)) / 2ε, one coordinate at a time.
Tensor central_difference(const std::function<double(const Tensor&)>& loss, const Tensor& params,
                          double epsilon = 1e-5);

struct GradCheckOptions {
    double tolerance = 1e-4;
    double epsilon = 1e-5;
    std::uint64_t projection_seed = 0;
    /// Test hook: the analytic gradient of this parameter is deliberately
    /// offset so a check failure can be exercised end to end.
    std::string corrupt_parameter;
};

/// Compares backprop parameter gradients of L = sum(R ⊙ layer(input)) with
/// central differences, where R is a fixed random projection. Layers without
/// parameters produce an empty, passing report.
GradReport check_layer(Layer& layer, const Tensor& input, const GradCheckOptions& options = {});

/// Same loss as check_layer, but checks the gradient with respect to the input.
GradReport check_input_gradient(Layer& layer, const Tensor& input, const GradCheckOptions& options = {});

/// Checks the cross-entropy gradient with respect to the logits.
GradReport check_xent(const Tensor& logits, std::size_t label, const GradCheckOptions& options = {});

}  // namespace gearnet
