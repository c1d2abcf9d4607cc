#pragma once

#include "gearnet/gradcheck.hpp"
#include "gearnet/layer.hpp"

#include <memory>
#include <string>
#include <vector>

namespace gearnet {

/// Layers chained in order; used to check gradients through a whole stack.
class SequentialLayer final : public Layer {
public:
    explicit SequentialLayer(std::vector<std::unique_ptr<Layer>> layers);
    SequentialLayer(const SequentialLayer& other);

    std::string kind() const override;
    Shape output_shape(const Shape& input) const override;
    Tensor forward(const Tensor& input) override;
    Tensor backward(const Tensor& grad_output) override;
    std::vector<ParamRef> parameters() override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<SequentialLayer>(*this); }

private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

/// Names accepted by run_gradient_suite besides "all".
const std::vector<std::string>& gradient_suite_layers();

struct SuiteResult {
    std::string layer;
    std::size_t seed;
    GradReport parameters;
    GradReport input;  // empty for the loss head and for layers without inputs to check
};

/// Random small instances of one layer type (or every type for "all"),
/// one per seed in [0, seeds), each checked against central differences.
/// Inputs that sit within reach of a ReLU kink or a max-pool tie are redrawn.
std::vector<SuiteResult> run_gradient_suite(const std::string& layer, std::size_t seeds,
                                            const GradCheckOptions& options = {});

}  // namespace gearnet
