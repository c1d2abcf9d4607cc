#pragma once

#include "gearnet/tensor.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace gearnet {

/// Non-owning view of one trainable tensor and its gradient accumulator.
struct ParamRef {
    std::string name;
    Tensor* value;
    Tensor* grad;
};

class MissingForwardCache : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A differentiable stage in a classifier. Inputs carry a leading batch axis.
///
/// forward() caches whatever backward() needs; backward() adds parameter
/// gradients into the accumulators (call zero_grad() between updates) and
/// returns the gradient with respect to the last forward input.
class Layer {
public:
    virtual ~Layer() = default;

    virtual std::string kind() const = 0;
    virtual Shape output_shape(const Shape& input) const = 0;
    virtual Tensor forward(const Tensor& input) = 0;
    virtual Tensor backward(const Tensor& grad_output) = 0;
    virtual std::vector<ParamRef> parameters() { return {}; }
    virtual std::unique_ptr<Layer> clone() const = 0;

    void zero_grad();
    std::size_t parameter_count();
};

}  // namespace gearnet
