#include "gearnet/gradcheck.hpp"

#include "gearnet/loss.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gearnet {

double relative_error(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    return std::abs(analytic - numeric) / denom;
}

double GradReport::max_relative_error() const {
    const GradEntry* w = worst();
    return w ? w->relative_error : 0.0;
}

const GradEntry* GradReport::worst() const {
    const GradEntry* best = nullptr;
    for (const auto& e : entries)
        if (!best || e.relative_error > best->relative_error) best = &e;
    return best;
}

Tensor central_difference(const std::function<double(const Tensor&)>& loss, const Tensor& params, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("central_difference: epsilon must be positive");
    Tensor probe = params;
    Tensor grad(params.shape());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double original = probe[i];
        probe[i] = original + epsilon;
        const double up = loss(probe);
        probe[i] = original - epsilon;
        const double down = loss(probe);
        probe[i] = original;
        if (!std::isfinite(up) || !std::isfinite(down)) {
            throw GradCheckError("non-finite loss while perturbing parameter index " + std::to_string(i));
        }
        grad[i] = (up - down) / (2.0 * epsilon);
    }
    return grad;
}

namespace {

Tensor projection_for(const Shape& shape, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Tensor r(shape);
    for (auto& v : r.data()) v = dist(rng);
    return r;
}

double projected(const Tensor& out, const Tensor& r) {
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * r[i];
    return s;
}

void append_entries(GradReport& report, const std::string& name, const Tensor& analytic, const Tensor& numeric,
                    const GradCheckOptions& options) {
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        double a = analytic[i];
        if (i == 0 && name == options.corrupt_parameter) a += 1.0;
        report.entries.push_back({name, i, a, numeric[i], relative_error(a, numeric[i])});
    }
}

}  // namespace

GradReport check_layer(Layer& layer, const Tensor& input, const GradCheckOptions& options) {
    GradReport report{layer.kind(), {}, options.tolerance};
    auto params = layer.parameters();
    if (params.empty()) return report;

    const Tensor r = projection_for(layer.output_shape(input.shape()), options.projection_seed);
    layer.zero_grad();
    layer.forward(input);
    layer.backward(r);

    for (auto& p : params) {
        if (p.grad->shape() != p.value->shape()) {
            throw GradCheckError("gradient of " + p.name + " has shape " + format_shape(p.grad->shape()) +
                                 " but the parameter is " + format_shape(p.value->shape()));
        }
        const Tensor analytic = *p.grad;
        const Tensor original = *p.value;
        auto loss = [&](const Tensor& candidate) {
            *p.value = candidate;
            return projected(layer.forward(input), r);
        };
        Tensor numeric;
        try {
            numeric = central_difference(loss, original, options.epsilon);
        } catch (const GradCheckError& e) {
            *p.value = original;
            throw GradCheckError(p.name + ": " + e.what());
        }
        *p.value = original;
        append_entries(report, p.name, analytic, numeric, options);
    }
    return report;
}

GradReport check_input_gradient(Layer& layer, const Tensor& input, const GradCheckOptions& options) {
    GradReport report{layer.kind() + ":input", {}, options.tolerance};
    const Tensor r = projection_for(layer.output_shape(input.shape()), options.projection_seed);
    layer.zero_grad();
    layer.forward(input);
    const Tensor analytic = layer.backward(r);
    if (analytic.shape() != input.shape()) {
        throw GradCheckError("input gradient has shape " + format_shape(analytic.shape()) + " but the input is " +
                             format_shape(input.shape()));
    }
    const Tensor numeric =
        central_difference([&](const Tensor& x) { return projected(layer.forward(x), r); }, input, options.epsilon);
    append_entries(report, "input", analytic, numeric, options);
    return report;
}

GradReport check_xent(const Tensor& logits, std::size_t label, const GradCheckOptions& options) {
    GradReport report{"softmax-xent", {}, options.tolerance};
    const Tensor analytic = xent_loss(logits, label).gradient;
    const Tensor numeric = central_difference([&](const Tensor& z) { return xent_loss(z, label).loss; }, logits,
                                              options.epsilon);
    append_entries(report, "logits", analytic, numeric, options);
    return report;
}

}  // namespace gearnet
