#include "gearnet/gradient_suite.hpp"

#include "gearnet/layers.hpp"
#include "gearnet/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace gearnet {

SequentialLayer::SequentialLayer(std::vector<std::unique_ptr<Layer>> layers) : layers_(std::move(layers)) {}

SequentialLayer::SequentialLayer(const SequentialLayer& other) : Layer(other) {
    for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

std::string SequentialLayer::kind() const {
    std::string s;
    for (const auto& l : layers_) s += (s.empty() ? "" : ">") + l->kind();
    return s;
}

Shape SequentialLayer::output_shape(const Shape& input) const {
    Shape s = input;
    for (const auto& l : layers_) s = l->output_shape(s);
    return s;
}

Tensor SequentialLayer::forward(const Tensor& input) {
    Tensor x = input;
    for (auto& l : layers_) x = l->forward(x);
    return x;
}

Tensor SequentialLayer::backward(const Tensor& grad_output) {
    Tensor g = grad_output;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
}

std::vector<ParamRef> SequentialLayer::parameters() {
    std::vector<ParamRef> out;
    for (std::size_t i = 0; i < layers_.size(); ++i)
        for (auto& p : layers_[i]->parameters()) out.push_back({std::to_string(i) + "." + p.name, p.value, p.grad});
    return out;
}

const std::vector<std::string>& gradient_suite_layers() {
    static const std::vector<std::string> names = {"dense",  "dense-relu", "conv1d", "maxpool1d", "lstm",
                                                   "lstm-p", "lstm-gsig",  "blstm",  "xent",      "cnn-chain"};
    return names;
}

namespace {

constexpr double kKinkMargin = 1e-3;

Tensor random_tensor(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    Tensor t(std::move(shape));
    for (auto& v : t.data()) v = dist(rng);
    return t;
}

LstmWeights random_lstm(std::size_t units, std::size_t inputs, LstmVariant variant, std::mt19937_64& rng) {
    LstmWeights w = LstmWeights::zeros(units, inputs, variant);
    for (auto& [name, t] : w.named()) *t = random_tensor(t->shape(), rng, 0.8);
    return w;
}

bool near_zero(const Tensor& t) {
    return std::any_of(t.data().begin(), t.data().end(), [](double v) { return std::abs(v) < kKinkMargin; });
}

// True if some pooling window's largest positive value has a runner-up
// within the kink margin, making the max non-differentiable nearby.
bool near_pool_tie(const Tensor& y, std::size_t pool) {
    const std::size_t batch = y.dim(0), len = y.dim(1), f_n = y.dim(2);
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t t = 0; t + pool <= len; t += pool)
            for (std::size_t f = 0; f < f_n; ++f) {
                std::vector<double> vals;
                for (std::size_t k = 0; k < pool; ++k) vals.push_back(y(b, t + k, f));
                std::sort(vals.rbegin(), vals.rend());
                if (vals[0] > 0.0 && pool > 1 && vals[0] - vals[1] < kKinkMargin) return true;
            }
    return false;
}

struct Case {
    std::unique_ptr<Layer> layer;
    Tensor input;
};

Case make_case(const std::string& name, std::mt19937_64& rng) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        if (name == "dense" || name == "dense-relu") {
            const auto act = name == "dense" ? Activation::identity : Activation::relu;
            Tensor w = random_tensor({3, 4}, rng), b = random_tensor({3}, rng);
            Tensor x = random_tensor({2, 4}, rng);
            DenseLayer linear(w, b, Activation::identity);
            if (act == Activation::relu && near_zero(linear.forward(x))) continue;
            return {std::make_unique<DenseLayer>(w, b, act), x};
        }
        if (name == "conv1d") {
            ConvFilterBank bank{random_tensor({3, 4, 2}, rng), random_tensor({3}, rng)};
            return {std::make_unique<Conv1dLayer>(bank), random_tensor({2, 12, 2}, rng)};
        }
        if (name == "maxpool1d") {
            Tensor x = random_tensor({2, 9, 3}, rng);
            if (near_pool_tie(x, 2)) continue;
            return {std::make_unique<MaxPool1dLayer>(2), x};
        }
        if (name == "lstm" || name == "lstm-p" || name == "lstm-gsig") {
            const auto variant = name == "lstm-p" ? LstmVariant::peephole : LstmVariant::standard;
            const auto cand = name == "lstm-gsig" ? CandidateActivation::sigmoid : CandidateActivation::tanh;
            return {std::make_unique<LstmLayer>(random_lstm(3, 2, variant, rng), variant, cand),
                    random_tensor({2, 4, 2}, rng)};
        }
        if (name == "blstm") {
            return {std::make_unique<BiLstmLayer>(random_lstm(2, 2, LstmVariant::standard, rng),
                                                  random_lstm(3, 2, LstmVariant::standard, rng)),
                    random_tensor({2, 4, 2}, rng)};
        }
        if (name == "cnn-chain") {
            ConvFilterBank bank{random_tensor({3, 3, 2}, rng), random_tensor({3}, rng, 0.2)};
            Tensor x = random_tensor({2, 10, 2}, rng);
            Conv1dLayer probe(bank);
            const Tensor pre = probe.forward(x);
            if (near_zero(pre) || near_pool_tie(relu(pre), 2)) continue;
            std::vector<std::unique_ptr<Layer>> chain;
            chain.push_back(std::make_unique<Conv1dLayer>(bank));
            chain.push_back(std::make_unique<ReluLayer>());
            chain.push_back(std::make_unique<MaxPool1dLayer>(2));
            chain.push_back(std::make_unique<FlattenLayer>());
            const std::size_t features = ((10 - 3 + 1) / 2) * 3;
            chain.push_back(std::make_unique<DenseLayer>(random_tensor({2, features}, rng), random_tensor({2}, rng),
                                                         Activation::identity));
            return {std::make_unique<SequentialLayer>(std::move(chain)), x};
        }
        throw std::invalid_argument("unknown gradient-check layer '" + name + "'");
    }
    throw std::runtime_error("could not draw a kink-free instance of " + name);
}

}  // namespace

std::vector<SuiteResult> run_gradient_suite(const std::string& layer, std::size_t seeds,
                                            const GradCheckOptions& options) {
    std::vector<std::string> names;
    if (layer == "all") {
        names = gradient_suite_layers();
    } else if (std::find(gradient_suite_layers().begin(), gradient_suite_layers().end(), layer) !=
               gradient_suite_layers().end()) {
        names = {layer};
    } else {
        throw std::invalid_argument("unknown gradient-check layer '" + layer + "'");
    }

    std::vector<SuiteResult> out;
    for (const auto& name : names) {
        for (std::size_t seed = 0; seed < seeds; ++seed) {
            std::mt19937_64 rng(0x9e3779b97f4a7c15ULL * (seed + 1) + std::hash<std::string>{}(name));
            GradCheckOptions opts = options;
            opts.projection_seed = seed;
            SuiteResult r{name, seed, {}, {}};
            if (name == "xent") {
                std::uniform_int_distribution<std::size_t> pick(0, 1);
                const Tensor logits = random_tensor({2}, rng, 3.0);
                r.parameters = check_xent(logits, pick(rng), opts);
            } else {
                Case c = make_case(name, rng);
                r.parameters = check_layer(*c.layer, c.input, opts);
                r.input = check_input_gradient(*c.layer, c.input, opts);
            }
            out.push_back(std::move(r));
        }
    }
    return out;
}

}  // namespace gearnet
