#include "gearnet/train.hpp"

#include "gearnet/loss.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

namespace gearnet {

namespace {

constexpr std::size_t kEvalChunk = 256;

std::string real(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

// Labels and stacked samples of a partition, prepared once per training run.
struct StackedSet {
    Tensor samples;
    std::vector<std::size_t> labels;
};

StackedSet stack_all(std::span<const Window> windows) {
    StackedSet s{stack_windows(windows), {}};
    s.labels.reserve(windows.size());
    for (const auto& w : windows) s.labels.push_back(w.label);
    return s;
}

double error_rate(Model& model, const StackedSet& set) {
    const std::size_t n = set.labels.size(), t = set.samples.dim(1), c = set.samples.dim(2);
    std::size_t wrong = 0;
    for (std::size_t begin = 0; begin < n; begin += kEvalChunk) {
        const std::size_t len = std::min(kEvalChunk, n - begin);
        std::vector<double> chunk(set.samples.ptr() + begin * t * c, set.samples.ptr() + (begin + len) * t * c);
        const auto predicted = predict_batch(model, Tensor({len, t, c}, std::move(chunk)));
        for (std::size_t k = 0; k < len; ++k) wrong += predicted[k] != set.labels[begin + k];
    }
    return static_cast<double>(wrong) / static_cast<double>(n);
}

}  // namespace

const char* to_string(OptimizerKind k) {
    switch (k) {
        case OptimizerKind::sgd: return "sgd";
        case OptimizerKind::momentum: return "momentum";
        case OptimizerKind::adam: return "adam";
    }
    return "?";
}

OptimizerKind parse_optimizer(const std::string& name) {
    for (auto k : {OptimizerKind::sgd, OptimizerKind::momentum, OptimizerKind::adam})
        if (name == to_string(k)) return k;
    throw std::invalid_argument("unknown optimizer '" + name + "' (expected sgd, momentum or adam)");
}

void TrainConfig::validate() const {
    if (max_iterations == 0 || batch_size == 0 || runs == 0 || validation_period == 0) {
        throw std::invalid_argument("iterations, batch size, runs and validation period must be positive");
    }
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw std::invalid_argument("learning rate must be a finite non-negative number");
    }
    if (!(clip_norm > 0.0)) throw std::invalid_argument("clip norm must be positive");
}

KeyValues TrainConfig::to_key_values() const {
    return {{"max_iterations", std::to_string(max_iterations)},
            {"batch_size", std::to_string(batch_size)},
            {"runs", std::to_string(runs)},
            {"optimizer", to_string(optimizer)},
            {"learning_rate", real(learning_rate)},
            {"validation_period", std::to_string(validation_period)},
            {"seed", std::to_string(seed)},
            {"momentum", real(momentum)},
            {"beta1", real(beta1)},
            {"beta2", real(beta2)},
            {"adam_epsilon", real(adam_epsilon)},
            {"clip_norm", real(clip_norm)}};
}

std::string TrainHistory::checkpoints_csv() const {
    std::string out = "iteration,validation_error,train_loss\n";
    for (const auto& c : checkpoints) {
        out += std::to_string(c.iteration) + "," + real(c.validation_error) + "," +
               real(train_loss.at(c.iteration - 1)) + "\n";
    }
    return out;
}

Optimizer::Optimizer(const TrainConfig& cfg, std::vector<ParamRef> params)
    : kind_(cfg.optimizer),
      lr_(cfg.learning_rate),
      momentum_(cfg.momentum),
      beta1_(cfg.beta1),
      beta2_(cfg.beta2),
      eps_(cfg.adam_epsilon),
      params_(std::move(params)) {
    for (const auto& p : params_) {
        if (kind_ != OptimizerKind::sgd) first_.emplace_back(p.value->shape());
        if (kind_ == OptimizerKind::adam) second_.emplace_back(p.value->shape());
    }
}

void Optimizer::step() {
    ++steps_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
        double* __restrict w = params_[k].value->ptr();
        const double* __restrict g = params_[k].grad->ptr();
        const std::size_t n = params_[k].value->size();
        switch (kind_) {
            case OptimizerKind::sgd:
                for (std::size_t i = 0; i < n; ++i) w[i] -= lr_ * g[i];
                break;
            case OptimizerKind::momentum: {
                double* __restrict v = first_[k].ptr();
                for (std::size_t i = 0; i < n; ++i) {
                    v[i] = momentum_ * v[i] + g[i];
                    w[i] -= lr_ * v[i];
                }
                break;
            }
            case OptimizerKind::adam: {
                double* __restrict m = first_[k].ptr();
                double* __restrict v = second_[k].ptr();
                for (std::size_t i = 0; i < n; ++i) {
                    m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
                    v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
                    w[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
                }
                break;
            }
        }
    }
}

double clip_gradients(std::span<const ParamRef> params, double max_norm) {
    double sq = 0.0;
    for (const auto& p : params)
        for (double g : p.grad->data()) sq += g * g;
    const double norm = std::sqrt(sq);
    if (norm > max_norm) {
        const double factor = max_norm / norm;
        for (const auto& p : params)
            for (double& g : p.grad->data()) g *= factor;
    }
    return norm;
}

double evaluate(Model& model, std::span<const Window> windows) {
    if (windows.empty()) throw std::invalid_argument("evaluate: no windows");
    return error_rate(model, stack_all(windows));
}

TrainResult train(Model model, const WindowedDataset& ds, const TrainConfig& cfg) {
    cfg.validate();
    if (ds.train.empty() || ds.validation.empty() || ds.test.empty()) {
        throw std::invalid_argument("train: every dataset partition must be non-empty");
    }
    if (cfg.batch_size > ds.train.size()) {
        throw std::invalid_argument("train: batch size " + std::to_string(cfg.batch_size) + " exceeds the " +
                                    std::to_string(ds.train.size()) + " training windows");
    }
    if (ds.normalized) {
        model.input_mean.assign(ds.stats.mean.begin(), ds.stats.mean.end());
        model.input_std.assign(ds.stats.std.begin(), ds.stats.std.end());
    }

    const StackedSet validation = stack_all(ds.validation);
    const bool clip = is_recurrent(model.config().family);
    auto params = model.parameters();
    Optimizer optimizer(cfg, params);

    std::mt19937_64 rng(cfg.seed ^ 0x5eedba7c4e5ULL);
    std::vector<std::size_t> order(ds.train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t cursor = 0;

    TrainHistory history;
    history.train_loss.reserve(cfg.max_iterations);
    std::vector<Tensor> best = model.snapshot();
    std::vector<std::size_t> picked(cfg.batch_size), labels(cfg.batch_size);

    for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
        for (std::size_t b = 0; b < cfg.batch_size; ++b) {
            if (cursor == order.size()) {
                std::shuffle(order.begin(), order.end(), rng);
                cursor = 0;
            }
            picked[b] = order[cursor++];
            labels[b] = ds.train[picked[b]].label;
        }
        const Tensor batch = stack_windows(ds.train, picked);

        model.zero_grad();
        const Tensor logits = model.forward(batch);
        const auto [loss, grad] = batch_xent_loss(logits, labels);
        if (!std::isfinite(loss)) {
            throw TrainingDiverged("training diverged at iteration " + std::to_string(it) + " (learning rate " +
                                   real(cfg.learning_rate) + ", loss " + real(loss) + ")");
        }
        history.train_loss.push_back(loss);
        model.backward(grad);
        if (clip) clip_gradients(params, cfg.clip_norm);
        optimizer.step();

        if (it % cfg.validation_period == 0 || it == cfg.max_iterations) {
            const double err = error_rate(model, validation);
            history.checkpoints.push_back({it, err});
            if (history.checkpoints.size() == 1 || err < history.best_validation_error) {
                history.best_validation_error = err;
                history.best_iteration = it;
                best = model.snapshot();
            }
            if (it == cfg.max_iterations) history.final_validation_error = err;
        }
    }
    model.restore(best);
    return {std::move(model), std::move(history)};
}

}  // namespace gearnet
