#pragma once

#include "gearnet/data.hpp"
#include "gearnet/manifest.hpp"
#include "gearnet/model.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gearnet {

enum class OptimizerKind { sgd, momentum, adam };

const char* to_string(OptimizerKind k);
OptimizerKind parse_optimizer(const std::string& name);

struct TrainConfig {
    std::size_t max_iterations = 3000;  // one iteration = one mini-batch update
    std::size_t batch_size = 100;
    std::size_t runs = 5;
    OptimizerKind optimizer = OptimizerKind::adam;
    double learning_rate = 1e-3;
    std::size_t validation_period = 10;
    std::uint64_t seed = 1;
    double momentum = 0.9;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    /// Global-norm gradient clipping, applied to recurrent families only.
    double clip_norm = 5.0;

    void validate() const;
    KeyValues to_key_values() const;
};

struct Checkpoint {
    std::size_t iteration;
    double validation_error;
};

struct TrainHistory {
    std::vector<double> train_loss;       // per iteration
    std::vector<Checkpoint> checkpoints;  // one per validation evaluation
    std::size_t best_iteration = 0;
    double best_validation_error = 1.0;
    double final_validation_error = 1.0;  // of the weights after the last update

    std::string checkpoints_csv() const;
};

class TrainingDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// First-order optimizers over a model's parameter list.
class Optimizer {
public:
    Optimizer(const TrainConfig& cfg, std::vector<ParamRef> params);
    void step();

private:
    OptimizerKind kind_;
    double lr_, momentum_, beta1_, beta2_, eps_;
    std::vector<ParamRef> params_;
    std::vector<Tensor> first_, second_;
    std::size_t steps_ = 0;
};

/// Scales all gradients so their joint L2 norm is at most max_norm; returns
/// the norm before scaling.
double clip_gradients(std::span<const ParamRef> params, double max_norm);

struct TrainResult {
    Model model;
    TrainHistory history;
};

/// Mini-batch training with validation checkpoints. Validation runs every
/// validation_period iterations and after the final iteration; the returned
/// model holds the weights with the lowest validation error (earliest wins).
TrainResult train(Model model, const WindowedDataset& ds, const TrainConfig& cfg);

/// Fraction of windows whose predicted class differs from the label.
double evaluate(Model& model, std::span<const Window> windows);

}  // namespace gearnet
