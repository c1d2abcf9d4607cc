#pragma once

#include "gearnet/layer.hpp"
#include "gearnet/lstm.hpp"
#include "gearnet/manifest.hpp"
#include "gearnet/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace gearnet {

enum class Family { cnn, lstm_f, lstm_p, blstm, mlp };

const char* family_name(Family f);
Family parse_family(const std::string& name);
bool is_recurrent(Family f);

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr std::size_t kWindowLength = 50;
inline constexpr std::size_t kChannels = 3;
inline constexpr std::size_t kClasses = 2;

/// One cell of the architecture grid. Fields a family does not use are
/// ignored; values outside the architecture grid need `override_grid`.
struct ModelConfig {
    Family family = Family::lstm_f;
    std::size_t conv_layers = 1;
    std::size_t filters = 20;
    std::size_t filter_size = 10;
    std::size_t pool = 2;
    std::size_t full_layers = 1;
    std::size_t lstm_units = 50;
    std::size_t hidden_neurons = 1000;
    std::size_t batch_size = 100;
    CandidateActivation candidate = CandidateActivation::tanh;
    bool override_grid = false;
    std::size_t window = kWindowLength;
    std::size_t channels = kChannels;
    std::size_t classes = kClasses;

    static ModelConfig cnn(std::size_t conv_layers, std::size_t filters);
    static ModelConfig lstm(Family family, std::size_t units);
    static ModelConfig mlp(std::size_t layers, std::size_t neurons);

    /// Throws ConfigError for off-grid values (without override) or for
    /// windows too short for the stacked convolutions.
    void validate() const;

    /// Short identifier such as "cnn-c1-f20", "lstm-f-u50" or "mlp-l2-n100".
    std::string id() const;

    /// The family's grid parameter used for plotting (filters, units, neurons).
    std::size_t grid_value() const;

    KeyValues to_key_values() const;
    static ModelConfig from_key_values(const KeyValues& kv);

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Every grid configuration: CNN {1,2}×{20,40,50}, each LSTM family
/// {25,35,50} units, MLP {1,2}×{30,50,100}.
std::vector<ModelConfig> enumerate_grid();
std::vector<ModelConfig> enumerate_family(Family f);

/// A sequential classifier mapping [B×window×channels] to [B×classes] logits.
class Model {
public:
    Model(ModelConfig config, std::vector<std::unique_ptr<Layer>> layers);
    Model(const Model& other);
    Model& operator=(const Model& other);
    Model(Model&&) noexcept = default;
    Model& operator=(Model&&) noexcept = default;
    ~Model() = default;

    const ModelConfig& config() const { return config_; }
    const std::vector<std::unique_ptr<Layer>>& layers() const { return layers_; }
    std::vector<std::unique_ptr<Layer>>& layers() { return layers_; }

    Tensor forward(const Tensor& batch);
    Tensor backward(const Tensor& grad_logits);

    /// Parameters named "<index>.<layer kind>.<name>".
    std::vector<ParamRef> parameters();
    std::size_t parameter_count();
    void zero_grad();

    std::vector<Tensor> snapshot();
    void restore(const std::vector<Tensor>& values);

    /// Output shape of every layer for a batch of the given size.
    std::vector<Shape> stage_shapes(std::size_t batch) const;

    /// Per-channel input standardisation applied by callers before forward();
    /// empty when the model was never fitted to data.
    std::vector<double> input_mean;
    std::vector<double> input_std;

private:
    ModelConfig config_;
    std::vector<std::unique_ptr<Layer>> layers_;
};

Model build_model(const ModelConfig& config, std::uint64_t seed);

/// Class index of a single [window×channels] input; ties go to the lower index.
std::size_t predict(Model& model, const Tensor& window);
std::vector<std::size_t> predict_batch(Model& model, const Tensor& batch);

void save_model(const std::filesystem::path& path, Model& model);
Model load_model(const std::filesystem::path& path);

}  // namespace gearnet
