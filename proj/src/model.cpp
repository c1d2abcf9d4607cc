#include "gearnet/model.hpp"

#include "gearnet/layers.hpp"
#include "gearnet/loss.hpp"
#include "gearnet/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <random>

namespace gearnet {

namespace {

constexpr const char* kConfigRecord = "__config__";

bool in(std::size_t v, std::initializer_list<std::size_t> allowed) {
    return std::find(allowed.begin(), allowed.end(), v) != allowed.end();
}

std::size_t parse_size(const std::string& key, const std::string& text) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ConfigError("config key '" + key + "' expects a non-negative integer, got '" + text + "'");
    }
    return v;
}

}  // namespace

const char* family_name(Family f) {
    switch (f) {
        case Family::cnn: return "cnn";
        case Family::lstm_f: return "lstm-f";
        case Family::lstm_p: return "lstm-p";
        case Family::blstm: return "blstm";
        case Family::mlp: return "mlp";
    }
    return "?";
}

Family parse_family(const std::string& name) {
    for (Family f : {Family::cnn, Family::lstm_f, Family::lstm_p, Family::blstm, Family::mlp})
        if (name == family_name(f)) return f;
    throw ConfigError("unknown model family '" + name + "' (expected cnn, lstm-f, lstm-p, blstm or mlp)");
}

bool is_recurrent(Family f) { return f == Family::lstm_f || f == Family::lstm_p || f == Family::blstm; }

ModelConfig ModelConfig::cnn(std::size_t conv_layers, std::size_t filters) {
    ModelConfig c;
    c.family = Family::cnn;
    c.conv_layers = conv_layers;
    c.filters = filters;
    c.hidden_neurons = 1000;
    c.full_layers = 1;
    return c;
}

ModelConfig ModelConfig::lstm(Family family, std::size_t units) {
    if (!is_recurrent(family)) throw ConfigError(std::string(family_name(family)) + " is not a recurrent family");
    ModelConfig c;
    c.family = family;
    c.lstm_units = units;
    return c;
}

ModelConfig ModelConfig::mlp(std::size_t layers, std::size_t neurons) {
    ModelConfig c;
    c.family = Family::mlp;
    c.full_layers = layers;
    c.hidden_neurons = neurons;
    return c;
}

void ModelConfig::validate() const {
    auto fail = [this](const std::string& why) { throw ConfigError(id() + ": " + why); };
    if (window == 0 || channels == 0 || classes < 2 || batch_size == 0) fail("window, channels, batch size must be positive and classes at least 2");
    if (!override_grid && batch_size != 100) fail("batch size must be 100 (use the override flag)");

    switch (family) {
        case Family::cnn: {
            if (conv_layers == 0 || filters == 0 || filter_size == 0 || pool == 0 || hidden_neurons == 0) {
                fail("CNN sizes must be positive");
            }
            if (!override_grid) {
                if (!in(conv_layers, {1, 2})) fail("conv layers must be 1 or 2");
                if (!in(filters, {20, 40, 50})) fail("filters must be 20, 40 or 50");
                if (filter_size != 10) fail("filter size must be 10");
                if (hidden_neurons != 1000) fail("CNN hidden neurons must be 1000");
                if (full_layers != 1) fail("CNN full layers must be 1");
                if (pool != 2) fail("pool must be 2");
            }
            std::size_t len = window;
            for (std::size_t k = 0; k < conv_layers; ++k) {
                if (len < filter_size) fail("window too short for " + std::to_string(conv_layers) + " conv layers");
                len = len - filter_size + 1;
                if (len < pool) fail("window too short for pooling after conv layer " + std::to_string(k + 1));
                len /= pool;
            }
            break;
        }
        case Family::lstm_f:
        case Family::lstm_p:
        case Family::blstm:
            if (lstm_units == 0) fail("LSTM units must be positive");
            if (family == Family::blstm && lstm_units < 2) fail("bidirectional LSTM needs at least 2 units");
            if (!override_grid && !in(lstm_units, {25, 35, 50})) fail("LSTM units must be 25, 35 or 50");
            break;
        case Family::mlp:
            if (full_layers == 0 || hidden_neurons == 0) fail("MLP sizes must be positive");
            if (!override_grid) {
                if (!in(full_layers, {1, 2})) fail("MLP full layers must be 1 or 2");
                if (!in(hidden_neurons, {30, 50, 100})) fail("MLP hidden neurons must be 30, 50 or 100");
            }
            break;
    }
}

std::string ModelConfig::id() const {
    std::string s;
    switch (family) {
        case Family::cnn: s = "cnn-c" + std::to_string(conv_layers) + "-f" + std::to_string(filters); break;
        case Family::lstm_f:
        case Family::lstm_p:
        case Family::blstm:
            s = std::string(family_name(family)) + "-u" + std::to_string(lstm_units);
            if (candidate == CandidateActivation::sigmoid) s += "-gsig";
            break;
        case Family::mlp: s = "mlp-l" + std::to_string(full_layers) + "-n" + std::to_string(hidden_neurons); break;
    }
    return s;
}

std::size_t ModelConfig::grid_value() const {
    switch (family) {
        case Family::cnn: return filters;
        case Family::mlp: return hidden_neurons;
        default: return lstm_units;
    }
}

KeyValues ModelConfig::to_key_values() const {
    KeyValues kv{{"family", family_name(family)}};
    auto put = [&kv](const char* k, std::size_t v) { kv.emplace_back(k, std::to_string(v)); };
    switch (family) {
        case Family::cnn:
            put("conv_layers", conv_layers);
            put("filters", filters);
            put("filter_size", filter_size);
            put("pool", pool);
            put("full_layers", full_layers);
            put("hidden_neurons", hidden_neurons);
            break;
        case Family::lstm_f:
        case Family::lstm_p:
        case Family::blstm:
            put("lstm_units", lstm_units);
            kv.emplace_back("candidate_activation", to_string(candidate));
            break;
        case Family::mlp:
            put("full_layers", full_layers);
            put("hidden_neurons", hidden_neurons);
            break;
    }
    put("batch_size", batch_size);
    put("window", window);
    put("channels", channels);
    put("classes", classes);
    kv.emplace_back("override", override_grid ? "1" : "0");
    return kv;
}

ModelConfig ModelConfig::from_key_values(const KeyValues& kv) {
    const auto m = to_map(kv);
    auto it = m.find("family");
    if (it == m.end()) throw ConfigError("model config lacks a 'family' key");
    ModelConfig c;
    c.family = parse_family(it->second);
    if (c.family == Family::mlp) c.hidden_neurons = 30;
    for (const auto& [k, v] : m) {
        if (k == "family") continue;
        if (k == "candidate_activation") {
            c.candidate = parse_candidate_activation(v);
        } else if (k == "override") {
            c.override_grid = v == "1" || v == "true";
        } else {
            const std::size_t n = parse_size(k, v);
            if (k == "conv_layers") c.conv_layers = n;
            else if (k == "filters") c.filters = n;
            else if (k == "filter_size") c.filter_size = n;
            else if (k == "pool") c.pool = n;
            else if (k == "full_layers") c.full_layers = n;
            else if (k == "lstm_units") c.lstm_units = n;
            else if (k == "hidden_neurons") c.hidden_neurons = n;
            else if (k == "batch_size") c.batch_size = n;
            else if (k == "window") c.window = n;
            else if (k == "channels") c.channels = n;
            else if (k == "classes") c.classes = n;
            else throw ConfigError("unknown model config key '" + k + "'");
        }
    }
    return c;
}

std::vector<ModelConfig> enumerate_family(Family f) {
    std::vector<ModelConfig> out;
    switch (f) {
        case Family::cnn:
            for (std::size_t layers : {1, 2})
                for (std::size_t filters : {20, 40, 50}) out.push_back(ModelConfig::cnn(layers, filters));
            break;
        case Family::mlp:
            for (std::size_t layers : {1, 2})
                for (std::size_t neurons : {30, 50, 100}) out.push_back(ModelConfig::mlp(layers, neurons));
            break;
        default:
            for (std::size_t units : {25, 35, 50}) out.push_back(ModelConfig::lstm(f, units));
            break;
    }
    return out;
}

std::vector<ModelConfig> enumerate_grid() {
    std::vector<ModelConfig> out;
    for (Family f : {Family::cnn, Family::lstm_f, Family::lstm_p, Family::blstm, Family::mlp}) {
        auto part = enumerate_family(f);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

Model::Model(ModelConfig config, std::vector<std::unique_ptr<Layer>> layers)
    : config_(std::move(config)), layers_(std::move(layers)) {}

Model::Model(const Model& other)
    : input_mean(other.input_mean), input_std(other.input_std), config_(other.config_) {
    layers_.reserve(other.layers_.size());
    for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Model& Model::operator=(const Model& other) {
    if (this != &other) {
        Model copy(other);
        *this = std::move(copy);
    }
    return *this;
}

Tensor Model::forward(const Tensor& batch) {
    Tensor x = batch;
    for (auto& layer : layers_) x = layer->forward(x);
    return x;
}

Tensor Model::backward(const Tensor& grad_logits) {
    Tensor g = grad_logits;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
}

std::vector<ParamRef> Model::parameters() {
    std::vector<ParamRef> out;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        for (auto& p : layers_[i]->parameters()) {
            out.push_back({std::to_string(i) + "." + layers_[i]->kind() + "." + p.name, p.value, p.grad});
        }
    }
    return out;
}

std::size_t Model::parameter_count() {
    std::size_t n = 0;
    for (auto& layer : layers_) n += layer->parameter_count();
    return n;
}

void Model::zero_grad() {
    for (auto& layer : layers_) layer->zero_grad();
}

std::vector<Tensor> Model::snapshot() {
    std::vector<Tensor> out;
    for (auto& p : parameters()) out.push_back(*p.value);
    return out;
}

void Model::restore(const std::vector<Tensor>& values) {
    auto params = parameters();
    if (params.size() != values.size()) throw ShapeError("snapshot does not match the model's parameter list");
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (params[k].value->shape() != values[k].shape()) {
            throw ShapeError("snapshot tensor for " + params[k].name + " has shape " +
                             format_shape(values[k].shape()) + ", expected " + format_shape(params[k].value->shape()));
        }
        *params[k].value = values[k];
    }
}

std::vector<Shape> Model::stage_shapes(std::size_t batch) const {
    std::vector<Shape> out;
    Shape s{batch, config_.window, config_.channels};
    for (const auto& layer : layers_) {
        s = layer->output_shape(s);
        out.push_back(s);
    }
    return out;
}

Model build_model(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    std::mt19937_64 rng(seed);
    std::vector<std::unique_ptr<Layer>> layers;
    std::size_t features = 0;

    switch (config.family) {
        case Family::cnn: {
            std::size_t len = config.window, channels = config.channels;
            for (std::size_t k = 0; k < config.conv_layers; ++k) {
                layers.push_back(std::make_unique<Conv1dLayer>(
                    ConvFilterBank::glorot(config.filters, config.filter_size, channels, rng)));
                layers.push_back(std::make_unique<ReluLayer>());
                layers.push_back(std::make_unique<MaxPool1dLayer>(config.pool));
                len = (len - config.filter_size + 1) / config.pool;
                channels = config.filters;
            }
            layers.push_back(std::make_unique<FlattenLayer>());
            layers.push_back(std::make_unique<DenseLayer>(
                DenseLayer::glorot(len * channels, config.hidden_neurons, Activation::relu, rng)));
            features = config.hidden_neurons;
            break;
        }
        case Family::lstm_f:
        case Family::lstm_p: {
            const auto variant = config.family == Family::lstm_p ? LstmVariant::peephole : LstmVariant::standard;
            layers.push_back(std::make_unique<LstmLayer>(
                LstmWeights::glorot(config.lstm_units, config.channels, variant, rng), variant, config.candidate));
            features = config.lstm_units;
            break;
        }
        case Family::blstm: {
            const auto [nf, nb] = bilstm_split(config.lstm_units);
            auto wf = LstmWeights::glorot(nf, config.channels, LstmVariant::standard, rng);
            auto wb = LstmWeights::glorot(nb, config.channels, LstmVariant::standard, rng);
            layers.push_back(std::make_unique<BiLstmLayer>(std::move(wf), std::move(wb), config.candidate));
            features = config.lstm_units;
            break;
        }
        case Family::mlp: {
            layers.push_back(std::make_unique<FlattenLayer>());
            std::size_t width = config.window * config.channels;
            for (std::size_t k = 0; k < config.full_layers; ++k) {
                layers.push_back(std::make_unique<DenseLayer>(
                    DenseLayer::glorot(width, config.hidden_neurons, Activation::relu, rng)));
                width = config.hidden_neurons;
            }
            features = width;
            break;
        }
    }
    layers.push_back(
        std::make_unique<DenseLayer>(DenseLayer::glorot(features, config.classes, Activation::identity, rng)));
    return Model(config, std::move(layers));
}

std::vector<std::size_t> predict_batch(Model& model, const Tensor& batch) {
    const auto& cfg = model.config();
    if (batch.rank() != 3 || batch.dim(1) != cfg.window || batch.dim(2) != cfg.channels) {
        throw ShapeError("model expects windows of shape [B x " + std::to_string(cfg.window) + " x " +
                         std::to_string(cfg.channels) + "], got " + format_shape(batch.shape()));
    }
    const Tensor logits = model.forward(batch);
    const std::size_t classes = logits.dim(1);
    std::vector<std::size_t> out(logits.dim(0));
    for (std::size_t b = 0; b < out.size(); ++b)
        out[b] = argmax(std::span<const double>(logits.ptr() + b * classes, classes));
    return out;
}

std::size_t predict(Model& model, const Tensor& window) {
    const auto& cfg = model.config();
    if (window.shape() != Shape{cfg.window, cfg.channels}) {
        throw ShapeError("model expects a window of shape " + format_shape({cfg.window, cfg.channels}) + ", got " +
                         format_shape(window.shape()));
    }
    return predict_batch(model, window.reshaped({1, cfg.window, cfg.channels}))[0];
}

void save_model(const std::filesystem::path& path, Model& model) {
    NamedTensors records;
    records.emplace_back(kConfigRecord, text_record(format_key_values(model.config().to_key_values())));
    if (!model.input_mean.empty()) {
        records.emplace_back("input.mean", Tensor({model.input_mean.size()}, model.input_mean));
        records.emplace_back("input.std", Tensor({model.input_std.size()}, model.input_std));
    }
    for (auto& p : model.parameters()) records.emplace_back(p.name, *p.value);
    save_gstk(path, records);
}

Model load_model(const std::filesystem::path& path) {
    const NamedTensors records = load_gstk(path);
    if (records.empty() || records.front().first != kConfigRecord) {
        throw FormatError(path.string() + ": model file must start with a " + kConfigRecord + " record");
    }
    const ModelConfig config = ModelConfig::from_key_values(parse_key_values(text_from_record(records.front().second)));
    Model model = build_model(config, 0);

    std::size_t next = 1;
    if (next < records.size() && records[next].first == "input.mean") {
        model.input_mean.assign(records[next].second.data().begin(), records[next].second.data().end());
        ++next;
        if (next >= records.size() || records[next].first != "input.std") {
            throw FormatError(path.string() + ": input.mean without input.std");
        }
        model.input_std.assign(records[next].second.data().begin(), records[next].second.data().end());
        ++next;
    }
    auto params = model.parameters();
    if (records.size() - next != params.size()) {
        throw FormatError(path.string() + ": expected " + std::to_string(params.size()) + " parameter records, found " +
                          std::to_string(records.size() - next));
    }
    for (auto& p : params) {
        const auto& [name, value] = records[next++];
        if (name != p.name || value.shape() != p.value->shape()) {
            throw FormatError(path.string() + ": record '" + name + "' " + format_shape(value.shape()) +
                              " does not match parameter '" + p.name + "' " + format_shape(p.value->shape()));
        }
        *p.value = value;
    }
    return model;
}

}  // namespace gearnet
