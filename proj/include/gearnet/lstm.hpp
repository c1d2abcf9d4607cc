#pragma once

#include "gearnet/layer.hpp"
#include "gearnet/tensor.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <utility>

namespace gearnet {

enum class LstmVariant { standard, peephole };
enum class CandidateActivation { tanh, sigmoid };

const char* to_string(LstmVariant v);
const char* to_string(CandidateActivation a);
CandidateActivation parse_candidate_activation(const std::string& text);

/// Gate weights of one LSTM cell block with H units reading C inputs.
///
/// Input-to-gate matrices are [H×C], hidden-to-gate matrices [H×H], biases
/// and peepholes [H]. Peepholes exist only for the peephole variant: the
/// input and forget gates read c(t-1), the output gate reads c(t).
struct LstmWeights {
    Tensor W_xi, W_xf, W_xo, W_xc;
    Tensor W_hi, W_hf, W_ho, W_hc;
    Tensor b_i, b_f, b_o, b_c;
    std::optional<Tensor> p_i, p_f, p_o;

    static LstmWeights zeros(std::size_t units, std::size_t inputs, LstmVariant variant);
    /// Uniform Glorot weights, forget bias 1, other biases and peepholes 0.
    static LstmWeights glorot(std::size_t units, std::size_t inputs, LstmVariant variant, std::mt19937_64& rng);

    std::size_t units() const { return b_i.size(); }
    std::size_t inputs() const { return W_xi.dim(1); }
    LstmVariant variant() const { return p_i ? LstmVariant::peephole : LstmVariant::standard; }

    /// Validates shapes against the given variant; throws ShapeError.
    void check(LstmVariant variant) const;

    /// Named tensors in a fixed order (peepholes last when present).
    std::vector<std::pair<std::string, Tensor*>> named();
    std::vector<std::pair<std::string, const Tensor*>> named() const;
};

struct LstmState {
    Tensor h;
    Tensor c;

    static LstmState zeros(std::size_t units);
};

/// One time step of the cell; gates use the logistic function and the cell
/// output squashing is tanh. The candidate activation is tanh by default.
LstmState lstm_step(const Tensor& x, const LstmState& state, const LstmWeights& w, LstmVariant variant,
                    CandidateActivation candidate = CandidateActivation::tanh);

/// Runs the cell over the rows of X [T×C] starting from `initial`.
LstmState lstm_run(const Tensor& X, const LstmWeights& w, LstmVariant variant, const LstmState& initial,
                   CandidateActivation candidate = CandidateActivation::tanh);

/// Final hidden state h(T) of the cell run over X [T×C] from a zero state.
Tensor lstm_sequence(const Tensor& X, const LstmWeights& w, LstmVariant variant,
                     CandidateActivation candidate = CandidateActivation::tanh);

/// Forward/backward unit counts for a bidirectional block of `total` units.
std::pair<std::size_t, std::size_t> bilstm_split(std::size_t total);

/// [h_fwd(T); h_bwd(T)] where the backward cell reads X in reverse time order.
Tensor bilstm_sequence(const Tensor& X, const LstmWeights& w_fwd, const LstmWeights& w_bwd,
                       CandidateActivation candidate = CandidateActivation::tanh);

/// Batched LSTM over [B×T×C] producing the final hidden state [B×H].
class LstmLayer final : public Layer {
public:
    LstmLayer(LstmWeights weights, LstmVariant variant, CandidateActivation candidate = CandidateActivation::tanh);

    std::string kind() const override { return variant_ == LstmVariant::peephole ? "lstm-p" : "lstm"; }
    Shape output_shape(const Shape& input) const override;
    Tensor forward(const Tensor& input) override;
    Tensor backward(const Tensor& grad_output) override;
    std::vector<ParamRef> parameters() override;
    std::unique_ptr<Layer> clone() const override;

    const LstmWeights& weights() const { return weights_; }
    LstmWeights& weights() { return weights_; }
    const LstmWeights& gradients() const { return grads_; }

private:
    struct Cache {
        std::size_t batch = 0, steps = 0;
        std::vector<double> augmented;  // per step [B×(H+C)]: h(t-1) then x(t)
        std::vector<double> gates;      // per step [B×4H]: i, f, o, g after activation
        std::vector<double> cells;      // per step [B×H], index t+1; index 0 is c(0)=0
        std::vector<double> tanh_c;     // per step [B×H]
    };

    void pack_weights(std::vector<double>& w_cat, std::vector<double>& b_cat) const;

    LstmWeights weights_;
    LstmWeights grads_;
    LstmVariant variant_;
    CandidateActivation candidate_;
    std::optional<Cache> cache_;
};

/// Two independent LSTM layers, the second reading time-reversed input; the
/// output is the concatenation [h_fwd; h_bwd] with shape [B×(Hf+Hb)].
class BiLstmLayer final : public Layer {
public:
    BiLstmLayer(LstmWeights forward_weights, LstmWeights backward_weights,
                CandidateActivation candidate = CandidateActivation::tanh);

    std::string kind() const override { return "blstm"; }
    Shape output_shape(const Shape& input) const override;
    Tensor forward(const Tensor& input) override;
    Tensor backward(const Tensor& grad_output) override;
    std::vector<ParamRef> parameters() override;
    std::unique_ptr<Layer> clone() const override;

    const LstmLayer& forward_cell() const { return fwd_; }
    const LstmLayer& backward_cell() const { return bwd_; }

private:
    LstmLayer fwd_;
    LstmLayer bwd_;
};

Tensor reverse_time(const Tensor& batch);

}  // namespace gearnet
