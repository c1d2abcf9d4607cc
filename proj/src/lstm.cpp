#include "gearnet/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gearnet {

namespace {

constexpr std::size_t kGates = 4;  // packed order: input, forget, output, candidate

double candidate_slope(double g, CandidateActivation a) {
    return a == CandidateActivation::tanh ? 1.0 - g * g : g * (1.0 - g);
}

Tensor uniform(Shape shape, double limit, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-limit, limit);
    Tensor t(std::move(shape));
    for (auto& v : t.data()) v = dist(rng);
    return t;
}

Tensor matvec(const Tensor& m, const Tensor& v) {
    if (v.rank() != 1) throw ShapeError("expected a vector, got " + format_shape(v.shape()));
    return matmul(m, v.reshaped({v.size(), 1})).reshaped({m.dim(0)});
}

void require_shape(const Tensor& t, const Shape& expected, const std::string& name) {
    if (t.shape() != expected) {
        throw ShapeError("LSTM weight " + name + " has shape " + format_shape(t.shape()) + ", expected " +
                         format_shape(expected));
    }
}

}  // namespace

const char* to_string(LstmVariant v) { return v == LstmVariant::peephole ? "peephole" : "standard"; }

const char* to_string(CandidateActivation a) { return a == CandidateActivation::tanh ? "tanh" : "sigmoid"; }

CandidateActivation parse_candidate_activation(const std::string& text) {
    if (text == "tanh") return CandidateActivation::tanh;
    if (text == "sigmoid") return CandidateActivation::sigmoid;
    throw std::invalid_argument("unknown candidate activation '" + text + "' (expected tanh or sigmoid)");
}

LstmWeights LstmWeights::zeros(std::size_t units, std::size_t inputs, LstmVariant variant) {
    LstmWeights w;
    for (auto* m : {&w.W_xi, &w.W_xf, &w.W_xo, &w.W_xc}) *m = Tensor({units, inputs});
    for (auto* m : {&w.W_hi, &w.W_hf, &w.W_ho, &w.W_hc}) *m = Tensor({units, units});
    for (auto* b : {&w.b_i, &w.b_f, &w.b_o, &w.b_c}) *b = Tensor({units});
    if (variant == LstmVariant::peephole) {
        w.p_i = Tensor({units});
        w.p_f = Tensor({units});
        w.p_o = Tensor({units});
    }
    return w;
}

LstmWeights LstmWeights::glorot(std::size_t units, std::size_t inputs, LstmVariant variant,
                                std::mt19937_64& rng) {
    LstmWeights w = zeros(units, inputs, variant);
    const double rx = std::sqrt(6.0 / static_cast<double>(inputs + units));
    const double rh = std::sqrt(6.0 / static_cast<double>(units + units));
    for (auto* m : {&w.W_xi, &w.W_xf, &w.W_xo, &w.W_xc}) *m = uniform({units, inputs}, rx, rng);
    for (auto* m : {&w.W_hi, &w.W_hf, &w.W_ho, &w.W_hc}) *m = uniform({units, units}, rh, rng);
    w.b_f.fill(1.0);
    return w;
}

void LstmWeights::check(LstmVariant variant) const {
    if (b_i.rank() != 1 || W_xi.rank() != 2) throw ShapeError("LSTM weights are not initialised");
    const std::size_t h = units(), c = inputs();
    const std::pair<const Tensor*, const char*> inputs_to_gates[] = {
        {&W_xi, "W_xi"}, {&W_xf, "W_xf"}, {&W_xo, "W_xo"}, {&W_xc, "W_xc"}};
    for (auto [m, name] : inputs_to_gates) require_shape(*m, {h, c}, name);
    const std::pair<const Tensor*, const char*> hidden_to_gates[] = {
        {&W_hi, "W_hi"}, {&W_hf, "W_hf"}, {&W_ho, "W_ho"}, {&W_hc, "W_hc"}};
    for (auto [m, name] : hidden_to_gates) require_shape(*m, {h, h}, name);
    const std::pair<const Tensor*, const char*> biases[] = {{&b_i, "b_i"}, {&b_f, "b_f"}, {&b_o, "b_o"}, {&b_c, "b_c"}};
    for (auto [b, name] : biases) require_shape(*b, {h}, name);

    const bool has_peepholes = p_i && p_f && p_o;
    if (variant == LstmVariant::peephole) {
        if (!has_peepholes) throw ShapeError("peephole variant requires p_i, p_f and p_o");
        require_shape(*p_i, {h}, "p_i");
        require_shape(*p_f, {h}, "p_f");
        require_shape(*p_o, {h}, "p_o");
    } else if (p_i || p_f || p_o) {
        throw ShapeError("standard variant must not carry peephole vectors");
    }
}

std::vector<std::pair<std::string, Tensor*>> LstmWeights::named() {
    std::vector<std::pair<std::string, Tensor*>> out = {
        {"W_xi", &W_xi}, {"W_xf", &W_xf}, {"W_xo", &W_xo}, {"W_xc", &W_xc}, {"W_hi", &W_hi}, {"W_hf", &W_hf},
        {"W_ho", &W_ho}, {"W_hc", &W_hc}, {"b_i", &b_i},   {"b_f", &b_f},   {"b_o", &b_o},   {"b_c", &b_c}};
    if (p_i) out.emplace_back("p_i", &*p_i);
    if (p_f) out.emplace_back("p_f", &*p_f);
    if (p_o) out.emplace_back("p_o", &*p_o);
    return out;
}

std::vector<std::pair<std::string, const Tensor*>> LstmWeights::named() const {
    std::vector<std::pair<std::string, const Tensor*>> out;
    for (auto& [name, t] : const_cast<LstmWeights*>(this)->named()) out.emplace_back(name, t);
    return out;
}

LstmState LstmState::zeros(std::size_t units) { return {Tensor({units}), Tensor({units})}; }

LstmState lstm_step(const Tensor& x, const LstmState& state, const LstmWeights& w, LstmVariant variant,
                    CandidateActivation candidate) {
    w.check(variant);
    const std::size_t h = w.units();
    if (x.shape() != Shape{w.inputs()}) {
        throw ShapeError("lstm_step: input " + format_shape(x.shape()) + " does not match " +
                         std::to_string(w.inputs()) + " inputs");
    }
    if (state.h.shape() != Shape{h} || state.c.shape() != Shape{h}) {
        throw ShapeError("lstm_step: state shapes " + format_shape(state.h.shape()) + "/" +
                         format_shape(state.c.shape()) + " do not match " + std::to_string(h) + " units");
    }
    if (!state.h.all_finite() || !state.c.all_finite() || !x.all_finite()) {
        throw std::domain_error("lstm_step: non-finite input or state");
    }

    auto pre = [&](const Tensor& wx, const Tensor& wh, const Tensor& b) {
        return add(add(matvec(wx, x), matvec(wh, state.h)), b);
    };
    Tensor zi = pre(w.W_xi, w.W_hi, w.b_i);
    Tensor zf = pre(w.W_xf, w.W_hf, w.b_f);
    Tensor zo = pre(w.W_xo, w.W_ho, w.b_o);
    Tensor zg = pre(w.W_xc, w.W_hc, w.b_c);
    if (variant == LstmVariant::peephole) {
        zi = add(zi, hadamard(*w.p_i, state.c));
        zf = add(zf, hadamard(*w.p_f, state.c));
    }
    const Tensor i = sigmoid(zi);
    const Tensor f = sigmoid(zf);
    const Tensor g = candidate == CandidateActivation::tanh ? tanh_act(zg) : sigmoid(zg);

    LstmState next;
    next.c = add(hadamard(f, state.c), hadamard(i, g));
    if (variant == LstmVariant::peephole) zo = add(zo, hadamard(*w.p_o, next.c));
    const Tensor o = sigmoid(zo);
    next.h = hadamard(o, tanh_act(next.c));
    return next;
}

LstmState lstm_run(const Tensor& X, const LstmWeights& w, LstmVariant variant, const LstmState& initial,
                   CandidateActivation candidate) {
    if (X.rank() != 2) throw ShapeError("lstm_run: expected a [T x C] sequence, got " + format_shape(X.shape()));
    const std::size_t steps = X.dim(0), channels = X.dim(1);
    LstmState state = initial;
    for (std::size_t t = 0; t < steps; ++t) {
        std::vector<double> row(X.ptr() + t * channels, X.ptr() + (t + 1) * channels);
        state = lstm_step(Tensor({channels}, std::move(row)), state, w, variant, candidate);
    }
    return state;
}

Tensor lstm_sequence(const Tensor& X, const LstmWeights& w, LstmVariant variant, CandidateActivation candidate) {
    w.check(variant);
    return lstm_run(X, w, variant, LstmState::zeros(w.units()), candidate).h;
}

std::pair<std::size_t, std::size_t> bilstm_split(std::size_t total) {
    if (total < 2) throw std::invalid_argument("bidirectional LSTM needs at least 2 units, got " + std::to_string(total));
    return {total / 2, total - total / 2};
}

Tensor bilstm_sequence(const Tensor& X, const LstmWeights& w_fwd, const LstmWeights& w_bwd,
                       CandidateActivation candidate) {
    if (X.rank() != 2) throw ShapeError("bilstm_sequence: expected a [T x C] sequence, got " + format_shape(X.shape()));
    const std::size_t steps = X.dim(0), channels = X.dim(1);
    Tensor reversed(X.shape());
    for (std::size_t t = 0; t < steps; ++t)
        for (std::size_t c = 0; c < channels; ++c) reversed(t, c) = X(steps - 1 - t, c);

    const Tensor hf = lstm_sequence(X, w_fwd, LstmVariant::standard, candidate);
    const Tensor hb = lstm_sequence(reversed, w_bwd, LstmVariant::standard, candidate);
    std::vector<double> joined(hf.data().begin(), hf.data().end());
    joined.insert(joined.end(), hb.data().begin(), hb.data().end());
    const std::size_t n = joined.size();
    return Tensor({n}, std::move(joined));
}

Tensor reverse_time(const Tensor& batch) {
    if (batch.rank() != 3) throw ShapeError("reverse_time: expected [B x T x C], got " + format_shape(batch.shape()));
    const std::size_t b_n = batch.dim(0), steps = batch.dim(1), channels = batch.dim(2);
    Tensor out(batch.shape());
    for (std::size_t b = 0; b < b_n; ++b)
        for (std::size_t t = 0; t < steps; ++t)
            for (std::size_t c = 0; c < channels; ++c) out(b, t, c) = batch(b, steps - 1 - t, c);
    return out;
}

// ---------------------------------------------------------------------------
// LstmLayer
// ---------------------------------------------------------------------------

LstmLayer::LstmLayer(LstmWeights weights, LstmVariant variant, CandidateActivation candidate)
    : weights_(std::move(weights)), variant_(variant), candidate_(candidate) {
    weights_.check(variant_);
    grads_ = LstmWeights::zeros(weights_.units(), weights_.inputs(), variant_);
}

Shape LstmLayer::output_shape(const Shape& input) const {
    if (input.size() != 3 || input[2] != weights_.inputs()) {
        throw ShapeError("LSTM layer expects [B x T x " + std::to_string(weights_.inputs()) + "], got " +
                         format_shape(input));
    }
    return {input[0], weights_.units()};
}

// Packs the gate weights into one [(H+C)×4H] matrix W so that all four
// gates of a step come from a single product [h(t-1), x(t)]·W.
void LstmLayer::pack_weights(std::vector<double>& w_cat, std::vector<double>& b_cat) const {
    const std::size_t units = weights_.units(), channels = weights_.inputs(), width = kGates * units;
    const Tensor* wx[kGates] = {&weights_.W_xi, &weights_.W_xf, &weights_.W_xo, &weights_.W_xc};
    const Tensor* wh[kGates] = {&weights_.W_hi, &weights_.W_hf, &weights_.W_ho, &weights_.W_hc};
    const Tensor* bias[kGates] = {&weights_.b_i, &weights_.b_f, &weights_.b_o, &weights_.b_c};
    w_cat.assign((units + channels) * width, 0.0);
    b_cat.assign(width, 0.0);
    for (std::size_t g = 0; g < kGates; ++g) {
        for (std::size_t h = 0; h < units; ++h) {
            const std::size_t col = g * units + h;
            for (std::size_t k = 0; k < units; ++k) w_cat[k * width + col] = (*wh[g])(h, k);
            for (std::size_t c = 0; c < channels; ++c) w_cat[(units + c) * width + col] = (*wx[g])(h, c);
            b_cat[col] = (*bias[g])[h];
        }
    }
}

Tensor LstmLayer::forward(const Tensor& input) {
    output_shape(input.shape());
    const std::size_t batch = input.dim(0), steps = input.dim(1), channels = input.dim(2);
    const std::size_t units = weights_.units(), width = kGates * units, aug = units + channels;
    const std::size_t state_size = batch * units, block = batch * width;
    const bool peep = variant_ == LstmVariant::peephole;
    const bool tanh_candidate = candidate_ == CandidateActivation::tanh;

    std::vector<double> w_cat, b_cat;
    pack_weights(w_cat, b_cat);

    // Reuse the previous call's buffers; fresh multi-megabyte allocations
    // would page-fault on every mini-batch.
    Cache cache = cache_ ? std::move(*cache_) : Cache{};
    cache_.reset();
    cache.batch = batch;
    cache.steps = steps;
    cache.augmented.resize(steps * batch * aug);
    cache.gates.resize(steps * block);
    cache.cells.resize((steps + 1) * state_size);
    cache.tanh_c.resize(steps * state_size);
    std::fill(cache.cells.begin(), cache.cells.begin() + static_cast<std::ptrdiff_t>(state_size), 0.0);
    std::vector<double> zo(peep ? state_size : 0);
    Tensor out({batch, units});

    for (std::size_t t = 0; t < steps; ++t) {
        double* hx = cache.augmented.data() + t * batch * aug;
        for (std::size_t b = 0; b < batch; ++b) {
            if (t == 0) std::fill(hx + b * aug, hx + b * aug + units, 0.0);
            const double* x = input.ptr() + (b * steps + t) * channels;
            std::copy(x, x + channels, hx + b * aug + units);
        }
        double* z = cache.gates.data() + t * block;
        for (std::size_t b = 0; b < batch; ++b) std::copy(b_cat.begin(), b_cat.end(), z + b * width);
        kernel::gemm_acc(hx, aug, w_cat.data(), width, z, width, batch, aug, width);

        const double* c_prev = cache.cells.data() + t * state_size;
        double* c_next = cache.cells.data() + (t + 1) * state_size;
        double* tc = cache.tanh_c.data() + t * state_size;

        // Every gate goes through one tanh pass: logistic gates use
        // sigmoid(x) = (1 + tanh(x/2)) / 2.
        const double g_scale = tanh_candidate ? 1.0 : 0.5;
        for (std::size_t b = 0; b < batch; ++b) {
            double* zb = z + b * width;
            if (peep) {
                for (std::size_t h = 0; h < units; ++h) {
                    zb[h] += (*weights_.p_i)[h] * c_prev[b * units + h];
                    zb[units + h] += (*weights_.p_f)[h] * c_prev[b * units + h];
                    zo[b * units + h] = zb[2 * units + h];
                }
            }
            for (std::size_t j = 0; j < 3 * units; ++j) zb[j] *= 0.5;
            for (std::size_t j = 3 * units; j < width; ++j) zb[j] *= g_scale;
        }
        kernel::tanh_inplace(z, block);
        for (std::size_t b = 0; b < batch; ++b) {
            double* zb = z + b * width;
            for (std::size_t j = 0; j < 3 * units; ++j) zb[j] = 0.5 * zb[j] + 0.5;
            if (!tanh_candidate)
                for (std::size_t j = 3 * units; j < width; ++j) zb[j] = 0.5 * zb[j] + 0.5;
            const double* cp = c_prev + b * units;
            double* cn = c_next + b * units;
            for (std::size_t h = 0; h < units; ++h) cn[h] = zb[units + h] * cp[h] + zb[h] * zb[3 * units + h];
        }
        if (peep) {
            for (std::size_t s = 0; s < state_size; ++s) zo[s] = 0.5 * (zo[s] + (*weights_.p_o)[s % units] * c_next[s]);
            kernel::tanh_inplace(zo.data(), state_size);
            for (std::size_t b = 0; b < batch; ++b)
                for (std::size_t h = 0; h < units; ++h) z[b * width + 2 * units + h] = 0.5 * zo[b * units + h] + 0.5;
        }
        std::copy(c_next, c_next + state_size, tc);
        kernel::tanh_inplace(tc, state_size);

        double* h_next = t + 1 < steps ? cache.augmented.data() + (t + 1) * batch * aug : out.ptr();
        const std::size_t h_stride = t + 1 < steps ? aug : units;
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t h = 0; h < units; ++h)
                h_next[b * h_stride + h] = z[b * width + 2 * units + h] * tc[b * units + h];
    }
    if (steps == 0) out.fill(0.0);
    cache_ = std::move(cache);
    return out;
}

Tensor LstmLayer::backward(const Tensor& grad_output) {
    if (!cache_) throw MissingForwardCache("LSTM backward called without a forward pass");
    const Cache& cache = *cache_;
    const std::size_t batch = cache.batch, steps = cache.steps, channels = weights_.inputs();
    const std::size_t units = weights_.units(), width = kGates * units, aug = units + channels;
    const std::size_t state_size = batch * units, block = batch * width;
    if (grad_output.shape() != Shape{batch, units}) {
        throw ShapeError("LSTM backward: gradient " + format_shape(grad_output.shape()) + " does not match output " +
                         format_shape({batch, units}));
    }
    const bool peep = variant_ == LstmVariant::peephole;

    std::vector<double> w_cat, b_cat;
    pack_weights(w_cat, b_cat);
    std::vector<double> w_cat_t(width * aug);  // [4H×(H+C)]
    for (std::size_t k = 0; k < aug; ++k)
        for (std::size_t j = 0; j < width; ++j) w_cat_t[j * aug + k] = w_cat[k * width + j];

    std::vector<double> dw(aug * width, 0.0), db(width, 0.0);
    std::vector<double> dpi(units, 0.0), dpf(units, 0.0), dpo(units, 0.0);
    std::vector<double> dh(grad_output.data().begin(), grad_output.data().end());
    std::vector<double> dc(state_size, 0.0), dz(block), dhx(batch * aug);
    Tensor grad_input({batch, steps, channels});

    for (std::size_t t = steps; t-- > 0;) {
        const double* gates = cache.gates.data() + t * block;
        const double* c_prev = cache.cells.data() + t * state_size;
        const double* c_cur = cache.cells.data() + (t + 1) * state_size;
        const double* tc = cache.tanh_c.data() + t * state_size;
        for (std::size_t b = 0; b < batch; ++b) {
            const double* gb = gates + b * width;
            double* dzb = dz.data() + b * width;
            for (std::size_t h = 0; h < units; ++h) {
                const std::size_t s = b * units + h;
                const double i = gb[h], f = gb[units + h], o = gb[2 * units + h], g = gb[3 * units + h];
                const double dzo = dh[s] * tc[s] * o * (1.0 - o);
                double dcs = dc[s] + dh[s] * o * (1.0 - tc[s] * tc[s]);
                if (peep) dcs += dzo * (*weights_.p_o)[h];
                const double dzi = dcs * g * i * (1.0 - i);
                const double dzf = dcs * c_prev[s] * f * (1.0 - f);
                const double dzg = dcs * i * candidate_slope(g, candidate_);
                double dc_prev = dcs * f;
                if (peep) {
                    dc_prev += dzi * (*weights_.p_i)[h] + dzf * (*weights_.p_f)[h];
                    dpi[h] += dzi * c_prev[s];
                    dpf[h] += dzf * c_prev[s];
                    dpo[h] += dzo * c_cur[s];
                }
                dc[s] = dc_prev;
                dzb[h] = dzi;
                dzb[units + h] = dzf;
                dzb[2 * units + h] = dzo;
                dzb[3 * units + h] = dzg;
            }
        }
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t j = 0; j < width; ++j) db[j] += dz[b * width + j];

        const double* hx = cache.augmented.data() + t * batch * aug;
        kernel::gemm_at_b_acc(hx, aug, dz.data(), width, dw.data(), width, aug, batch, width);
        std::fill(dhx.begin(), dhx.end(), 0.0);
        kernel::gemm_acc(dz.data(), width, w_cat_t.data(), aug, dhx.data(), aug, batch, width, aug);
        for (std::size_t b = 0; b < batch; ++b) {
            std::copy(dhx.begin() + static_cast<std::ptrdiff_t>(b * aug),
                      dhx.begin() + static_cast<std::ptrdiff_t>(b * aug + units), dh.begin() + static_cast<std::ptrdiff_t>(b * units));
            std::copy(dhx.begin() + static_cast<std::ptrdiff_t>(b * aug + units),
                      dhx.begin() + static_cast<std::ptrdiff_t>((b + 1) * aug), grad_input.ptr() + (b * steps + t) * channels);
        }
    }

    Tensor* gx[kGates] = {&grads_.W_xi, &grads_.W_xf, &grads_.W_xo, &grads_.W_xc};
    Tensor* gh[kGates] = {&grads_.W_hi, &grads_.W_hf, &grads_.W_ho, &grads_.W_hc};
    Tensor* gbias[kGates] = {&grads_.b_i, &grads_.b_f, &grads_.b_o, &grads_.b_c};
    for (std::size_t g = 0; g < kGates; ++g) {
        for (std::size_t h = 0; h < units; ++h) {
            const std::size_t col = g * units + h;
            for (std::size_t k = 0; k < units; ++k) (*gh[g])(h, k) += dw[k * width + col];
            for (std::size_t c = 0; c < channels; ++c) (*gx[g])(h, c) += dw[(units + c) * width + col];
            (*gbias[g])[h] += db[col];
        }
    }
    if (peep) {
        for (std::size_t h = 0; h < units; ++h) {
            (*grads_.p_i)[h] += dpi[h];
            (*grads_.p_f)[h] += dpf[h];
            (*grads_.p_o)[h] += dpo[h];
        }
    }
    return grad_input;
}

std::vector<ParamRef> LstmLayer::parameters() {
    std::vector<ParamRef> out;
    auto values = weights_.named();
    auto grads = grads_.named();
    for (std::size_t k = 0; k < values.size(); ++k) out.push_back({values[k].first, values[k].second, grads[k].second});
    return out;
}

std::unique_ptr<Layer> LstmLayer::clone() const {
    auto copy = std::make_unique<LstmLayer>(weights_, variant_, candidate_);
    copy->grads_ = grads_;
    return copy;
}

// ---------------------------------------------------------------------------
// BiLstmLayer
// ---------------------------------------------------------------------------

BiLstmLayer::BiLstmLayer(LstmWeights forward_weights, LstmWeights backward_weights, CandidateActivation candidate)
    : fwd_(std::move(forward_weights), LstmVariant::standard, candidate),
      bwd_(std::move(backward_weights), LstmVariant::standard, candidate) {
    if (fwd_.weights().inputs() != bwd_.weights().inputs()) {
        throw ShapeError("bidirectional LSTM directions read different input widths");
    }
}

Shape BiLstmLayer::output_shape(const Shape& input) const {
    const Shape f = fwd_.output_shape(input);
    return {f[0], f[1] + bwd_.weights().units()};
}

Tensor BiLstmLayer::forward(const Tensor& input) {
    const Tensor hf = fwd_.forward(input);
    const Tensor hb = bwd_.forward(reverse_time(input));
    const std::size_t batch = hf.dim(0), nf = hf.dim(1), nb = hb.dim(1);
    Tensor out({batch, nf + nb});
    for (std::size_t b = 0; b < batch; ++b) {
        std::copy_n(hf.ptr() + b * nf, nf, out.ptr() + b * (nf + nb));
        std::copy_n(hb.ptr() + b * nb, nb, out.ptr() + b * (nf + nb) + nf);
    }
    return out;
}

Tensor BiLstmLayer::backward(const Tensor& grad_output) {
    const std::size_t nf = fwd_.weights().units(), nb = bwd_.weights().units();
    if (grad_output.rank() != 2 || grad_output.dim(1) != nf + nb) {
        throw ShapeError("BLSTM backward: unexpected gradient shape " + format_shape(grad_output.shape()));
    }
    const std::size_t batch = grad_output.dim(0);
    Tensor gf({batch, nf}), gb({batch, nb});
    for (std::size_t b = 0; b < batch; ++b) {
        std::copy_n(grad_output.ptr() + b * (nf + nb), nf, gf.ptr() + b * nf);
        std::copy_n(grad_output.ptr() + b * (nf + nb) + nf, nb, gb.ptr() + b * nb);
    }
    Tensor dx = fwd_.backward(gf);
    const Tensor dx_rev = reverse_time(bwd_.backward(gb));
    for (std::size_t k = 0; k < dx.size(); ++k) dx[k] += dx_rev[k];
    return dx;
}

std::vector<ParamRef> BiLstmLayer::parameters() {
    std::vector<ParamRef> out;
    for (auto& p : fwd_.parameters()) out.push_back({"fwd." + p.name, p.value, p.grad});
    for (auto& p : bwd_.parameters()) out.push_back({"bwd." + p.name, p.value, p.grad});
    return out;
}

std::unique_ptr<Layer> BiLstmLayer::clone() const { return std::make_unique<BiLstmLayer>(*this); }

// ---------------------------------------------------------------------------

void Layer::zero_grad() {
    for (auto& p : parameters()) p.grad->fill(0.0);
}

std::size_t Layer::parameter_count() {
    std::size_t n = 0;
    for (auto& p : parameters()) n += p.value->size();
    return n;
}

}  // namespace gearnet
