#include "doctest.h"
#include "gearnet/gradcheck.hpp"
#include "gearnet/lstm.hpp"
#include "helpers.hpp"

#include <cmath>

using namespace gearnet;

namespace {

LstmWeights scalar_weights(LstmVariant variant) {
    auto w = LstmWeights::zeros(1, 1, variant);
    w.W_xi[0] = 0.3, w.W_xf[0] = -0.2, w.W_xo[0] = 0.7, w.W_xc[0] = 0.5;
    w.W_hi[0] = 0.1, w.W_hf[0] = 0.4, w.W_ho[0] = -0.3, w.W_hc[0] = 0.2;
    w.b_i[0] = 0.05, w.b_f[0] = 1.0, w.b_o[0] = -0.1, w.b_c[0] = 0.0;
    if (variant == LstmVariant::peephole) (*w.p_i)[0] = 0.2, (*w.p_f)[0] = -0.3, (*w.p_o)[0] = 0.4;
    return w;
}

// [T×C] rows as oracle input
oracle::Mat rows(const Tensor& X) { return testing::to_mat(X); }

}  // namespace

TEST_SUITE("lstm") {

TEST_CASE("zero weights give a zero state") {
    const auto w = LstmWeights::zeros(3, 2, LstmVariant::standard);
    const auto s = lstm_step(Tensor::vector({0.4, -2.0}), LstmState::zeros(3), w, LstmVariant::standard);
    CHECK(s.h == Tensor({3}));
    CHECK(s.c == Tensor({3}));
    std::mt19937_64 rng(1);
    CHECK(lstm_sequence(testing::random_tensor({6, 2}, rng), w, LstmVariant::standard) == Tensor({3}));
}

TEST_CASE("scalar trace against hand-computed values") {
    // reference values evaluated at 25 significant digits
    const Tensor X = Tensor::matrix({{0.5}, {-1.0}});
    SUBCASE("standard") {
        const auto w = scalar_weights(LstmVariant::standard);
        const auto s1 = lstm_step(Tensor::vector({0.5}), LstmState::zeros(1), w, LstmVariant::standard);
        CHECK(std::abs(s1.h[0] - 0.07525094579824453449156513) <= 1e-12);
        CHECK(std::abs(s1.c[0] - 0.1346646071658566895712193) <= 1e-12);
        const auto s2 = lstm_step(Tensor::vector({-1.0}), s1, w, LstmVariant::standard);
        CHECK(std::abs(s2.h[0] - -0.0285256174722944466491043) <= 1e-12);
        CHECK(std::abs(s2.c[0] - -0.09373358938479439147112534) <= 1e-12);
        CHECK(std::abs(lstm_sequence(X, w, LstmVariant::standard)[0] - -0.0285256174722944466491043) <= 1e-12);
    }
    SUBCASE("peephole") {
        const auto w = scalar_weights(LstmVariant::peephole);
        const auto s1 = lstm_step(Tensor::vector({0.5}), LstmState::zeros(1), w, LstmVariant::peephole);
        CHECK(std::abs(s1.h[0] - 0.07701929383381630788661064) <= 1e-12);
        CHECK(std::abs(s1.c[0] - 0.1346646071658566895712193) <= 1e-12);
        const auto s2 = lstm_step(Tensor::vector({-1.0}), s1, w, LstmVariant::peephole);
        CHECK(std::abs(s2.h[0] - -0.02887487208650226441187027) <= 1e-12);
        CHECK(std::abs(s2.c[0] - -0.09756484620441937490565182) <= 1e-12);
    }
}

TEST_CASE("step and sequence match the unrolled oracle") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t H = 1 + trial % 3, C = 1 + trial % 2, T = 1 + trial % 5;
        const auto variant = trial % 2 ? LstmVariant::peephole : LstmVariant::standard;
        const auto w = testing::random_lstm(H, C, variant, rng);
        const Tensor X = testing::random_tensor({T, C}, rng, 1.5);
        const auto ref = oracle::run(testing::to_cell(w), rows(X));
        const Tensor h = lstm_sequence(X, w, variant);
        for (std::size_t u = 0; u < H; ++u) CHECK(std::abs(h[u] - ref.h[u]) <= 1e-12);

        const auto s = lstm_run(X, w, variant, LstmState::zeros(H));
        for (std::size_t u = 0; u < H; ++u) CHECK(std::abs(s.c[u] - ref.c[u]) <= 1e-12);
    }
}

TEST_CASE("T=1 reduces to one step from zero state") {
    std::mt19937_64 rng(8);
    const auto w = testing::random_lstm(2, 2, LstmVariant::standard, rng);
    const Tensor x = testing::random_tensor({2}, rng);
    CHECK(lstm_sequence(x.reshaped({1, 2}), w, LstmVariant::standard) ==
          lstm_step(x, LstmState::zeros(2), w, LstmVariant::standard).h);
}

TEST_CASE("sigmoid candidate matches the oracle") {
    std::mt19937_64 rng(12);
    const auto w = testing::random_lstm(3, 2, LstmVariant::standard, rng);
    const Tensor X = testing::random_tensor({5, 2}, rng);
    const auto ref = oracle::run(testing::to_cell(w, true), rows(X));
    const Tensor h = lstm_sequence(X, w, LstmVariant::standard, CandidateActivation::sigmoid);
    for (std::size_t u = 0; u < 3; ++u) CHECK(std::abs(h[u] - ref.h[u]) <= 1e-12);
    CHECK(parse_candidate_activation("sigmoid") == CandidateActivation::sigmoid);
    CHECK_THROWS(parse_candidate_activation("relu"));
}

TEST_CASE("peepholes at zero reproduce the standard cell exactly") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const auto std_w = testing::random_lstm(3, 2, LstmVariant::standard, rng);
        auto peep_w = LstmWeights::zeros(3, 2, LstmVariant::peephole);
        for (auto& [name, t] : std_w.named())
            for (auto& [pname, pt] : peep_w.named())
                if (pname == name) *pt = *t;
        const Tensor X = testing::random_tensor({5, 2}, rng);
        CHECK(lstm_sequence(X, std_w, LstmVariant::standard) == lstm_sequence(X, peep_w, LstmVariant::peephole));

        LstmLayer a(std_w, LstmVariant::standard), b(peep_w, LstmVariant::peephole);
        const Tensor batch = testing::random_tensor({4, 5, 2}, rng);
        CHECK(a.forward(batch) == b.forward(batch));
    }
}

TEST_CASE("weights validate their shapes") {
    auto w = LstmWeights::zeros(2, 3, LstmVariant::standard);
    CHECK_NOTHROW(w.check(LstmVariant::standard));
    CHECK_THROWS_AS(w.check(LstmVariant::peephole), ShapeError);
    w.W_hc = Tensor({2, 3});
    CHECK_THROWS_AS(w.check(LstmVariant::standard), ShapeError);
    CHECK_THROWS_AS(lstm_step(Tensor::vector({1.0}), LstmState::zeros(2), LstmWeights::zeros(2, 3, LstmVariant::standard),
                              LstmVariant::standard),
                    ShapeError);
}

TEST_CASE("glorot initialisation") {
    std::mt19937_64 rng(3);
    const auto w = LstmWeights::glorot(4, 3, LstmVariant::peephole, rng);
    for (std::size_t u = 0; u < 4; ++u) {
        CHECK(w.b_f[u] == 1.0);
        CHECK(w.b_i[u] == 0.0);
        CHECK((*w.p_o)[u] == 0.0);
    }
    const double limit = std::sqrt(6.0 / (4 + 3));
    for (double v : w.W_xi.data()) CHECK(std::abs(v) <= limit);
}

TEST_CASE("batched layer matches the oracle per sample") {
    std::mt19937_64 rng(31);
    for (auto variant : {LstmVariant::standard, LstmVariant::peephole}) {
        for (auto cand : {CandidateActivation::tanh, CandidateActivation::sigmoid}) {
            const auto w = testing::random_lstm(3, 2, variant, rng);
            LstmLayer layer(w, variant, cand);
            const Tensor batch = testing::random_tensor({5, 4, 2}, rng, 2.0);
            const Tensor out = layer.forward(batch);
            REQUIRE(out.shape() == Shape{5, 3});
            for (std::size_t b = 0; b < 5; ++b) {
                oracle::Mat xs(4, oracle::Vec(2));
                for (std::size_t t = 0; t < 4; ++t)
                    for (std::size_t c = 0; c < 2; ++c) xs[t][c] = batch(b, t, c);
                const auto ref = oracle::run(testing::to_cell(w, cand == CandidateActivation::sigmoid), xs);
                for (std::size_t u = 0; u < 3; ++u) CHECK(std::abs(out(b, u) - ref.h[u]) <= 1e-12);
            }
        }
    }
}

TEST_CASE("layer at realistic size matches the free function") {
    std::mt19937_64 rng(32);
    const auto w = LstmWeights::glorot(50, 3, LstmVariant::standard, rng);
    LstmLayer layer(w, LstmVariant::standard);
    const Tensor batch = testing::random_tensor({3, 50, 3}, rng, 2.0);
    const Tensor out = layer.forward(batch);
    for (std::size_t b = 0; b < 3; ++b) {
        Tensor X({50, 3});
        for (std::size_t t = 0; t < 50; ++t)
            for (std::size_t c = 0; c < 3; ++c) X(t, c) = batch(b, t, c);
        const Tensor h = lstm_sequence(X, w, LstmVariant::standard);
        for (std::size_t u = 0; u < 50; ++u) CHECK(std::abs(out(b, u) - h[u]) <= 1e-12);
    }
}

TEST_CASE("backward without forward and zero upstream gradient") {
    std::mt19937_64 rng(5);
    LstmLayer layer(testing::random_lstm(2, 2, LstmVariant::peephole, rng), LstmVariant::peephole);
    CHECK_THROWS_AS(layer.backward(Tensor({1, 2})), MissingForwardCache);
    layer.forward(testing::random_tensor({2, 3, 2}, rng));
    layer.zero_grad();
    const Tensor gx = layer.backward(Tensor({2, 2}));
    CHECK(gx == Tensor({2, 3, 2}));
    for (const auto& p : layer.parameters())
        for (double v : p.grad->data()) CHECK(v == 0.0);
}

TEST_CASE("layer gradients pass finite differences") {
    std::mt19937_64 rng(6);
    for (auto variant : {LstmVariant::standard, LstmVariant::peephole}) {
        LstmLayer layer(testing::random_lstm(3, 2, variant, rng), variant);
        const Tensor input = testing::random_tensor({2, 4, 2}, rng);
        CHECK(check_layer(layer, input).passed());
        CHECK(check_input_gradient(layer, input).passed());
    }
}

TEST_CASE("bidirectional split") {
    CHECK(bilstm_split(50) == std::pair<std::size_t, std::size_t>{25, 25});
    CHECK(bilstm_split(25) == std::pair<std::size_t, std::size_t>{12, 13});
    CHECK(bilstm_split(35) == std::pair<std::size_t, std::size_t>{17, 18});
    CHECK_THROWS(bilstm_split(1));
}

TEST_CASE("bidirectional sequence") {
    std::mt19937_64 rng(41);
    const auto w = testing::random_lstm(2, 2, LstmVariant::standard, rng);
    // time-symmetric input, identical weights: both directions agree
    const Tensor X = Tensor::matrix({{0.3, -0.1}, {0.3, -0.1}, {0.3, -0.1}, {0.3, -0.1}});
    const Tensor h = bilstm_sequence(X, w, w);
    REQUIRE(h.size() == 4);
    for (std::size_t u = 0; u < 2; ++u) CHECK(h[u] == h[u + 2]);

    const auto wb = testing::random_lstm(3, 2, LstmVariant::standard, rng);
    const Tensor Y = testing::random_tensor({5, 2}, rng);
    const Tensor both = bilstm_sequence(Y, w, wb);
    oracle::Mat reversed = testing::to_mat(Y);
    std::reverse(reversed.begin(), reversed.end());
    const auto ref_f = oracle::run(testing::to_cell(w), testing::to_mat(Y));
    const auto ref_b = oracle::run(testing::to_cell(wb), reversed);
    for (std::size_t u = 0; u < 2; ++u) CHECK(std::abs(both[u] - ref_f.h[u]) <= 1e-12);
    for (std::size_t u = 0; u < 3; ++u) CHECK(std::abs(both[2 + u] - ref_b.h[u]) <= 1e-12);

    BiLstmLayer layer(w, wb);
    const Tensor out = layer.forward(Y.reshaped({1, 5, 2}));
    CHECK(out.shape() == Shape{1, 5});
    for (std::size_t k = 0; k < 5; ++k) CHECK(std::abs(out[k] - both[k]) <= 1e-12);
    CHECK(reverse_time(reverse_time(Y.reshaped({1, 5, 2}))) == Y.reshaped({1, 5, 2}));
}

}  // TEST_SUITE
