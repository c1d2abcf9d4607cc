#pragma once

#include "gearnet/lstm.hpp"
#include "gearnet/tensor.hpp"
#include "oracles.hpp"

#include <random>

namespace testing {

inline gearnet::Tensor random_tensor(gearnet::Shape shape, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    gearnet::Tensor t(std::move(shape));
    for (auto& v : t.data()) v = dist(rng);
    return t;
}

inline double max_abs_diff(const gearnet::Tensor& a, const gearnet::Tensor& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline oracle::Mat to_mat(const gearnet::Tensor& t) {
    oracle::Mat m(t.dim(0), oracle::Vec(t.dim(1)));
    for (std::size_t i = 0; i < t.dim(0); ++i)
        for (std::size_t j = 0; j < t.dim(1); ++j) m[i][j] = t(i, j);
    return m;
}

inline oracle::Vec to_vec(const gearnet::Tensor& t) { return {t.data().begin(), t.data().end()}; }

inline gearnet::LstmWeights random_lstm(std::size_t units, std::size_t inputs, gearnet::LstmVariant variant,
                                        std::mt19937_64& rng, double scale = 0.8) {
    auto w = gearnet::LstmWeights::zeros(units, inputs, variant);
    for (auto& [name, t] : w.named()) *t = random_tensor(t->shape(), rng, scale);
    return w;
}

inline oracle::Cell to_cell(const gearnet::LstmWeights& w, bool sigmoid_candidate = false) {
    oracle::Cell cell;
    cell.H = w.units();
    cell.C = w.inputs();
    const gearnet::Tensor* wx[4] = {&w.W_xi, &w.W_xf, &w.W_xo, &w.W_xc};
    const gearnet::Tensor* wh[4] = {&w.W_hi, &w.W_hf, &w.W_ho, &w.W_hc};
    const gearnet::Tensor* b[4] = {&w.b_i, &w.b_f, &w.b_o, &w.b_c};
    for (int g = 0; g < 4; ++g) {
        cell.wx[g] = to_mat(*wx[g]);
        cell.wh[g] = to_mat(*wh[g]);
        cell.b[g] = to_vec(*b[g]);
    }
    if (w.p_i) {
        cell.peephole = true;
        cell.p[0] = to_vec(*w.p_i);
        cell.p[1] = to_vec(*w.p_f);
        cell.p[2] = to_vec(*w.p_o);
    }
    cell.sigmoid_candidate = sigmoid_candidate;
    return cell;
}

}  // namespace testing
