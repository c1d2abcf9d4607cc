// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Pass criterion numbers as arguments to run a subset.

#include "gearnet/cli.hpp"
#include "gearnet/data.hpp"
#include "gearnet/experiment.hpp"
#include "gearnet/gradient_suite.hpp"
#include "gearnet/layers.hpp"
#include "gearnet/lstm.hpp"
#include "gearnet/manifest.hpp"
#include "gearnet/model.hpp"
#include "gearnet/synth.hpp"
#include "helpers.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>

using namespace gearnet;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
    bool pass = true;
    std::string detail;
    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail = what;
        pass = pass && ok;
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// ---------------------------------------------------------------- 1

Outcome gradient_suite() {
    Outcome o;
    const auto start = Clock::now();
    const std::size_t seeds = 10;
    double worst = 0.0;
    std::map<std::string, std::size_t> reports;
    for (const auto& r : run_gradient_suite("all", seeds)) {
        ++reports[r.layer];
        worst = std::max({worst, r.parameters.max_relative_error(), r.input.max_relative_error()});
        o.require(r.parameters.passed() && r.input.passed(),
                  r.layer + " seed " + std::to_string(r.seed) + " exceeds 1e-4");
        o.require(r.layer == "maxpool1d" || !r.parameters.entries.empty(), r.layer + " checked no parameters");
    }
    for (const char* required : {"dense", "conv1d", "lstm", "lstm-p", "blstm", "xent"})
        o.require(reports[required] == seeds, std::string(required) + " has fewer than 10 seeds");
    const double elapsed = seconds_since(start);
    o.require(elapsed < 120.0, "runtime " + fmt("%.1f", elapsed) + " s exceeds 2 min");
    if (o.pass)
        o.detail = std::to_string(reports.size()) + " layer types x " + std::to_string(seeds) +
                   " seeds, max rel err " + fmt("%.2e", worst) + ", " + fmt("%.1f", elapsed) + " s";
    return o;
}

// ---------------------------------------------------------------- 2

Outcome lstm_oracle() {
    Outcome o;
    std::mt19937_64 rng(20240601);
    double worst = 0.0;
    std::size_t cases = 0;
    for (std::size_t H = 1; H <= 3; ++H)
        for (std::size_t C = 1; C <= 2; ++C)
            for (std::size_t T = 1; T <= 5; ++T)
                for (auto variant : {LstmVariant::standard, LstmVariant::peephole})
                    for (int rep = 0; rep < 3; ++rep, ++cases) {
                        const auto w = testing::random_lstm(H, C, variant, rng, 1.0);
                        const Tensor X = testing::random_tensor({T, C}, rng, 2.0);
                        const auto cell = testing::to_cell(w);

                        // step by step from a random state
                        LstmState s{testing::random_tensor({H}, rng), testing::random_tensor({H}, rng)};
                        oracle::State ref{testing::to_vec(s.h), testing::to_vec(s.c)};
                        for (std::size_t t = 0; t < T; ++t) {
                            Tensor x({C});
                            for (std::size_t c = 0; c < C; ++c) x[c] = X(t, c);
                            s = lstm_step(x, s, w, variant);
                            ref = oracle::step(cell, testing::to_vec(x), ref);
                            for (std::size_t u = 0; u < H; ++u) {
                                worst = std::max({worst, std::abs(s.h[u] - ref.h[u]), std::abs(s.c[u] - ref.c[u])});
                            }
                        }

                        const Tensor h = lstm_sequence(X, w, variant);
                        const auto seq = oracle::run(cell, testing::to_mat(X));
                        LstmLayer layer(w, variant);
                        const Tensor batched = layer.forward(X.reshaped({1, T, C}));
                        for (std::size_t u = 0; u < H; ++u)
                            worst = std::max({worst, std::abs(h[u] - seq.h[u]), std::abs(batched[u] - seq.h[u])});

                        if (variant == LstmVariant::standard) {
                            auto zero_peep = LstmWeights::zeros(H, C, LstmVariant::peephole);
                            for (auto& [name, t] : w.named())
                                for (auto& [pname, pt] : zero_peep.named())
                                    if (pname == name) *pt = *t;
                            o.require(lstm_sequence(X, zero_peep, LstmVariant::peephole) == h,
                                      "zero-peephole sequence differs from standard");
                            LstmLayer peep_layer(zero_peep, LstmVariant::peephole);
                            o.require(peep_layer.forward(X.reshaped({1, T, C})) == batched,
                                      "zero-peephole layer differs from standard");
                        }
                    }
    o.require(worst <= 1e-12, "max deviation " + fmt("%.2e", worst));
    if (o.pass) o.detail = std::to_string(cases) + " cases, max deviation " + fmt("%.2e", worst);
    return o;
}

// ---------------------------------------------------------------- 3

Outcome conv_oracle() {
    Outcome o;
    std::mt19937_64 rng(777);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t K = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
        const std::size_t C = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
        const std::size_t F = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
        const std::size_t T = std::uniform_int_distribution<std::size_t>(K, 60)(rng);
        ConvFilterBank bank{testing::random_tensor({F, K, C}, rng), testing::random_tensor({F}, rng)};
        const Tensor X = testing::random_tensor({T, C}, rng, 3.0);
        const Tensor y = conv1d_forward(X, bank);

        std::vector<oracle::Mat> w(F, oracle::Mat(K, oracle::Vec(C)));
        for (std::size_t f = 0; f < F; ++f)
            for (std::size_t k = 0; k < K; ++k)
                for (std::size_t c = 0; c < C; ++c) w[f][k][c] = bank.filters(f, k, c);
        const auto ref = oracle::conv1d(testing::to_mat(X), w, testing::to_vec(bank.biases));

        o.require(y.shape() == Shape{T - K + 1, F}, "output shape " + format_shape(y.shape()) + " for T=" +
                                                        std::to_string(T) + " K=" + std::to_string(K));
        if (!o.pass) return o;
        for (std::size_t t = 0; t < ref.size(); ++t)
            for (std::size_t f = 0; f < F; ++f) worst = std::max(worst, std::abs(y(t, f) - ref[t][f]));
    }
    o.require(worst <= 1e-12, "max deviation " + fmt("%.2e", worst));
    if (o.pass) o.detail = "50 cases, max deviation " + fmt("%.2e", worst);
    return o;
}

// ---------------------------------------------------------------- 4

Outcome windowing() {
    Outcome o;
    for (std::size_t n = 0; n <= 500; ++n) {
        const std::size_t expected = n < 50 ? 0 : (n - 50) / 25 + 1;
        const auto starts = oracle::window_starts(n, 50, 25);
        std::vector<Record> rec(n);
        for (std::size_t i = 0; i < n; ++i) rec[i] = {static_cast<std::int64_t>(i), 0, 0, 0, 2};
        const auto w = segment(rec);
        bool same_starts = w.size() == starts.size();
        for (std::size_t k = 0; same_starts && k < w.size(); ++k) same_starts = w[k].start == starts[k];
        o.require(window_count(n) == expected && starts.size() == expected && same_starts,
                  "count mismatch at N=" + std::to_string(n));
    }

    // synthetic stream cut to the recorded total
    SynthSpec spec;
    spec.skiers = 300;
    auto records = synth_generate(spec, 416737);
    o.require(records.size() >= 416737, "synthetic stream too short");
    if (!o.pass) return o;
    records.resize(416737);
    SegmentStats stats;
    const auto windows = segment(records, 50, 25, &stats);
    o.require(stats.candidates == 16668, "416,737 records gave " + std::to_string(stats.candidates) + " windows");
    o.require(windows.size() + stats.ties == 16668, "labelled plus tie windows do not add up to 16,668");
    auto single_gear = records;
    for (auto& r : single_gear) r.gear = 3;
    o.require(segment(single_gear).size() == 16668, "single-gear stream did not give 16,668 windows");

    // consecutive windows share exactly 25 samples
    for (std::size_t k = 0; k + 1 < windows.size(); ++k) {
        const auto& a = windows[k];
        const auto& b = windows[k + 1];
        if (b.start != a.start + 25) continue;  // a tie window was dropped in between
        bool shared = true;
        for (std::size_t t = 0; t < 25; ++t)
            for (std::size_t c = 0; c < 3; ++c) shared = shared && a.samples(25 + t, c) == b.samples(t, c);
        o.require(shared, "windows " + std::to_string(k) + "/" +
                                                                     std::to_string(k + 1) + " overlap wrongly");
    }

    // sample indices used by each partition are disjoint
    const auto ds = split(windows);
    std::vector<int> owner(records.size(), -1);
    std::size_t leaks = 0;
    const std::vector<Window>* parts[] = {&ds.train, &ds.validation, &ds.test};
    for (int p = 0; p < 3; ++p)
        for (const auto& w : *parts[p])
            for (std::size_t i = w.start; i < w.start + w.length(); ++i) {
                if (owner[i] != -1 && owner[i] != p) ++leaks;
                owner[i] = p;
            }
    o.require(leaks == 0, std::to_string(leaks) + " samples leak across partitions");
    if (o.pass)
        o.detail = "N in [0,500] ok; 416,737 records -> 16,668 windows (" + std::to_string(stats.ties) +
                   " ties dropped); split " + std::to_string(ds.train.size()) + "/" +
                   std::to_string(ds.validation.size()) + "/" + std::to_string(ds.test.size()) + ", no leakage";
    return o;
}

// ---------------------------------------------------------------- 5, 6, 7

struct EndToEnd {
    WindowedDataset ds;
    TrainConfig cfg;
    std::vector<ModelConfig> grid = {ModelConfig::lstm(Family::lstm_f, 50), ModelConfig::cnn(1, 20),
                                     ModelConfig::mlp(1, 30)};
    std::optional<ExperimentReport> first;
    double first_seconds = 0.0;

    EndToEnd() : ds(prepare_dataset(synth_generate(SynthSpec{}, 1))) {}

    const ExperimentReport& report() {
        if (!first) {
            const auto start = Clock::now();
            first = run_experiment(grid, ds, cfg);
            first_seconds = seconds_since(start);
        }
        return *first;
    }
};

EndToEnd& end_to_end() {
    static EndToEnd e;
    return e;
}

Outcome learnability() {
    Outcome o;
    auto& e = end_to_end();
    o.require(e.ds.train.size() >= 1950 && e.ds.train.size() <= 2050,
              "training partition has " + std::to_string(e.ds.train.size()) + " windows");
    o.require(e.cfg.max_iterations == 3000 && e.cfg.runs == 5, "training settings are not the defaults");
    const auto& rep = e.report();
    std::map<std::string, double> mean;
    for (const auto& s : rep.summaries()) mean[s.config.id()] = s.mean_test_error;
    const double lstm = mean["lstm-f-u50"], cnn = mean["cnn-c1-f20"], mlp = mean["mlp-l1-n30"];
    o.require(lstm <= 0.05, "LSTM-F mean test error " + fmt("%.4f", lstm));
    o.require(cnn <= 0.05, "CNN mean test error " + fmt("%.4f", cnn));
    o.require(mlp > lstm && mlp > cnn, "MLP error " + fmt("%.4f", mlp) + " not above both deep models");
    o.require(e.first_seconds < 900.0, "runtime " + fmt("%.0f", e.first_seconds) + " s exceeds 15 min");
    const std::string numbers = "train windows " + std::to_string(e.ds.train.size()) + "; mean test error lstm-f-u50 " +
                                fmt("%.4f", lstm) + ", cnn-c1-f20 " + fmt("%.4f", cnn) + ", mlp-l1-n30 " +
                                fmt("%.4f", mlp) + "; " + fmt("%.0f", e.first_seconds) + " s";
    o.detail = o.pass ? numbers : o.detail + " (" + numbers + ")";
    return o;
}

Outcome checkpointing() {
    Outcome o;
    const auto& rep = end_to_end().report();
    for (const auto& r : rep.rows) {
        o.require(r.ok(), r.config.id() + " run " + std::to_string(r.run) + " failed: " + r.failure);
        o.require(r.best_val_error <= r.final_val_error,
                  r.config.id() + " run " + std::to_string(r.run) + ": returned " + fmt("%.4f", r.best_val_error) +
                      " > final " + fmt("%.4f", r.final_val_error));
    }
    if (o.pass) o.detail = std::to_string(rep.rows.size()) + " runs, returned <= final validation error in each";
    return o;
}

Outcome determinism() {
    Outcome o;
    auto& e = end_to_end();
    const std::string a = report_csv(e.report());
    const auto start = Clock::now();
    EndToEnd again;
    const std::string b = report_csv(run_experiment(again.grid, again.ds, again.cfg));
    o.require(a == b, "report CSVs differ between identical runs");
    if (o.pass)
        o.detail = "report CSV identical (" + std::to_string(a.size()) + " bytes, checksum " + checksum(a) +
                   "), rerun " + fmt("%.0f", seconds_since(start)) + " s";
    return o;
}

// ---------------------------------------------------------------- 8

Outcome grid_integrity() {
    Outcome o;
    const auto grid = enumerate_grid();
    std::map<Family, std::size_t> per;
    std::set<std::string> ids;
    for (const auto& c : grid) {
        ++per[c.family];
        ids.insert(c.id());
    }
    o.require(grid.size() == 21 && ids.size() == 21, "grid has " + std::to_string(grid.size()) + " configs");
    o.require(per[Family::cnn] == 6 && per[Family::mlp] == 6 && per[Family::lstm_f] == 3 &&
                  per[Family::lstm_p] == 3 && per[Family::blstm] == 3,
              "family sizes differ from 6/3/3/3/6");

    o.require(bilstm_split(50) == std::pair<std::size_t, std::size_t>{25, 25}, "50 units do not split 25/25");
    for (std::size_t u = 3; u <= 101; u += 2) {
        const auto [f, b] = bilstm_split(u);
        o.require(f == u / 2 && b == u - u / 2, "odd split wrong for " + std::to_string(u));
    }
    Model blstm = build_model(ModelConfig::lstm(Family::blstm, 50), 1);
    const auto* layer = dynamic_cast<const BiLstmLayer*>(blstm.layers().front().get());
    o.require(layer && layer->forward_cell().weights().units() == 25 && layer->backward_cell().weights().units() == 25,
              "BLSTM-50 model is not 25+25");

    // command path, shortened to two updates per run
    const fs::path dir = fs::temp_directory_path() / "gearnet_acceptance_grid";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ostringstream out, err;
    const std::string data = (dir / "data.csv").string();
    int code = cli::run({"synth", "--out", data, "--skiers", "6", "--seed", "8"}, out, err);
    if (code == 0)
        code = cli::run({"experiment", "--data", data, "--grid", "full", "--runs", "5", "--iterations", "2",
                         "--validation-period", "1", "--out", (dir / "exp").string()},
                        out, err);
    o.require(code == 0, "experiment command exited " + std::to_string(code) + ": " + err.str());
    std::size_t rows = 0;
    if (code == 0) {
        const std::string csv = read_file(dir / "exp" / "report.csv");
        for (char c : csv) rows += c == '\n';
        rows -= 1;
    }
    o.require(rows == 105, "report has " + std::to_string(rows) + " rows");
    fs::remove_all(dir);
    if (o.pass) o.detail = "21 configs (6+3x3+6), 105 report rows, BLSTM 25/25 and floor/ceil splits";
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"gradient suite", gradient_suite},   {"LSTM oracle equivalence", lstm_oracle},
        {"conv oracle equivalence", conv_oracle}, {"windowing", windowing},
        {"end-to-end learnability", learnability}, {"checkpointing contract", checkpointing},
        {"determinism", determinism},         {"grid integrity", grid_integrity},
    };
    std::set<std::size_t> only;
    for (int i = 1; i < argc; ++i) only.insert(std::stoul(argv[i]));

    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        if (!only.empty() && !only.count(k + 1)) continue;
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::printf("criterion %zu %-26s %s  %s\n", k + 1, criteria[k].first, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
