#include "gearnet/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <thread>

namespace gearnet {

namespace {

std::string real(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string percent(double v) {
    if (std::isnan(v)) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * v);
    return buf;
}

RunResult run_cell(const ModelConfig& config, std::size_t run, const WindowedDataset& ds, TrainConfig cfg) {
    RunResult r;
    r.config = config;
    r.run = run;
    r.seed = cfg.seed + run;
    cfg.seed = r.seed;
    cfg.batch_size = config.batch_size;
    try {
        auto result = train(build_model(config, r.seed), ds, cfg);
        r.test_error = evaluate(result.model, ds.test);
        // measured on the returned weights rather than read back from the history
        r.best_val_error = evaluate(result.model, ds.validation);
        r.best_iteration = result.history.best_iteration;
        r.final_val_error = result.history.final_validation_error;
    } catch (const TrainingDiverged& e) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        r.test_error = r.best_val_error = r.final_val_error = nan;
        r.failure = e.what();
    }
    return r;
}

}  // namespace

const std::vector<ReferenceResult>& reference_results() {
    static const std::vector<ReferenceResult> refs = {
        {"lstm-f-u50", 0.016, "lowest error overall"},
        {"cnn-c1-f20", 0.024, "best CNN"},
        {"blstm-u25", 0.14, "highest error overall"},
    };
    return refs;
}

std::vector<ConfigSummary> ExperimentReport::summaries() const {
    std::vector<ConfigSummary> out;
    for (const auto& row : rows) {
        if (out.empty() || !(out.back().config == row.config)) out.push_back({row.config, 0.0});
        out.back().mean_test_error += row.ok() ? row.test_error : std::numeric_limits<double>::quiet_NaN();
    }
    for (auto& s : out) s.mean_test_error /= static_cast<double>(runs);
    return out;
}

std::vector<FamilyRank> ExperimentReport::ranking() const {
    std::vector<FamilyRank> out;
    for (const auto& s : summaries()) {
        auto it = std::find_if(out.begin(), out.end(), [&](const FamilyRank& f) { return f.family == s.config.family; });
        if (it == out.end()) {
            out.push_back({s.config.family, s.config.id(), s.mean_test_error});
        } else if (!std::isnan(s.mean_test_error) &&
                   (std::isnan(it->best_mean_error) || s.mean_test_error < it->best_mean_error)) {
            it->best_config = s.config.id();
            it->best_mean_error = s.mean_test_error;
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const FamilyRank& a, const FamilyRank& b) {
        if (std::isnan(a.best_mean_error)) return false;
        if (std::isnan(b.best_mean_error)) return true;
        return a.best_mean_error < b.best_mean_error;
    });
    return out;
}

ExperimentReport run_experiment(const std::vector<ModelConfig>& grid, const WindowedDataset& ds,
                                const TrainConfig& cfg, std::size_t jobs) {
    if (grid.empty()) throw std::invalid_argument("run_experiment: empty grid");
    cfg.validate();
    for (const auto& c : grid) c.validate();

    ExperimentReport report;
    report.runs = cfg.runs;
    const std::size_t cells = grid.size() * cfg.runs;
    report.rows.resize(cells);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < cells; k = next++) {
            report.rows[k] = run_cell(grid[k / cfg.runs], k % cfg.runs, ds, cfg);
        }
    };
    jobs = std::clamp<std::size_t>(jobs, 1, cells);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }
    return report;
}

std::string report_csv(const ExperimentReport& report) {
    std::string out = "family,config_id,run,seed,test_error,best_val_error,best_iteration\n";
    for (const auto& r : report.rows) {
        out += std::string(family_name(r.config.family)) + "," + r.config.id() + "," + std::to_string(r.run) + "," +
               std::to_string(r.seed) + "," + real(r.test_error) + "," + real(r.best_val_error) + "," +
               std::to_string(r.best_iteration) + "\n";
    }
    return out;
}

std::vector<std::pair<Family, std::string>> plot_data_csvs(const ExperimentReport& report) {
    std::vector<std::pair<Family, std::string>> out;
    for (const auto& s : report.summaries()) {
        const Family f = s.config.family;
        auto it = std::find_if(out.begin(), out.end(), [f](const auto& p) { return p.first == f; });
        if (it == out.end()) {
            out.emplace_back(f, "series,value,mean_test_error\n");
            it = out.end() - 1;
        }
        std::string series;
        switch (f) {
            case Family::cnn: series = "conv_layers=" + std::to_string(s.config.conv_layers); break;
            case Family::mlp: series = "full_layers=" + std::to_string(s.config.full_layers); break;
            default: series = "units"; break;
        }
        it->second += series + "," + std::to_string(s.config.grid_value()) + "," + real(s.mean_test_error) + "\n";
    }
    return out;
}

std::string summary_text(const ExperimentReport& report) {
    std::string out = "mean test error over " + std::to_string(report.runs) + " run(s)\n";
    for (const auto& s : report.summaries()) out += "  " + s.config.id() + "  " + percent(s.mean_test_error) + "\n";
    out += "family ranking (best configuration per family)\n";
    std::size_t rank = 1;
    for (const auto& f : report.ranking()) {
        out += "  " + std::to_string(rank++) + ". " + family_name(f.family) + "  " + f.best_config + "  " +
               percent(f.best_mean_error) + "\n";
    }
    out += "reference results on the original proprietary skiing recordings (not reproducible here):\n";
    for (const auto& r : reference_results()) out += "  " + r.config_id + "  " + percent(r.error) + "  " + r.note + "\n";
    return out;
}

}  // namespace gearnet
