#pragma once

#include "gearnet/data.hpp"
#include "gearnet/model.hpp"
#include "gearnet/train.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gearnet {

struct RunResult {
    ModelConfig config;
    std::size_t run = 0;
    std::uint64_t seed = 0;
    double test_error = 0.0;
    double best_val_error = 0.0;
    std::size_t best_iteration = 0;
    double final_val_error = 0.0;
    std::string failure;  // non-empty when training diverged

    bool ok() const { return failure.empty(); }
};

struct ConfigSummary {
    ModelConfig config;
    double mean_test_error;  // NaN when any run failed
};

struct FamilyRank {
    Family family;
    std::string best_config;
    double best_mean_error;
};

struct ReferenceResult {
    std::string config_id;
    double error;
    const char* note;
};

/// Reference results on the original proprietary skiing recordings. They
/// are reported next to our numbers for orientation only.
const std::vector<ReferenceResult>& reference_results();

struct ExperimentReport {
    std::size_t runs = 0;
    std::vector<RunResult> rows;  // grid order, then run order

    std::vector<ConfigSummary> summaries() const;
    std::vector<FamilyRank> ranking() const;
};

/// Trains every configuration `cfg.runs` times with seeds cfg.seed + run and
/// evaluates each on the test partition. Cells are independent; up to `jobs`
/// run concurrently without affecting any result.
ExperimentReport run_experiment(const std::vector<ModelConfig>& grid, const WindowedDataset& ds,
                                const TrainConfig& cfg, std::size_t jobs = 1);

/// `family,config_id,run,seed,test_error,best_val_error,best_iteration`
std::string report_csv(const ExperimentReport& report);

/// Per family: `series,value,mean_test_error`, where `value` is the grid
/// parameter (filters, units or neurons) and `series` the remaining one.
std::vector<std::pair<Family, std::string>> plot_data_csvs(const ExperimentReport& report);

std::string summary_text(const ExperimentReport& report);

}  // namespace gearnet
