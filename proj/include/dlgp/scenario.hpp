#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dlgp/dataio.hpp"
#include "dlgp/types.hpp"

namespace dlgp {

// One report line. Timing columns are the only ones that may differ between
// reruns with identical inputs, config, and seed.
struct ReportRow {
    std::int64_t n = 0;
    int target = 0;
    std::optional<double> nmse;
    double nll = 0.0;
    double t_update_mean_s = 0.0;
    double t_predict_mean_s = 0.0;
    std::int64_t leaf_count = 0;
    std::int64_t division_count = 0;
    std::optional<double> overlap_ratio;
    double active_leaves_mean = 0.0;
};

std::string report_header();
std::string format_report_row(const ReportRow& row);

struct ScenarioOptions {
    // Runs one thread per target; timing columns are cleanest without it.
    bool parallel_targets = false;
};

// Called once per stream sample per target with the pre-update prediction.
using StreamObserver =
    std::function<void(std::int64_t sample, int target, const PredictiveDistribution&)>;

// Checkpoint protocol: streams the training rows in file order into one tree
// per target and evaluates the full test set at `checkpoints` uniformly spaced
// sample counts. Only the mean prediction is inside the timed region; the
// variances needed for the NLL are computed separately.
std::vector<ReportRow> run_checkpoint_scenario(const Dataset& train, const Dataset& test,
                                               const ExperimentConfig& cfg, std::ostream* out,
                                               const ScenarioOptions& options = {});

// Online protocol: for every sample, predict the target (mean and variance,
// both timed), score the running metrics, then update. Emits a row every 1000
// samples and at the end; timings are smoothed with a width-1000 moving
// average. Predictions from an empty tree fall back to the prior.
std::vector<ReportRow> run_online_scenario(const Dataset& stream, const ExperimentConfig& cfg,
                                           std::ostream* out,
                                           const ScenarioOptions& options = {},
                                           const StreamObserver& observer = nullptr);

}  // namespace dlgp
