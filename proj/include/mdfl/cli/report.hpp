#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mdfl/sim/round_log.hpp"

namespace mdfl {

struct RunRecord {
    std::filesystem::path dir;
    RunSummary summary;
    std::vector<RoundLog> logs;
};

/// Reads summary.json and rounds.jsonl. A missing file is a SchemaError
/// naming the directory.
RunRecord load_run(const std::filesystem::path& dir);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // population
    int n = 0;
};

std::optional<MeanStd> mean_std(const std::vector<double>& xs);

struct ComparisonRow {
    std::string strategy;
    int runs = 0;
    MeanStd device_f1;  // personal F1 where the strategy has personal models, global otherwise
    MeanStd global_f1;
    MeanStd invalid;
    std::optional<MeanStd> device_f1_variance;
    std::optional<MeanStd> target_f1;
    std::optional<MeanStd> rounds_to_target;  // rounds completed, i.e. index + 1
    std::optional<MeanStd> time_to_target;
    std::optional<MeanStd> speedup_rounds;
    std::optional<MeanStd> speedup_time;
    int reached = 0;  // runs whose device series hit the target
};

struct ComparisonTable {
    std::string baseline;
    std::vector<ComparisonRow> rows;
};

/// Groups runs by strategy. For each seed the target is the baseline run's
/// final global F1; each run's device F1 series is scanned for it, and the
/// speedup is the baseline's rounds (or simulated seconds) to target over
/// the candidate's. Seeds where either side misses the target are left out
/// of the speedup; a strategy with none left shows "-". When no run uses
/// the baseline strategy, the first run's strategy becomes the baseline.
ComparisonTable compare_runs(const std::vector<RunRecord>& runs, const std::string& baseline);

std::string to_csv(const ComparisonTable& table);
std::string to_text(const ComparisonTable& table);

}  // namespace mdfl
