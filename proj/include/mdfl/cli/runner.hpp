#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mdfl/cli/experiment_spec.hpp"
#include "mdfl/cli/report.hpp"
#include "mdfl/data/dataset.hpp"
#include "mdfl/heterogeneity/swd.hpp"

namespace mdfl {

inline constexpr const char* kProfileDirEnv = "MDFL_PROFILE_DIR";

struct RunOptions {
    std::optional<std::uint64_t> seed_override;
    std::optional<std::filesystem::path> output_dir;
    std::optional<int> threads;
};

struct RunOutcome {
    std::filesystem::path output_dir;
    std::vector<std::filesystem::path> run_dirs;
    ComparisonTable table;
};

/// The spec's dataset source, partitioned if the spec asks for it.
MultiDeviceDataset build_dataset(const ExperimentSpec& spec);

/// An exported dataset directory, or a raw sensor CSV read with the default
/// column names.
MultiDeviceDataset load_dataset_path(const std::filesystem::path& path, int window_len);

std::string heterogeneity_json(const HeterogeneityReport& report);

/// Loads, resolves and runs a spec file.
RunOutcome run_experiment(const std::filesystem::path& spec_path, const RunOptions& opts);

/// Runs an already resolved spec. Layout under output_dir:
///   spec.yaml, heterogeneity.json, comparison.csv,
///   <strategy>/seed_<s>/{spec.yaml, rounds.jsonl, summary.json}
/// rounds.jsonl is flushed after every round, so a failed run keeps the
/// rounds it finished.
RunOutcome run_experiment(ExperimentSpec spec, const RunOptions& opts);

}  // namespace mdfl
