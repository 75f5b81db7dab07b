// mdfl: run multi-device federated learning experiments from a YAML spec.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "mdfl/cli/experiment_spec.hpp"
#include "mdfl/cli/report.hpp"
#include "mdfl/cli/runner.hpp"
#include "mdfl/data/dataset_io.hpp"
#include "mdfl/data/partition.hpp"
#include "mdfl/error.hpp"
#include "mdfl/heterogeneity/swd.hpp"

namespace {

int cmd_run(const std::string& spec, const std::optional<std::uint64_t>& seed, const std::string& out, int threads) {
    mdfl::RunOptions opts;
    opts.seed_override = seed;
    if (!out.empty()) opts.output_dir = out;
    if (threads > 0) opts.threads = threads;
    const auto outcome = mdfl::run_experiment(spec, opts);
    std::cout << mdfl::to_text(outcome.table);
    std::cout << "wrote " << outcome.run_dirs.size() << " runs under " << outcome.output_dir.string() << "\n";
    return 0;
}

int cmd_report(const std::vector<std::string>& dirs, const std::string& baseline, const std::string& csv) {
    std::vector<mdfl::RunRecord> runs;
    for (const auto& d : dirs) runs.push_back(mdfl::load_run(d));
    const auto table = mdfl::compare_runs(runs, baseline);
    std::cout << mdfl::to_text(table);
    if (!csv.empty()) {
        std::ofstream(csv) << mdfl::to_csv(table);
    }
    return 0;
}

int cmd_partition(const std::string& dataset, const std::string& spec, const std::string& out, int window_len) {
    const auto ds = mdfl::load_dataset_path(dataset, window_len);
    const auto cfg = mdfl::load_partition_config(spec);
    const auto parted = mdfl::partition(ds, cfg);
    const std::string dest = out.empty() ? dataset + ".partitioned" : out;
    mdfl::export_dataset(parted, dest);
    std::cout << "partitioned " << ds.users.size() << " users into " << parted.users.size() << " ("
              << parted.window_count() << " windows) -> " << dest << "\n";
    return 0;
}

int cmd_heterogeneity(const std::string& dataset, int window_len, int projections, std::uint64_t seed,
                      const std::string& summary, const std::string& out) {
    const auto ds = mdfl::load_dataset_path(dataset, window_len);
    const auto report =
        mdfl::heterogeneity_report(ds, projections, seed, mdfl::window_summary_from_string(summary));
    const auto json = mdfl::heterogeneity_json(report);
    if (out.empty()) {
        std::cout << json;
    } else {
        std::ofstream(out) << json;
    }
    return 0;
}

int cmd_synth(const std::string& spec_path, const std::string& out) {
    const auto spec = mdfl::load_experiment_spec(spec_path);
    const auto ds = mdfl::build_dataset(spec);
    mdfl::export_dataset(ds, out);
    std::cout << "wrote " << ds.users.size() << " users, " << ds.device_count() << " devices to " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-device federated learning simulator"};
    app.require_subcommand(1);
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "Only print warnings and errors");

    std::string spec_path, out_dir;
    std::optional<std::uint64_t> seed_override;
    int threads = 0;
    auto* run = app.add_subcommand("run", "Run every (strategy, seed) pair of an experiment spec");
    run->add_option("spec", spec_path, "Experiment spec (YAML)")->required()->check(CLI::ExistingFile);
    run->add_option("--seed-override", seed_override, "Run only this seed");
    run->add_option("--output-dir", out_dir, "Replace the spec's output_dir");
    run->add_option("--threads", threads, "Worker threads per round")->check(CLI::PositiveNumber);

    std::vector<std::string> run_dirs;
    std::string baseline = "fedavg_random", csv_out;
    auto* report = app.add_subcommand("report", "Compare finished run directories");
    report->add_option("dirs", run_dirs, "Run directories (each with summary.json and rounds.jsonl)")->required();
    report->add_option("--baseline", baseline, "Strategy whose final global F1 is the target");
    report->add_option("--csv", csv_out, "Also write the table as CSV");

    std::string dataset, part_spec;
    int window_len = 8;
    auto* part = app.add_subcommand("partition", "Split a dataset into more users by class rotation");
    part->add_option("dataset", dataset, "Exported dataset directory or raw sensor CSV")->required();
    part->add_option("spec", part_spec, "YAML with target_users (top level or under partition:)")
        ->required()
        ->check(CLI::ExistingFile);
    part->add_option("--output-dir", out_dir, "Where to export the result");
    part->add_option("--window-len", window_len, "Rows per window when reading a CSV");

    int projections = mdfl::kDefaultProjections;
    std::uint64_t het_seed = 0;
    std::string summary = "channel_mean", het_out;
    auto* het = app.add_subcommand("heterogeneity", "Sliced Wasserstein heterogeneity of a dataset");
    het->add_option("dataset", dataset, "Exported dataset directory or raw sensor CSV")->required();
    het->add_option("--window-len", window_len, "Rows per window when reading a CSV");
    het->add_option("--projections", projections, "Random projections")->check(CLI::PositiveNumber);
    het->add_option("--seed", het_seed, "Projection seed");
    het->add_option("--summary", summary, "channel_mean or flatten");
    het->add_option("--output", het_out, "Write JSON here instead of stdout");

    auto* synth = app.add_subcommand("synth", "Export the dataset an experiment spec describes");
    synth->add_option("spec", spec_path, "Experiment spec (YAML)")->required()->check(CLI::ExistingFile);
    synth->add_option("--output-dir", out_dir, "Destination directory")->required();

    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(quiet ? spdlog::level::warn : spdlog::level::info);

    try {
        if (*run) return cmd_run(spec_path, seed_override, out_dir, threads);
        if (*report) return cmd_report(run_dirs, baseline, csv_out);
        if (*part) return cmd_partition(dataset, part_spec, out_dir, window_len);
        if (*het) return cmd_heterogeneity(dataset, window_len, projections, het_seed, summary, het_out);
        if (*synth) return cmd_synth(spec_path, out_dir);
    } catch (const mdfl::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
