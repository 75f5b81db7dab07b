#include "mdfl/cli/runner.hpp"

#include <cstdlib>
#include <fstream>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "mdfl/data/csv_ingest.hpp"
#include "mdfl/data/dataset_io.hpp"
#include "mdfl/data/partition.hpp"
#include "mdfl/data/split.hpp"
#include "mdfl/data/synthetic.hpp"
#include "mdfl/error.hpp"
#include "mdfl/profiles/profiles.hpp"
#include "mdfl/sim/simulation.hpp"

namespace mdfl {

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

std::vector<HardwareProfile> hardware_table(const std::string& src) {
    return src == "bundled" ? bundled_hardware_profiles() : load_hardware_profiles(src);
}

std::vector<NetworkProfile> network_table(const std::string& src) {
    return src == "bundled" ? bundled_network_profiles() : load_network_profiles(src);
}

}  // namespace

MultiDeviceDataset build_dataset(const ExperimentSpec& spec) {
    MultiDeviceDataset ds;
    switch (spec.dataset.source) {
        case DatasetSource::synthetic: ds = synthesize(spec.dataset.synthetic); break;
        case DatasetSource::csv: {
            auto res = ingest_csv(spec.dataset.csv.path, spec.dataset.csv.schema, spec.dataset.csv.window_len);
            ds = std::move(res.dataset);
            break;
        }
        case DatasetSource::directory: ds = import_dataset(spec.dataset.directory); break;
    }
    if (spec.partition) ds = partition(ds, *spec.partition);
    ds.validate();
    return ds;
}

MultiDeviceDataset load_dataset_path(const std::filesystem::path& path, int window_len) {
    if (std::filesystem::is_directory(path)) return import_dataset(path);
    if (path.extension() == ".csv") return ingest_csv(path, CsvSchema{}, window_len).dataset;
    throw ConfigError(path.string() + " is neither a dataset directory nor a .csv file");
}

std::string heterogeneity_json(const HeterogeneityReport& report) {
    nlohmann::ordered_json j;
    j["combined_swd"] = report.combined_swd;
    j["user_swd"] = report.user_swd;
    j["device_swd"] = report.device_swd;
    auto positions = nlohmann::ordered_json::array();
    for (const auto& p : report.per_position) positions.push_back({{"position", p.position}, {"mean_swd", p.mean_swd}});
    j["per_position"] = std::move(positions);
    auto pairs = nlohmann::ordered_json::array();
    for (const auto& p : report.pairs) pairs.push_back({{"a", p.a}, {"b", p.b}, {"swd", p.swd}});
    j["pairs"] = std::move(pairs);
    return j.dump(2) + "\n";
}

RunOutcome run_experiment(const std::filesystem::path& spec_path, const RunOptions& opts) {
    auto spec = load_experiment_spec(spec_path);
    const char* env = std::getenv(kProfileDirEnv);
    const auto base = std::filesystem::absolute(spec_path).parent_path();
    return run_experiment(resolve_spec(std::move(spec), base, env ? std::optional<std::string>(env) : std::nullopt),
                          opts);
}

RunOutcome run_experiment(ExperimentSpec spec, const RunOptions& opts) {
    if (opts.seed_override) spec.seeds = {*opts.seed_override};
    if (opts.output_dir) spec.output_dir = opts.output_dir->string();
    if (opts.threads) spec.sim.threads = *opts.threads;
    if (spec.profiles.hardware.empty()) spec.profiles.hardware = "bundled";
    if (spec.profiles.network.empty()) spec.profiles.network = "bundled";
    spec.validate();

    RunOutcome outcome;
    outcome.output_dir = spec.output_dir;
    std::filesystem::create_directories(outcome.output_dir);
    write_file(outcome.output_dir / "spec.yaml", to_yaml(spec));

    const auto ds = build_dataset(spec);
    spdlog::info("dataset: {} users, {} devices, {} windows", ds.users.size(), ds.device_count(), ds.window_count());
    if (spec.heterogeneity.enabled) {
        const auto h = heterogeneity_report(ds, spec.heterogeneity.projections, spec.heterogeneity.seed,
                                            spec.heterogeneity.summary);
        write_file(outcome.output_dir / "heterogeneity.json", heterogeneity_json(h));
    }
    const auto [train, test] = train_test_split(ds, spec.dataset.train_fraction, spec.dataset.split_seed);
    const auto hw = hardware_table(spec.profiles.hardware);
    const auto net = network_table(spec.profiles.network);
    const auto topo = train.topology();

    // Baseline first so its final F1 is known when the others finish.
    std::vector<Strategy> order;
    const bool has_baseline =
        std::find(spec.strategies.begin(), spec.strategies.end(), spec.baseline) != spec.strategies.end();
    if (has_baseline) order.push_back(spec.baseline);
    for (auto s : spec.strategies)
        if (s != spec.baseline) order.push_back(s);

    std::vector<RunRecord> records;
    for (auto seed : spec.seeds) {
        std::optional<double> target;
        for (auto strategy : order) {
            const auto dir = outcome.output_dir / to_string(strategy) / ("seed_" + std::to_string(seed));
            std::filesystem::create_directories(dir);

            ExperimentSpec run_spec = spec;
            run_spec.seeds = {seed};
            run_spec.strategies = {strategy};
            write_file(dir / "spec.yaml", to_yaml(run_spec));

            SimConfig cfg = spec.sim;
            cfg.seed = seed;
            cfg.strategy = strategy;
            Simulation sim(train, test, assign_profiles(topo, hw, net, seed), cfg);

            std::ofstream rounds(dir / "rounds.jsonl", std::ios::binary);
            if (!rounds) throw ConfigError("cannot write " + (dir / "rounds.jsonl").string());
            spdlog::info("run {} seed {} ({} rounds)", to_string(strategy), seed, cfg.rounds);
            const auto logs = sim.run([&](const RoundLog& log) { rounds << to_json_line(log) << '\n' << std::flush; });

            if (has_baseline && strategy == spec.baseline) target = logs.back().global_f1;
            const auto summary = summarize(to_string(strategy), seed, logs, target);
            write_file(dir / "summary.json", to_json(summary) + "\n");
            records.push_back({dir, summary, logs});
            outcome.run_dirs.push_back(dir);
        }
    }

    outcome.table = compare_runs(records, to_string(spec.baseline));
    write_file(outcome.output_dir / "comparison.csv", to_csv(outcome.table));
    return outcome;
}

}  // namespace mdfl
