#include "mdfl/cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "mdfl/error.hpp"

namespace mdfl {

namespace {

std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

TargetHit device_hit(const RunRecord& r, double target) {
    const bool personal = r.summary.final_personal_f1.has_value();
    return rounds_to_target(r.logs, target, personal ? F1Series::personal : F1Series::global);
}

std::string fixed(double x, int prec) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, x);
    return buf;
}

std::string pm(const std::optional<MeanStd>& m, int prec, const char* suffix = "") {
    if (!m) return "-";
    return fixed(m->mean, prec) + suffix + " +/- " + fixed(m->std, prec);
}

void csv_pair(std::ostringstream& os, const std::optional<MeanStd>& m, int prec) {
    if (m) {
        os << ',' << fixed(m->mean, prec) << ',' << fixed(m->std, prec);
    } else {
        os << ",-,-";
    }
}

}  // namespace

RunRecord load_run(const std::filesystem::path& dir) {
    const auto summary = dir / "summary.json";
    const auto rounds = dir / "rounds.jsonl";
    if (!std::filesystem::exists(summary)) throw SchemaError("no summary.json in run directory " + dir.string());
    if (!std::filesystem::exists(rounds)) throw SchemaError("no rounds.jsonl in run directory " + dir.string());
    RunRecord r;
    r.dir = dir;
    try {
        r.summary = run_summary_from_json(read_text(summary));
    } catch (const SchemaError& e) {
        throw SchemaError(summary.string() + ": " + e.what());
    }
    r.logs = read_round_logs(rounds);
    return r;
}

std::optional<MeanStd> mean_std(const std::vector<double>& xs) {
    if (xs.empty()) return std::nullopt;
    MeanStd m;
    m.n = static_cast<int>(xs.size());
    for (double x : xs) m.mean += x;
    m.mean /= static_cast<double>(xs.size());
    for (double x : xs) m.std += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(m.std / static_cast<double>(xs.size()));
    return m;
}

ComparisonTable compare_runs(const std::vector<RunRecord>& runs, const std::string& baseline) {
    ComparisonTable table;
    if (runs.empty()) return table;

    table.baseline = baseline;
    if (std::none_of(runs.begin(), runs.end(), [&](const RunRecord& r) { return r.summary.strategy == baseline; })) {
        table.baseline = runs.front().summary.strategy;
    }

    // Baseline reference per seed: first baseline run seen with that seed.
    std::map<std::uint64_t, const RunRecord*> base_of_seed;
    for (const auto& r : runs)
        if (r.summary.strategy == table.baseline) base_of_seed.try_emplace(r.summary.seed, &r);

    std::vector<std::string> order{table.baseline};
    for (const auto& r : runs)
        if (std::find(order.begin(), order.end(), r.summary.strategy) == order.end())
            order.push_back(r.summary.strategy);

    for (const auto& strategy : order) {
        ComparisonRow row;
        row.strategy = strategy;
        std::vector<double> dev, glob, inv, var, target, rounds, time, sp_rounds, sp_time;
        for (const auto& r : runs) {
            if (r.summary.strategy != strategy) continue;
            ++row.runs;
            const auto& s = r.summary;
            dev.push_back(s.final_personal_f1.value_or(s.final_global_f1));
            glob.push_back(s.final_global_f1);
            inv.push_back(static_cast<double>(s.final_invalid_count));
            var.push_back(s.final_personal_f1_variance.value_or(s.final_global_f1_variance));

            auto bit = base_of_seed.find(s.seed);
            if (bit == base_of_seed.end()) continue;
            const RunRecord& base = *bit->second;
            const double t = base.summary.final_global_f1;
            target.push_back(t);
            const auto hit = device_hit(r, t);
            if (!hit.round) continue;
            ++row.reached;
            rounds.push_back(*hit.round + 1.0);
            time.push_back(hit.sim_time.value_or(0.0));
            const auto base_hit = device_hit(base, t);
            if (!base_hit.round) continue;
            sp_rounds.push_back((*base_hit.round + 1.0) / (*hit.round + 1.0));
            if (hit.sim_time && base_hit.sim_time && *hit.sim_time > 0) {
                sp_time.push_back(*base_hit.sim_time / *hit.sim_time);
            }
        }
        row.device_f1 = *mean_std(dev);
        row.global_f1 = *mean_std(glob);
        row.invalid = *mean_std(inv);
        row.device_f1_variance = mean_std(var);
        row.target_f1 = mean_std(target);
        row.rounds_to_target = mean_std(rounds);
        row.time_to_target = mean_std(time);
        row.speedup_rounds = mean_std(sp_rounds);
        row.speedup_time = mean_std(sp_time);
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string to_csv(const ComparisonTable& table) {
    std::ostringstream os;
    os << "strategy,runs,device_f1_mean,device_f1_std,global_f1_mean,global_f1_std,invalid_mean,invalid_std,"
          "device_f1_variance_mean,device_f1_variance_std,target_f1_mean,target_f1_std,"
          "rounds_to_target_mean,rounds_to_target_std,time_to_target_mean,time_to_target_std,"
          "speedup_rounds_mean,speedup_rounds_std,speedup_time_mean,speedup_time_std,reached_target,baseline\n";
    for (const auto& r : table.rows) {
        os << r.strategy << ',' << r.runs;
        csv_pair(os, r.device_f1, 6);
        csv_pair(os, r.global_f1, 6);
        csv_pair(os, r.invalid, 3);
        csv_pair(os, r.device_f1_variance, 6);
        csv_pair(os, r.target_f1, 6);
        csv_pair(os, r.rounds_to_target, 3);
        csv_pair(os, r.time_to_target, 3);
        csv_pair(os, r.speedup_rounds, 3);
        csv_pair(os, r.speedup_time, 3);
        os << ',' << r.reached << ',' << table.baseline << '\n';
    }
    return os.str();
}

std::string to_text(const ComparisonTable& table) {
    std::ostringstream os;
    char line[512];
    std::snprintf(line, sizeof line, "%-14s %4s  %-17s %-17s %-15s %-17s %-19s %-19s\n", "strategy", "runs",
                  "device F1", "global F1", "invalid", "target F1", "speedup (rounds)", "speedup (time)");
    os << line;
    for (const auto& r : table.rows) {
        std::snprintf(line, sizeof line, "%-14s %4d  %-17s %-17s %-15s %-17s %-19s %-19s\n", r.strategy.c_str(),
                      r.runs, pm(r.device_f1, 3).c_str(), pm(r.global_f1, 3).c_str(), pm(r.invalid, 1).c_str(),
                      pm(r.target_f1, 3).c_str(), pm(r.speedup_rounds, 2, "x").c_str(),
                      pm(r.speedup_time, 2, "x").c_str());
        os << line;
    }
    os << "baseline: " << table.baseline << " (target = its final global F1 per seed)\n";
    return os.str();
}

}  // namespace mdfl
