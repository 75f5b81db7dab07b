#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mdfl/selection/utility.hpp"
#include "mdfl/sim/metrics.hpp"
#include "mdfl/topology.hpp"

namespace mdfl {

struct RoundLog {
    int round = 0;
    std::vector<DeviceId> selected;
    int users_selected = 0;
    std::vector<UtilityReport> reports;  // recomputed this round, one per trained device
    double global_f1 = 0.0;
    std::optional<double> personal_f1;  // absent without personalization
    int invalid_count = 0;
    double global_f1_variance = 0.0;
    std::optional<double> personal_f1_variance;
    double round_time = 0.0;
    double cumulative_time = 0.0;
};

/// One JSON object, no trailing newline. Field order is fixed so the stream
/// is byte-stable.
std::string to_json_line(const RoundLog& log);
RoundLog round_log_from_json(const std::string& line);
std::vector<RoundLog> read_round_logs(const std::filesystem::path& path);

struct RunSummary {
    std::string strategy;
    std::uint64_t seed = 0;
    int rounds = 0;
    double final_global_f1 = 0.0;
    std::optional<double> final_personal_f1;
    int final_invalid_count = 0;
    double final_global_f1_variance = 0.0;
    std::optional<double> final_personal_f1_variance;
    double total_sim_time = 0.0;
    std::optional<double> target_f1;  // the baseline run's final global F1
    TargetHit global_to_target;
    TargetHit personal_to_target;
};

RunSummary summarize(const std::string& strategy, std::uint64_t seed, const std::vector<RoundLog>& logs,
                     std::optional<double> target_f1);

std::string to_json(const RunSummary& s);
RunSummary run_summary_from_json(const std::string& text);

}  // namespace mdfl
