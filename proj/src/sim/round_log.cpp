#include "mdfl/sim/round_log.hpp"

#include <fstream>

#include "json.hpp"
#include "mdfl/error.hpp"

namespace mdfl {

namespace {

using ordered_json = nlohmann::ordered_json;

template <class T>
ordered_json opt(const std::optional<T>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

template <class T>
std::optional<T> get_opt(const ordered_json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

ordered_json hit_json(const TargetHit& h) {
    ordered_json j;
    j["round"] = opt(h.round);
    j["sim_time"] = opt(h.sim_time);
    return j;
}

TargetHit hit_from(const ordered_json& j) { return {get_opt<int>(j, "round"), get_opt<double>(j, "sim_time")}; }

}  // namespace

std::string to_json_line(const RoundLog& log) {
    ordered_json j;
    j["round"] = log.round;
    j["selected"] = log.selected;
    j["users_selected"] = log.users_selected;
    auto reports = ordered_json::array();
    for (const auto& r : log.reports) {
        ordered_json o;
        o["device"] = r.device_id;
        o["stat"] = r.stat;
        o["system"] = r.system;
        o["time"] = r.time;
        o["unified"] = r.unified;
        o["round_time"] = opt(r.round_time);
        reports.push_back(std::move(o));
    }
    j["utilities"] = std::move(reports);
    j["global_f1"] = log.global_f1;
    j["personal_f1"] = opt(log.personal_f1);
    j["invalid_devices"] = log.invalid_count;
    j["global_f1_variance"] = log.global_f1_variance;
    j["personal_f1_variance"] = opt(log.personal_f1_variance);
    j["round_time"] = log.round_time;
    j["cumulative_time"] = log.cumulative_time;
    return j.dump();
}

RoundLog round_log_from_json(const std::string& line) {
    try {
        const auto j = ordered_json::parse(line);
        RoundLog log;
        log.round = j.at("round").get<int>();
        log.selected = j.at("selected").get<std::vector<DeviceId>>();
        log.users_selected = j.at("users_selected").get<int>();
        for (const auto& o : j.at("utilities")) {
            UtilityReport r;
            r.device_id = o.at("device").get<int>();
            r.stat = o.at("stat").get<double>();
            r.system = o.at("system").get<double>();
            r.time = o.at("time").get<double>();
            r.unified = o.at("unified").get<double>();
            r.round_time = get_opt<double>(o, "round_time");
            r.round_computed = log.round;
            log.reports.push_back(r);
        }
        log.global_f1 = j.at("global_f1").get<double>();
        log.personal_f1 = get_opt<double>(j, "personal_f1");
        log.invalid_count = j.at("invalid_devices").get<int>();
        log.global_f1_variance = j.at("global_f1_variance").get<double>();
        log.personal_f1_variance = get_opt<double>(j, "personal_f1_variance");
        log.round_time = j.at("round_time").get<double>();
        log.cumulative_time = j.at("cumulative_time").get<double>();
        return log;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("bad round log: ") + e.what());
    }
}

std::vector<RoundLog> read_round_logs(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open " + path.string());
    std::vector<RoundLog> logs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            logs.push_back(round_log_from_json(line));
        } catch (const SchemaError& e) {
            throw SchemaError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return logs;
}

RunSummary summarize(const std::string& strategy, std::uint64_t seed, const std::vector<RoundLog>& logs,
                     std::optional<double> target_f1) {
    RunSummary s;
    s.strategy = strategy;
    s.seed = seed;
    s.rounds = static_cast<int>(logs.size());
    s.target_f1 = target_f1;
    if (logs.empty()) return s;
    const auto& last = logs.back();
    s.final_global_f1 = last.global_f1;
    s.final_personal_f1 = last.personal_f1;
    s.final_invalid_count = last.invalid_count;
    s.final_global_f1_variance = last.global_f1_variance;
    s.final_personal_f1_variance = last.personal_f1_variance;
    s.total_sim_time = last.cumulative_time;
    if (target_f1) {
        s.global_to_target = rounds_to_target(logs, *target_f1, F1Series::global);
        s.personal_to_target = rounds_to_target(logs, *target_f1, F1Series::personal);
    }
    return s;
}

std::string to_json(const RunSummary& s) {
    ordered_json j;
    j["strategy"] = s.strategy;
    j["seed"] = s.seed;
    j["rounds"] = s.rounds;
    j["final_global_f1"] = s.final_global_f1;
    j["final_personal_f1"] = opt(s.final_personal_f1);
    j["final_invalid_devices"] = s.final_invalid_count;
    j["final_global_f1_variance"] = s.final_global_f1_variance;
    j["final_personal_f1_variance"] = opt(s.final_personal_f1_variance);
    j["total_sim_time"] = s.total_sim_time;
    j["target_f1"] = opt(s.target_f1);
    j["rounds_to_target"] = {{"global", hit_json(s.global_to_target)},
                             {"personal", hit_json(s.personal_to_target)}};
    return j.dump(2);
}

RunSummary run_summary_from_json(const std::string& text) {
    try {
        const auto j = ordered_json::parse(text);
        RunSummary s;
        s.strategy = j.at("strategy").get<std::string>();
        s.seed = j.at("seed").get<std::uint64_t>();
        s.rounds = j.at("rounds").get<int>();
        s.final_global_f1 = j.at("final_global_f1").get<double>();
        s.final_personal_f1 = get_opt<double>(j, "final_personal_f1");
        s.final_invalid_count = j.at("final_invalid_devices").get<int>();
        s.final_global_f1_variance = j.at("final_global_f1_variance").get<double>();
        s.final_personal_f1_variance = get_opt<double>(j, "final_personal_f1_variance");
        s.total_sim_time = j.at("total_sim_time").get<double>();
        s.target_f1 = get_opt<double>(j, "target_f1");
        const auto& t = j.at("rounds_to_target");
        s.global_to_target = hit_from(t.at("global"));
        s.personal_to_target = hit_from(t.at("personal"));
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("bad summary: ") + e.what());
    }
}

}  // namespace mdfl
