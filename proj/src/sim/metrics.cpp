#include "mdfl/sim/metrics.hpp"

#include <string>

#include "mdfl/error.hpp"
#include "mdfl/sim/round_log.hpp"

namespace mdfl {

double macro_f1(std::span<const int> predictions, std::span<const int> labels, int num_classes) {
    if (predictions.size() != labels.size()) throw ShapeError("macro_f1: prediction and label counts differ");
    if (labels.empty()) throw DomainError("macro_f1: empty input");
    if (num_classes < 1) throw DomainError("macro_f1: num_classes must be >= 1");

    const auto k = static_cast<std::size_t>(num_classes);
    std::vector<long> tp(k, 0), fp(k, 0), fn(k, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int y = labels[i];
        const int p = predictions[i];
        if (y < 0 || y >= num_classes || p < 0 || p >= num_classes) {
            throw DomainError("macro_f1: class id out of range at index " + std::to_string(i));
        }
        if (y == p) {
            ++tp[static_cast<std::size_t>(y)];
        } else {
            ++fp[static_cast<std::size_t>(p)];
            ++fn[static_cast<std::size_t>(y)];
        }
    }
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        // F1 = 2TP / (2TP + FP + FN); 0 when the denominator vanishes.
        const long denom = 2 * tp[c] + fp[c] + fn[c];
        if (denom > 0) sum += 2.0 * static_cast<double>(tp[c]) / static_cast<double>(denom);
    }
    return sum / static_cast<double>(k);
}

double per_user_f1_variance(const std::map<DeviceId, double>& per_device_f1, const Topology& topology) {
    if (topology.devices_of_user.empty()) return 0.0;
    double total = 0.0;
    for (const auto& [user, devices] : topology.devices_of_user) {
        std::vector<double> xs;
        for (DeviceId d : devices) {
            auto it = per_device_f1.find(d);
            if (it != per_device_f1.end()) xs.push_back(it->second);
        }
        if (xs.empty()) throw DomainError("per_user_f1_variance: user " + std::to_string(user) + " has no score");
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        double var = 0.0;
        for (double x : xs) var += (x - mean) * (x - mean);
        total += var / static_cast<double>(xs.size());
    }
    return total / static_cast<double>(topology.devices_of_user.size());
}

TargetHit rounds_to_target(std::span<const RoundLog> logs, double target_f1, F1Series which) {
    for (const auto& log : logs) {
        std::optional<double> v;
        if (which == F1Series::global) {
            v = log.global_f1;
        } else {
            v = log.personal_f1;
        }
        if (v && *v >= target_f1) return {log.round, log.cumulative_time};
    }
    return {};
}

}  // namespace mdfl
