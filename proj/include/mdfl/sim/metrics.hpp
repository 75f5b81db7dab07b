#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "mdfl/topology.hpp"

namespace mdfl {

/// Unweighted mean of per-class F1 over all num_classes classes. A class
/// with no true and no predicted samples scores 0.
double macro_f1(std::span<const int> predictions, std::span<const int> labels, int num_classes);

/// Mean over users of the population variance of their devices' scores.
/// Throws DomainError if a user in the topology has no score.
double per_user_f1_variance(const std::map<DeviceId, double>& per_device_f1, const Topology& topology);

struct RoundLog;

enum class F1Series { global, personal };

struct TargetHit {
    std::optional<int> round;
    std::optional<double> sim_time;
};

/// First logged round whose chosen F1 series reaches target. Rounds with no
/// personal F1 (non-personalized strategies) never count for the personal
/// series.
TargetHit rounds_to_target(std::span<const RoundLog> logs, double target_f1, F1Series which);

}  // namespace mdfl
