#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "mdfl/selection/utility.hpp"
#include "mdfl/topology.hpp"

namespace mdfl {

struct SelectionConfig {
    int devices_per_round = 1;  // C
    int rho = 1;                // devices taken from each selected user
    double t_max = 40.0;
    double alpha = 0.5;
    double oort_alpha = 2.0;

    void validate() const;
};

struct SelectionResult {
    std::vector<DeviceId> devices;
    int users_selected = 0;
    // Fewer eligible users (or devices) than the quota asked for.
    bool short_of_quota = false;
};

/// Per-user device quotas: floor(C / rho) users get rho devices, one more
/// user gets C mod rho when that is non-zero.
std::vector<int> user_quotas(int devices_per_round, int rho);

/// Scores used for ranking: the reported unified utility, or, for devices
/// that have never reported, the maximum reported utility (0 if none).
std::map<DeviceId, double> flame_scores(const std::map<DeviceId, UtilityReport>& reports,
                                        const std::set<DeviceId>& eligible);

/// User-centred top-C selection.
///
/// Round 0 has no reports, so users are drawn uniformly and then devices
/// uniformly within each user, following user_quotas. Later rounds pick the
/// set with the largest summed score subject to the same quotas: each user's
/// best-scoring devices are taken (ties by ascending id), and users are
/// chosen by the sum of their quota's worth of top scores. Devices with a
/// zero score are never selected. The result lists devices by descending
/// score, ties by ascending id.
SelectionResult select_flame(const std::map<DeviceId, UtilityReport>& reports, const Topology& topology,
                             const SelectionConfig& cfg, int round, std::uint64_t seed,
                             const std::set<DeviceId>& eligible);

/// Same selection with scores supplied directly; exposed for testing.
SelectionResult select_flame_scored(const std::map<DeviceId, double>& scores, const Topology& topology,
                                    const SelectionConfig& cfg);

/// Uniform sample of C eligible devices without replacement.
SelectionResult select_random(const Topology& topology, int devices_per_round, std::uint64_t seed,
                              const std::set<DeviceId>& eligible);

/// Approximation of Oort's ranking: stat * (T_max / t_prev)^(oort_alpha) for
/// devices that missed the deadline, plain stat otherwise. Top-C by score
/// with no user constraint and no energy term. Round 0 (or no reports at
/// all) falls back to select_random.
SelectionResult select_oort_like(const std::map<DeviceId, UtilityReport>& reports, const Topology& topology,
                                 const SelectionConfig& cfg, int round, std::uint64_t seed,
                                 const std::set<DeviceId>& eligible);

double oort_score(const UtilityReport& r, double t_max, double oort_alpha);

std::set<DeviceId> all_devices(const Topology& topology);

}  // namespace mdfl
