#pragma once

#include <optional>
#include <span>

#include "mdfl/topology.hpp"

namespace mdfl {

struct UtilityReport {
    DeviceId device_id = 0;
    double stat = 0.0;
    double system = 0.0;
    double time = 1.0;
    double unified = 0.0;
    int round_computed = 0;
    std::optional<double> round_time;  // t_{r-1} the time utility was computed from
};

inline constexpr double kDefaultDrainFloorFraction = 0.01;

/// |X| * sqrt(mean(L^2)): the sample count times the RMS of per-sample losses.
double stat_utility(std::span<const double> per_sample_losses);

/// 0 once drain reaches the threshold; otherwise ln(th / max(drain, floor))
/// with floor = floor_fraction * th so a fresh device stays finite.
double system_utility(double drain, double drain_threshold, double floor_fraction = kDefaultDrainFloorFraction);

/// 1 when the previous round met the deadline (or there was none);
/// alpha * T_max / t_prev otherwise.
double time_utility(std::optional<double> t_prev, double t_max, double alpha);

double unified_utility(double stat, double system, double time);

UtilityReport make_report(DeviceId device, std::span<const double> per_sample_losses, double drain,
                          double drain_threshold, std::optional<double> t_prev, double t_max, double alpha,
                          double floor_fraction, int round);

}  // namespace mdfl
