#include "mdfl/selection/utility.hpp"

#include <algorithm>
#include <cmath>

#include "mdfl/error.hpp"

namespace mdfl {

double stat_utility(std::span<const double> per_sample_losses) {
    if (per_sample_losses.empty()) throw DomainError("stat_utility: empty loss vector");
    double sq = 0.0;
    for (double l : per_sample_losses) sq += l * l;
    const auto n = static_cast<double>(per_sample_losses.size());
    return n * std::sqrt(sq / n);
}

double system_utility(double drain, double drain_threshold, double floor_fraction) {
    if (drain >= drain_threshold) return 0.0;
    const double floor = floor_fraction * drain_threshold;
    return std::log(drain_threshold / std::max(drain, floor));
}

double time_utility(std::optional<double> t_prev, double t_max, double alpha) {
    if (!t_prev || *t_prev <= t_max) return 1.0;
    return alpha * t_max / *t_prev;
}

double unified_utility(double stat, double system, double time) { return stat * system * time; }

UtilityReport make_report(DeviceId device, std::span<const double> per_sample_losses, double drain,
                          double drain_threshold, std::optional<double> t_prev, double t_max, double alpha,
                          double floor_fraction, int round) {
    UtilityReport r;
    r.device_id = device;
    r.stat = stat_utility(per_sample_losses);
    r.system = system_utility(drain, drain_threshold, floor_fraction);
    r.time = time_utility(t_prev, t_max, alpha);
    r.unified = unified_utility(r.stat, r.system, r.time);
    r.round_computed = round;
    r.round_time = t_prev;
    return r;
}

}  // namespace mdfl
