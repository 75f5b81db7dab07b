#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mdfl/data/dataset.hpp"
#include "mdfl/numeric/model.hpp"

namespace mdfl {

/// One d-dimensional point per window.
struct EmpiricalCloud {
    Matrix points;  // [n x d]

    Eigen::Index size() const { return points.rows(); }
    Eigen::Index dim() const { return points.cols(); }
};

enum class WindowSummary {
    channel_mean,  // d = channels
    flatten,       // d = channels * window_len
};

std::string to_string(WindowSummary s);
WindowSummary window_summary_from_string(const std::string& s);

inline constexpr int kDefaultProjections = 256;

EmpiricalCloud cloud_from_device(const DeviceDataset& device, int channels, int window_len,
                                 WindowSummary summary = WindowSummary::channel_mean);

/// W1 between two empirical distributions. Equal sizes: mean absolute
/// difference of order statistics. Unequal sizes: both quantile functions
/// are sampled at max(n_a, n_b) evenly spaced levels with linear
/// interpolation between order statistics.
double wasserstein_1d(std::span<const double> a, std::span<const double> b);

/// num_projections x d matrix of unit rows, normalised Gaussian draws.
Matrix random_directions(Eigen::Index dim, int num_projections, std::uint64_t seed);

double sliced_wasserstein(const EmpiricalCloud& a, const EmpiricalCloud& b, int num_projections,
                          std::uint64_t seed);

/// Symmetric matrix of pairwise SWD; each entry equals
/// sliced_wasserstein(clouds[i], clouds[j], num_projections, seed) bitwise.
Matrix pairwise_swd(std::span<const EmpiricalCloud> clouds, int num_projections, std::uint64_t seed);

double mean_pairwise_swd(std::span<const EmpiricalCloud> clouds, int num_projections, std::uint64_t seed);

struct PositionSwd {
    std::string position;
    double mean_swd = 0.0;  // mean pairwise across users for this position
};

struct PairSwd {
    DeviceId a = 0;
    DeviceId b = 0;
    double swd = 0.0;
};

struct HeterogeneityReport {
    double combined_swd = 0.0;  // all user x device clouds together
    double user_swd = 0.0;      // mean over positions of cross-user SWD
    double device_swd = 0.0;    // mean over users of cross-device SWD
    std::vector<PositionSwd> per_position;
    std::vector<PairSwd> pairs;
};

HeterogeneityReport heterogeneity_report(const MultiDeviceDataset& ds, int num_projections, std::uint64_t seed,
                                         WindowSummary summary = WindowSummary::channel_mean);

}  // namespace mdfl
