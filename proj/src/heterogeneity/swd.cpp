#include "mdfl/heterogeneity/swd.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "mdfl/error.hpp"

namespace mdfl {

namespace {

double quantile(const std::vector<double>& sorted, double level) {
    const auto n = static_cast<double>(sorted.size());
    const double pos = std::clamp(level * n - 0.5, 0.0, n - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double w1_sorted(const std::vector<double>& a, const std::vector<double>& b) {
    double total = 0.0;
    if (a.size() == b.size()) {
        for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
        return total / static_cast<double>(a.size());
    }
    const std::size_t m = std::max(a.size(), b.size());
    for (std::size_t i = 0; i < m; ++i) {
        const double level = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
        total += std::abs(quantile(a, level) - quantile(b, level));
    }
    return total / static_cast<double>(m);
}

// Column p holds the sorted projection of the cloud onto direction p.
std::vector<std::vector<double>> sorted_projections(const EmpiricalCloud& c, const Matrix& dirs) {
    const Matrix proj = c.points * dirs.transpose();  // n x P
    std::vector<std::vector<double>> out(static_cast<std::size_t>(dirs.rows()));
    for (Eigen::Index p = 0; p < dirs.rows(); ++p) {
        auto& col = out[static_cast<std::size_t>(p)];
        col.resize(static_cast<std::size_t>(proj.rows()));
        for (Eigen::Index i = 0; i < proj.rows(); ++i) col[static_cast<std::size_t>(i)] = proj(i, p);
        std::sort(col.begin(), col.end());
    }
    return out;
}

double swd_from_projections(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
    double total = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p) total += w1_sorted(a[p], b[p]);
    return total / static_cast<double>(a.size());
}

void check_clouds(const EmpiricalCloud& a, const EmpiricalCloud& b, int num_projections) {
    if (a.size() < 1 || b.size() < 1) throw DomainError("sliced_wasserstein: empty cloud");
    if (a.dim() != b.dim()) {
        throw ShapeError("sliced_wasserstein: dimension " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
    }
    if (num_projections < 1) throw DomainError("sliced_wasserstein: num_projections must be >= 1");
}

double mean_upper(const Matrix& m) {
    double s = 0.0;
    std::size_t n = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = i + 1; j < m.cols(); ++j, ++n) s += m(i, j);
    return n == 0 ? 0.0 : s / static_cast<double>(n);
}

}  // namespace

std::string to_string(WindowSummary s) { return s == WindowSummary::channel_mean ? "channel_mean" : "flatten"; }

WindowSummary window_summary_from_string(const std::string& s) {
    if (s == "channel_mean") return WindowSummary::channel_mean;
    if (s == "flatten") return WindowSummary::flatten;
    throw ConfigError("unknown window summary '" + s + "' (expected channel_mean or flatten)");
}

EmpiricalCloud cloud_from_device(const DeviceDataset& device, int channels, int window_len, WindowSummary summary) {
    if (device.windows.empty()) throw DomainError("device " + std::to_string(device.device_id) + " has no windows");
    const auto n = static_cast<Eigen::Index>(device.windows.size());
    const auto len = static_cast<std::size_t>(window_len);
    EmpiricalCloud c;
    if (summary == WindowSummary::flatten) {
        c.points.resize(n, static_cast<Eigen::Index>(channels) * window_len);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& f = device.windows[static_cast<std::size_t>(i)].features;
            for (std::size_t j = 0; j < f.size(); ++j) c.points(i, static_cast<Eigen::Index>(j)) = f[j];
        }
        return c;
    }
    c.points.resize(n, channels);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& f = device.windows[static_cast<std::size_t>(i)].features;
        for (int ch = 0; ch < channels; ++ch) {
            double s = 0.0;
            for (std::size_t t = 0; t < len; ++t) s += f[static_cast<std::size_t>(ch) * len + t];
            c.points(i, ch) = s / static_cast<double>(len);
        }
    }
    return c;
}

double wasserstein_1d(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw DomainError("wasserstein_1d: empty input");
    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    return w1_sorted(sa, sb);
}

Matrix random_directions(Eigen::Index dim, int num_projections, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    Matrix dirs(num_projections, dim);
    for (int p = 0; p < num_projections; ++p) {
        double norm = 0.0;
        do {
            for (Eigen::Index j = 0; j < dim; ++j) dirs(p, j) = nd(rng);
            norm = dirs.row(p).norm();
        } while (norm == 0.0);
        dirs.row(p) /= norm;
    }
    return dirs;
}

double sliced_wasserstein(const EmpiricalCloud& a, const EmpiricalCloud& b, int num_projections,
                          std::uint64_t seed) {
    check_clouds(a, b, num_projections);
    const Matrix dirs = random_directions(a.dim(), num_projections, seed);
    return swd_from_projections(sorted_projections(a, dirs), sorted_projections(b, dirs));
}

Matrix pairwise_swd(std::span<const EmpiricalCloud> clouds, int num_projections, std::uint64_t seed) {
    const auto n = static_cast<Eigen::Index>(clouds.size());
    Matrix out = Matrix::Zero(n, n);
    if (clouds.empty()) return out;
    for (const auto& c : clouds) check_clouds(clouds.front(), c, num_projections);
    const Matrix dirs = random_directions(clouds.front().dim(), num_projections, seed);
    std::vector<std::vector<std::vector<double>>> proj;
    proj.reserve(clouds.size());
    for (const auto& c : clouds) proj.push_back(sorted_projections(c, dirs));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            out(i, j) = swd_from_projections(proj[static_cast<std::size_t>(i)], proj[static_cast<std::size_t>(j)]);
            out(j, i) = out(i, j);
        }
    }
    return out;
}

double mean_pairwise_swd(std::span<const EmpiricalCloud> clouds, int num_projections, std::uint64_t seed) {
    if (clouds.size() < 2) throw DomainError("mean_pairwise_swd needs at least 2 clouds");
    return mean_upper(pairwise_swd(clouds, num_projections, seed));
}

HeterogeneityReport heterogeneity_report(const MultiDeviceDataset& ds, int num_projections, std::uint64_t seed,
                                         WindowSummary summary) {
    if (ds.users.size() < 2) throw DomainError("heterogeneity_report needs at least 2 users");
    for (const auto& u : ds.users) {
        if (u.devices.size() < 2) {
            throw DomainError("heterogeneity_report needs at least 2 devices for user " + std::to_string(u.user_id));
        }
    }

    std::vector<EmpiricalCloud> clouds;
    std::vector<const DeviceDataset*> owners;
    for (const auto& u : ds.users) {
        for (const auto& d : u.devices) {
            clouds.push_back(cloud_from_device(d, ds.channels, ds.window_len, summary));
            owners.push_back(&d);
        }
    }
    const Matrix all = pairwise_swd(clouds, num_projections, seed);

    HeterogeneityReport r;
    r.combined_swd = mean_upper(all);
    for (Eigen::Index i = 0; i < all.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < all.cols(); ++j) {
            r.pairs.push_back({owners[static_cast<std::size_t>(i)]->device_id,
                               owners[static_cast<std::size_t>(j)]->device_id, all(i, j)});
        }
    }

    // Cross-user SWD within each position.
    std::map<std::string, std::vector<Eigen::Index>> by_position;
    for (std::size_t i = 0; i < owners.size(); ++i) by_position[owners[i]->position].push_back(static_cast<Eigen::Index>(i));
    double user_total = 0.0;
    std::size_t user_groups = 0;
    for (const auto& [pos, idx] : by_position) {
        if (idx.size() < 2) continue;
        double s = 0.0;
        std::size_t n = 0;
        for (std::size_t a = 0; a < idx.size(); ++a)
            for (std::size_t b = a + 1; b < idx.size(); ++b, ++n) s += all(idx[a], idx[b]);
        const double mean = s / static_cast<double>(n);
        r.per_position.push_back({pos, mean});
        user_total += mean;
        ++user_groups;
    }
    r.user_swd = user_groups == 0 ? 0.0 : user_total / static_cast<double>(user_groups);

    // Cross-device SWD within each user.
    double device_total = 0.0;
    Eigen::Index offset = 0;
    for (const auto& u : ds.users) {
        const auto k = static_cast<Eigen::Index>(u.devices.size());
        double s = 0.0;
        std::size_t n = 0;
        for (Eigen::Index a = 0; a < k; ++a)
            for (Eigen::Index b = a + 1; b < k; ++b, ++n) s += all(offset + a, offset + b);
        device_total += s / static_cast<double>(n);
        offset += k;
    }
    r.device_swd = device_total / static_cast<double>(ds.users.size());
    return r;
}

}  // namespace mdfl
