#include "mdfl/selection/selection.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mdfl/error.hpp"
#include "mdfl/seeding.hpp"

namespace mdfl {

namespace {

struct Scored {
    DeviceId id = 0;
    double score = 0.0;
};

bool by_score(const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
}

double top_sum(const std::vector<Scored>& sorted, int k) {
    double s = 0.0;
    const auto n = std::min<std::size_t>(sorted.size(), static_cast<std::size_t>(std::max(k, 0)));
    for (std::size_t i = 0; i < n; ++i) s += sorted[i].score;
    return s;
}

SelectionResult finish(std::vector<Scored> chosen, int users, bool short_of_quota) {
    std::sort(chosen.begin(), chosen.end(), by_score);
    SelectionResult r;
    for (const auto& c : chosen) r.devices.push_back(c.id);
    r.users_selected = users;
    r.short_of_quota = short_of_quota;
    return r;
}

// Round-0 style: users uniformly, then devices uniformly within each user.
SelectionResult random_user_centred(const Topology& topology, const SelectionConfig& cfg, std::uint64_t seed,
                                    const std::set<DeviceId>& eligible) {
    const auto quotas = user_quotas(cfg.devices_per_round, cfg.rho);
    std::mt19937_64 rng(hash_seed({seed, tag("flame-round0")}));
    std::vector<std::pair<UserId, std::vector<DeviceId>>> users;
    for (const auto& [u, devices] : topology.devices_of_user) {
        std::vector<DeviceId> ok;
        for (DeviceId d : devices)
            if (eligible.contains(d)) ok.push_back(d);
        if (!ok.empty()) users.emplace_back(u, std::move(ok));
    }
    std::shuffle(users.begin(), users.end(), rng);

    SelectionResult r;
    const std::size_t n_users = std::min(users.size(), quotas.size());
    int taken = 0;
    for (std::size_t i = 0; i < n_users; ++i) {
        auto& devs = users[i].second;
        std::shuffle(devs.begin(), devs.end(), rng);
        const auto k = std::min<std::size_t>(devs.size(), static_cast<std::size_t>(quotas[i]));
        r.devices.insert(r.devices.end(), devs.begin(), devs.begin() + static_cast<std::ptrdiff_t>(k));
        taken += static_cast<int>(k);
    }
    r.users_selected = static_cast<int>(n_users);
    r.short_of_quota = taken < cfg.devices_per_round;
    return r;
}

bool has_eligible_report(const std::map<DeviceId, UtilityReport>& reports, const std::set<DeviceId>& eligible) {
    return std::any_of(reports.begin(), reports.end(), [&](const auto& kv) { return eligible.contains(kv.first); });
}

}  // namespace

void SelectionConfig::validate() const {
    if (devices_per_round < 1) throw ConfigError("devices per round must be >= 1");
    if (rho < 1) throw ConfigError("rho must be >= 1");
    if (!(t_max > 0)) throw ConfigError("T_max must be positive");
    if (alpha < 0 || alpha > 1) throw ConfigError("alpha must lie in [0, 1]");
    if (oort_alpha < 0) throw ConfigError("oort_alpha must be non-negative");
}

std::vector<int> user_quotas(int devices_per_round, int rho) {
    std::vector<int> q(static_cast<std::size_t>(devices_per_round / rho), rho);
    if (devices_per_round % rho != 0) q.push_back(devices_per_round % rho);
    return q;
}

std::set<DeviceId> all_devices(const Topology& topology) {
    std::set<DeviceId> out;
    for (const auto& [d, u] : topology.user_of_device) out.insert(d);
    return out;
}

std::map<DeviceId, double> flame_scores(const std::map<DeviceId, UtilityReport>& reports,
                                        const std::set<DeviceId>& eligible) {
    double explore = 0.0;
    for (const auto& [d, r] : reports)
        if (eligible.contains(d)) explore = std::max(explore, r.unified);
    std::map<DeviceId, double> scores;
    for (DeviceId d : eligible) {
        auto it = reports.find(d);
        scores[d] = it == reports.end() ? explore : it->second.unified;
    }
    return scores;
}

SelectionResult select_flame_scored(const std::map<DeviceId, double>& scores, const Topology& topology,
                                    const SelectionConfig& cfg) {
    cfg.validate();
    const int full_users = cfg.devices_per_round / cfg.rho;
    const int rem = cfg.devices_per_round % cfg.rho;

    struct Candidate {
        UserId user = 0;
        std::vector<Scored> devices;  // positive scores, best first
        double full = 0.0;
        double partial = 0.0;
    };
    std::vector<Candidate> cands;
    for (const auto& [u, devices] : topology.devices_of_user) {
        Candidate c{u, {}, 0.0, 0.0};
        for (DeviceId d : devices) {
            auto it = scores.find(d);
            if (it != scores.end() && it->second > 0.0) c.devices.push_back({d, it->second});
        }
        if (c.devices.empty()) continue;
        std::sort(c.devices.begin(), c.devices.end(), by_score);
        c.full = top_sum(c.devices, cfg.rho);
        c.partial = top_sum(c.devices, rem);
        cands.push_back(std::move(c));
    }
    // Best full-slot users first; ties to the smaller user id.
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.full != b.full) return a.full > b.full;
        return a.user < b.user;
    });

    // Full slots go to the best users excluding the partial-slot user (if
    // any); try every choice of partial user and keep the best total.
    auto fill = [&](std::ptrdiff_t partial_idx, double& total) {
        std::vector<std::ptrdiff_t> picked;
        total = 0.0;
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(cands.size()) &&
                                   static_cast<int>(picked.size()) < full_users;
             ++i) {
            if (i == partial_idx) continue;
            picked.push_back(i);
            total += cands[static_cast<std::size_t>(i)].full;
        }
        if (partial_idx >= 0) total += cands[static_cast<std::size_t>(partial_idx)].partial;
        return picked;
    };

    double best_total = 0.0;
    std::ptrdiff_t best_partial = -1;
    auto best_full = fill(-1, best_total);
    if (rem > 0) {
        // Visit partial candidates in user-id order so ties resolve the same
        // way regardless of the score ranking.
        std::vector<std::ptrdiff_t> order(cands.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::ptrdiff_t>(i);
        std::sort(order.begin(), order.end(), [&](auto a, auto b) {
            return cands[static_cast<std::size_t>(a)].user < cands[static_cast<std::size_t>(b)].user;
        });
        for (auto p : order) {
            double total = 0.0;
            auto full = fill(p, total);
            if (total > best_total) {
                best_total = total;
                best_partial = p;
                best_full = std::move(full);
            }
        }
    }

    std::vector<Scored> chosen;
    for (auto i : best_full) {
        const auto& c = cands[static_cast<std::size_t>(i)];
        const auto k = std::min<std::size_t>(c.devices.size(), static_cast<std::size_t>(cfg.rho));
        chosen.insert(chosen.end(), c.devices.begin(), c.devices.begin() + static_cast<std::ptrdiff_t>(k));
    }
    int users = static_cast<int>(best_full.size());
    if (best_partial >= 0) {
        const auto& c = cands[static_cast<std::size_t>(best_partial)];
        const auto k = std::min<std::size_t>(c.devices.size(), static_cast<std::size_t>(rem));
        chosen.insert(chosen.end(), c.devices.begin(), c.devices.begin() + static_cast<std::ptrdiff_t>(k));
        ++users;
    }
    const bool short_of_quota = static_cast<int>(chosen.size()) < cfg.devices_per_round;
    return finish(std::move(chosen), users, short_of_quota);
}

SelectionResult select_flame(const std::map<DeviceId, UtilityReport>& reports, const Topology& topology,
                             const SelectionConfig& cfg, int round, std::uint64_t seed,
                             const std::set<DeviceId>& eligible) {
    cfg.validate();
    if (topology.devices_of_user.empty()) throw DomainError("select_flame: empty topology");
    if (round == 0 || !has_eligible_report(reports, eligible)) {
        return random_user_centred(topology, cfg, seed, eligible);
    }
    return select_flame_scored(flame_scores(reports, eligible), topology, cfg);
}

SelectionResult select_random(const Topology& topology, int devices_per_round, std::uint64_t seed,
                              const std::set<DeviceId>& eligible) {
    std::vector<DeviceId> pool;
    for (const auto& [d, u] : topology.user_of_device)
        if (eligible.contains(d)) pool.push_back(d);
    std::mt19937_64 rng(hash_seed({seed, tag("random-select")}));
    std::shuffle(pool.begin(), pool.end(), rng);
    const auto k = std::min<std::size_t>(pool.size(), static_cast<std::size_t>(std::max(devices_per_round, 0)));
    pool.resize(k);

    SelectionResult r;
    r.devices = std::move(pool);
    std::set<UserId> users;
    for (DeviceId d : r.devices) users.insert(topology.user_of_device.at(d));
    r.users_selected = static_cast<int>(users.size());
    r.short_of_quota = static_cast<int>(k) < devices_per_round;
    return r;
}

double oort_score(const UtilityReport& r, double t_max, double oort_alpha) {
    if (r.round_time && *r.round_time > t_max) return r.stat * std::pow(t_max / *r.round_time, oort_alpha);
    return r.stat;
}

SelectionResult select_oort_like(const std::map<DeviceId, UtilityReport>& reports, const Topology& topology,
                                 const SelectionConfig& cfg, int round, std::uint64_t seed,
                                 const std::set<DeviceId>& eligible) {
    cfg.validate();
    if (round == 0 || !has_eligible_report(reports, eligible)) {
        return select_random(topology, cfg.devices_per_round, seed, eligible);
    }
    double explore = 0.0;
    for (const auto& [d, r] : reports)
        if (eligible.contains(d)) explore = std::max(explore, oort_score(r, cfg.t_max, cfg.oort_alpha));
    std::vector<Scored> all;
    for (DeviceId d : eligible) {
        if (!topology.user_of_device.contains(d)) continue;
        auto it = reports.find(d);
        all.push_back({d, it == reports.end() ? explore : oort_score(it->second, cfg.t_max, cfg.oort_alpha)});
    }
    std::sort(all.begin(), all.end(), by_score);
    const auto k = std::min<std::size_t>(all.size(), static_cast<std::size_t>(cfg.devices_per_round));
    all.resize(k);
    std::set<UserId> users;
    for (const auto& s : all) users.insert(topology.user_of_device.at(s.id));
    return finish(std::move(all), static_cast<int>(users.size()), static_cast<int>(k) < cfg.devices_per_round);
}

}  // namespace mdfl
