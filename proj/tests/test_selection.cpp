#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "mdfl/error.hpp"
#include "mdfl/selection/selection.hpp"
#include "mdfl/selection/utility.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace mdfl;

namespace {

struct Registry {
    Topology topo;
    std::map<DeviceId, double> scores;
};

// Users with 1..max_devices devices each. Scores mix exact zeros, small
// integers (to force ties) and continuous values.
Registry random_registry(testing::Gen& g, int max_users, int max_devices) {
    Registry r;
    const int users = g.integer(1, max_users);
    DeviceId next = 0;
    for (UserId u = 0; u < users; ++u) {
        const int k = g.integer(1, max_devices);
        for (int i = 0; i < k; ++i) {
            r.topo.add(u * 10 + 3, next);  // non-contiguous user ids
            const int kind = g.integer(0, 3);
            r.scores[next] = kind == 0 ? 0.0 : kind == 1 ? static_cast<double>(g.integer(1, 4)) : g.real(0.0, 10.0);
            ++next;
        }
    }
    return r;
}

double total(const std::vector<DeviceId>& ds, const std::map<DeviceId, double>& s) {
    double t = 0.0;
    for (auto d : ds) t += s.at(d);
    return t;
}

SelectionConfig cfg_of(int c, int rho) {
    SelectionConfig cfg;
    cfg.devices_per_round = c;
    cfg.rho = rho;
    return cfg;
}

std::map<DeviceId, UtilityReport> reports_from(const std::map<DeviceId, double>& scores) {
    std::map<DeviceId, UtilityReport> out;
    for (const auto& [d, s] : scores) {
        UtilityReport r;
        r.device_id = d;
        r.unified = s;
        r.stat = s;
        out[d] = r;
    }
    return out;
}

}  // namespace

TEST_CASE("utility formulas on worked values") {
    const std::vector<double> losses{3.0, 4.0};
    CHECK(stat_utility(losses) == doctest::Approx(2.0 * std::sqrt(12.5)));
    CHECK(stat_utility(std::vector<double>{0.0, 0.0}) == 0.0);
    CHECK_THROWS_AS(stat_utility(std::vector<double>{}), DomainError);

    CHECK(system_utility(3996.0, 3996.0) == 0.0);
    CHECK(system_utility(5000.0, 3996.0) == 0.0);
    CHECK(system_utility(399.6, 3996.0) == doctest::Approx(std::log(10.0)));
    // a fresh device is clamped to the floor: ln(1 / 0.01)
    CHECK(system_utility(0.0, 3996.0) == doctest::Approx(std::log(100.0)));

    CHECK(time_utility(std::nullopt, 40, 0.5) == 1.0);
    CHECK(time_utility(40.0, 40, 0.5) == 1.0);
    CHECK(time_utility(80.0, 40, 0.5) == doctest::Approx(0.25));
    CHECK(unified_utility(2.0, 3.0, 0.5) == 3.0);

    const auto r = make_report(7, losses, 399.6, 3996.0, 80.0, 40.0, 0.5, 0.01, 3);
    CHECK(r.device_id == 7);
    CHECK(r.round_computed == 3);
    CHECK(r.unified == doctest::Approx(2.0 * std::sqrt(12.5) * std::log(10.0) * 0.25));
    CHECK(*r.round_time == 80.0);
}

TEST_CASE("utility formulas match oracles on random inputs") {
    testing::Gen g(11);
    for (int t = 0; t < 1000; ++t) {
        const auto losses = g.reals(static_cast<std::size_t>(g.integer(1, 200)), 0.0, 5.0);
        CHECK(oracle::rel_close(stat_utility(losses), oracle::stat(losses)));
        const double th = g.real(1.0, 10000.0);
        const double drain = g.coin(0.1) ? th * g.real(1.0, 2.0) : g.real(0.0, th);
        const double ff = g.real(1e-4, 0.5);
        CHECK(oracle::rel_close(system_utility(drain, th, ff), oracle::system(drain, th, ff)));
        const double tmax = g.real(1.0, 100.0);
        const std::optional<double> tp = g.coin(0.2) ? std::nullopt : std::optional<double>(g.real(0.1, 300.0));
        const double alpha = g.real(0.0, 1.0);
        CHECK(oracle::rel_close(time_utility(tp, tmax, alpha), oracle::time(tp, tmax, alpha)));
    }
}

TEST_CASE("user quotas") {
    CHECK(user_quotas(4, 2) == std::vector<int>{2, 2});
    CHECK(user_quotas(5, 2) == std::vector<int>{2, 2, 1});
    CHECK(user_quotas(3, 5) == std::vector<int>{3});
    CHECK(user_quotas(6, 1) == std::vector<int>(6, 1));
}

TEST_CASE("selection config validation") {
    CHECK_THROWS_AS(cfg_of(0, 1).validate(), ConfigError);
    CHECK_THROWS_AS(cfg_of(2, 0).validate(), ConfigError);
    auto c = cfg_of(2, 1);
    c.alpha = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("selection takes the best pair even when a single device scores highest") {
    Topology topo;
    topo.add(0, 0);
    topo.add(0, 1);
    topo.add(1, 2);
    topo.add(1, 3);
    const std::map<DeviceId, double> scores{{0, 10.0}, {1, 0.1}, {2, 9.0}, {3, 8.0}};
    const auto r = select_flame_scored(scores, topo, cfg_of(2, 2));
    CHECK(r.devices == std::vector<DeviceId>{2, 3});
    CHECK(r.users_selected == 1);
    CHECK_FALSE(r.short_of_quota);
}

TEST_CASE("selection with a remainder slot") {
    Topology topo;
    for (DeviceId d = 0; d < 9; ++d) topo.add(d / 3, d);
    // user 0: 5 4 3 | user 1: 9 1 1 | user 2: 6 6 0
    const std::map<DeviceId, double> scores{{0, 5}, {1, 4}, {2, 3}, {3, 9}, {4, 1}, {5, 1}, {6, 6}, {7, 6}, {8, 0}};
    // C = 3, rho = 2: one user with two devices plus one with one.
    const auto r = select_flame_scored(scores, topo, cfg_of(3, 2));
    CHECK(total(r.devices, scores) == doctest::Approx(21.0));  // {6, 6} + {9}
    CHECK(r.devices == std::vector<DeviceId>{3, 6, 7});
    CHECK(r.users_selected == 2);
}

TEST_CASE("zero-score devices are never selected") {
    Topology topo;
    for (DeviceId d = 0; d < 4; ++d) topo.add(d, d);
    const std::map<DeviceId, double> scores{{0, 0.0}, {1, 2.0}, {2, 0.0}, {3, 1.0}};
    const auto r = select_flame_scored(scores, topo, cfg_of(4, 1));
    CHECK(r.devices == std::vector<DeviceId>{1, 3});
    CHECK(r.short_of_quota);
}

TEST_CASE("ties resolve by ascending id") {
    Topology topo;
    for (DeviceId d = 0; d < 6; ++d) topo.add(d / 2, d);
    std::map<DeviceId, double> scores;
    for (DeviceId d = 0; d < 6; ++d) scores[d] = 1.0;
    const auto r = select_flame_scored(scores, topo, cfg_of(4, 2));
    CHECK(r.devices == std::vector<DeviceId>{0, 1, 2, 3});
}

TEST_CASE("flame scores give unreported devices the best reported utility") {
    std::map<DeviceId, UtilityReport> reports;
    reports[0].unified = 2.0;
    reports[1].unified = 5.0;
    reports[2].unified = 7.0;  // not eligible, ignored for exploration
    const auto s = flame_scores(reports, {0, 1, 3});
    CHECK(s.size() == 3);
    CHECK(s.at(0) == 2.0);
    CHECK(s.at(3) == 5.0);
    CHECK_FALSE(s.contains(2));
    CHECK(flame_scores({}, {0, 1}).at(1) == 0.0);
}

TEST_CASE("round 0 selection is random but user-centred and seeded") {
    Topology topo;
    for (DeviceId d = 0; d < 30; ++d) topo.add(d / 3, d);
    const auto eligible = all_devices(topo);
    const auto cfg = cfg_of(7, 2);
    const auto a = select_flame({}, topo, cfg, 0, 5, eligible);
    const auto b = select_flame({}, topo, cfg, 0, 5, eligible);
    CHECK(a.devices == b.devices);
    CHECK(a.devices.size() == 7);
    CHECK(a.users_selected == 4);
    CHECK(oracle::respects_quotas(a.devices, topo, 7, 2));
    bool differs = false;
    for (std::uint64_t s = 6; s < 12 && !differs; ++s) differs = select_flame({}, topo, cfg, 0, s, eligible).devices != a.devices;
    CHECK(differs);
}

TEST_CASE("later rounds with no eligible reports also fall back to random") {
    Topology topo;
    for (DeviceId d = 0; d < 8; ++d) topo.add(d / 2, d);
    std::map<DeviceId, UtilityReport> reports;
    reports[0].unified = 3.0;
    const auto r = select_flame(reports, topo, cfg_of(4, 2), 5, 1, {2, 3, 4, 5, 6, 7});
    CHECK(r.devices.size() == 4);
    for (auto d : r.devices) CHECK(d >= 2);
}

TEST_CASE("select_random draws distinct eligible devices") {
    Topology topo;
    for (DeviceId d = 0; d < 20; ++d) topo.add(d / 4, d);
    const std::set<DeviceId> eligible{1, 2, 3, 5, 8, 13};
    const auto r = select_random(topo, 4, 9, eligible);
    CHECK(r.devices.size() == 4);
    for (auto d : r.devices) CHECK(eligible.contains(d));
    CHECK(std::set<DeviceId>(r.devices.begin(), r.devices.end()).size() == 4);
    CHECK(select_random(topo, 4, 9, eligible).devices == r.devices);
    const auto all = select_random(topo, 10, 9, eligible);
    CHECK(all.devices.size() == 6);
    CHECK(all.short_of_quota);
}

TEST_CASE("oort-like score and ranking") {
    UtilityReport r;
    r.stat = 8.0;
    CHECK(oort_score(r, 40, 2.0) == 8.0);
    r.round_time = 30.0;
    CHECK(oort_score(r, 40, 2.0) == 8.0);
    r.round_time = 80.0;
    CHECK(oort_score(r, 40, 2.0) == doctest::Approx(2.0));

    Topology topo;
    for (DeviceId d = 0; d < 6; ++d) topo.add(0, d);  // one user: no user constraint applies
    std::map<DeviceId, UtilityReport> reports;
    for (DeviceId d = 0; d < 5; ++d) {
        reports[d].device_id = d;
        reports[d].stat = 1.0 + d;
    }
    reports[4].round_time = 400.0;  // 5 * (40/400)^2 = 0.05
    const auto cfg = cfg_of(3, 1);
    const auto sel = select_oort_like(reports, topo, cfg, 2, 0, all_devices(topo));
    // device 5 has no report and explores at the best score (4.0), tying device 3
    CHECK(sel.devices == std::vector<DeviceId>{3, 5, 2});
    const auto first = select_oort_like(reports, topo, cfg, 0, 0, all_devices(topo));
    CHECK(first.devices == select_random(topo, 3, 0, all_devices(topo)).devices);
}

TEST_CASE("exact maximiser on enumerable registries") {
    testing::Gen g(123);
    int enumerated = 0;
    for (int t = 0; t < 3000; ++t) {
        const auto reg = random_registry(g, 10, 4);
        const int n = static_cast<int>(reg.topo.device_count());
        const int c = g.integer(1, n);
        const int rho = g.integer(1, 4);
        const auto r = select_flame_scored(reg.scores, reg.topo, cfg_of(c, rho));
        CAPTURE(t);
        REQUIRE(oracle::respects_quotas(r.devices, reg.topo, c, rho));
        const double got = total(r.devices, reg.scores);
        const double dp = oracle::best_by_dp(reg.scores, reg.topo, c, rho);
        CHECK(oracle::rel_close(got, dp));
        if (n <= 16) {
            ++enumerated;
            CHECK(oracle::rel_close(got, oracle::best_by_enumeration(reg.scores, reg.topo, c, rho)));
        }
    }
    CHECK(enumerated > 300);
}

TEST_CASE("constraints hold on 10,000 fuzzed registries") {
    testing::Gen g(321);
    for (int t = 0; t < 10000; ++t) {
        const auto reg = random_registry(g, 12, 5);
        const int n = static_cast<int>(reg.topo.device_count());
        const int c = g.integer(1, n + 2);
        const int rho = g.integer(1, 5);
        std::set<DeviceId> eligible;
        for (const auto& [d, u] : reg.topo.user_of_device)
            if (g.coin(0.8)) eligible.insert(d);
        const int round = g.integer(0, 3);
        auto reports = reports_from(reg.scores);
        for (auto it = reports.begin(); it != reports.end();) it = g.coin(0.2) ? reports.erase(it) : std::next(it);

        const auto cfg = cfg_of(c, rho);
        const auto r = select_flame(reports, reg.topo, cfg, round, static_cast<std::uint64_t>(t), eligible);
        CAPTURE(t);
        REQUIRE(oracle::respects_quotas(r.devices, reg.topo, c, rho));
        std::set<UserId> users;
        for (auto d : r.devices) {
            CHECK(eligible.contains(d));
            users.insert(reg.topo.user_of_device.at(d));
        }
        CHECK(static_cast<int>(users.size()) == r.users_selected);
        CHECK(static_cast<int>(users.size()) <= static_cast<int>(user_quotas(c, rho).size()));
        const bool scored = round > 0 && std::any_of(reports.begin(), reports.end(),
                                                     [&](const auto& kv) { return eligible.contains(kv.first); });
        if (scored) {
            const auto scores = flame_scores(reports, eligible);
            for (std::size_t i = 0; i < r.devices.size(); ++i) {
                CHECK(scores.at(r.devices[i]) > 0.0);
                if (i > 0) CHECK(scores.at(r.devices[i - 1]) >= scores.at(r.devices[i]));
            }
        }
    }
}
