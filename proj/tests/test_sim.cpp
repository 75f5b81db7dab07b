#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "mdfl/error.hpp"
#include "mdfl/numeric/weights.hpp"
#include "mdfl/seeding.hpp"
#include "mdfl/sim/client.hpp"
#include "mdfl/sim/metrics.hpp"
#include "mdfl/sim/round_log.hpp"
#include "mdfl/sim/simulation.hpp"
#include "oracles.hpp"
#include "sim_fixtures.hpp"

using namespace mdfl;

namespace {

Batch device_batch(const testing::SimFixture& f, DeviceId d) {
    return to_batch(*f.train.find_device(d), f.train.feature_dim());
}

}  // namespace

TEST_CASE("macro_f1 worked values") {
    const std::vector<int> y{0, 0, 1, 1};
    CHECK(macro_f1(y, y, 2) == 1.0);
    const std::vector<int> p{0, 1, 1, 1};
    // class 0: tp 1 fn 1 -> 2/3 ; class 1: tp 2 fp 1 -> 4/5
    CHECK(macro_f1(p, y, 2) == doctest::Approx((2.0 / 3.0 + 0.8) / 2.0));
    // an absent class contributes 0
    CHECK(macro_f1(y, y, 3) == doctest::Approx(2.0 / 3.0));
    CHECK_THROWS_AS(macro_f1(std::vector<int>{0}, y, 2), ShapeError);
    CHECK_THROWS_AS(macro_f1(std::vector<int>{}, std::vector<int>{}, 2), DomainError);
    CHECK_THROWS_AS(macro_f1(std::vector<int>{2}, std::vector<int>{0}, 2), DomainError);
}

TEST_CASE("macro_f1 matches the confusion-matrix oracle") {
    testing::Gen g(17);
    for (int t = 0; t < 1000; ++t) {
        const int k = g.integer(2, 6);
        const auto n = static_cast<std::size_t>(g.integer(1, 60));
        std::vector<int> y(n), p(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = g.integer(0, k - 1);
            p[i] = g.coin(0.6) ? y[i] : g.integer(0, k - 1);
        }
        CHECK(oracle::rel_close(macro_f1(p, y, k), oracle::macro_f1(p, y, k)));
    }
}

TEST_CASE("per-user F1 variance is the mean population variance") {
    Topology topo;
    topo.add(0, 0);
    topo.add(0, 1);
    topo.add(1, 2);
    const std::map<DeviceId, double> f1{{0, 0.2}, {1, 0.6}, {2, 0.9}};
    // user 0: var(0.2, 0.6) = 0.04 ; user 1: 0
    CHECK(per_user_f1_variance(f1, topo) == doctest::Approx(0.02));
    CHECK(per_user_f1_variance({}, Topology{}) == 0.0);
    CHECK_THROWS_AS(per_user_f1_variance({{0, 0.1}}, topo), DomainError);
}

TEST_CASE("rounds_to_target finds the first round at or above the target") {
    std::vector<RoundLog> logs(4);
    const double g[] = {0.1, 0.5, 0.4, 0.7};
    for (int i = 0; i < 4; ++i) {
        logs[static_cast<std::size_t>(i)].round = i;
        logs[static_cast<std::size_t>(i)].global_f1 = g[i];
        logs[static_cast<std::size_t>(i)].cumulative_time = 10.0 * (i + 1);
    }
    logs[2].personal_f1 = 0.9;
    const auto hit = rounds_to_target(logs, 0.5, F1Series::global);
    CHECK(*hit.round == 1);
    CHECK(*hit.sim_time == 20.0);
    CHECK(*rounds_to_target(logs, 0.8, F1Series::personal).round == 2);
    CHECK_FALSE(rounds_to_target(logs, 0.95, F1Series::global).round.has_value());
}

TEST_CASE("time-aligned order seeds") {
    CHECK(time_aligned_order_seed(3, 7, 1, true, 10) == time_aligned_order_seed(3, 7, 1, true, 11));
    CHECK(time_aligned_order_seed(3, 7, 1, false, 10) != time_aligned_order_seed(3, 7, 1, false, 11));
    CHECK(time_aligned_order_seed(3, 7, 1, true, 10) != time_aligned_order_seed(3, 8, 1, true, 10));
    CHECK(time_aligned_order_seed(3, 7, 1, true, 10) != time_aligned_order_seed(4, 7, 1, true, 10));
}

TEST_CASE("local_update trains from the received model and reports its losses") {
    const auto f = testing::make_fixture(2, 2, 3, 10, 1);
    const Batch train = device_batch(f, 0);
    ArchSpec arch{f.train.feature_dim(), {8}, 3, Activation::relu};
    const auto w = init_model(arch, 4);
    const LocalTrainConfig cfg{3, 5, 1e-2};
    const auto r = local_update(w, 0, train, cfg, 99);
    CHECK(r.device_id == 0);
    CHECK(r.n_samples == train.size());
    CHECK(r.per_sample_losses == per_sample_losses(w, train));
    CHECK(r.weights.params != w.params);
    CHECK(local_update(w, 0, train, cfg, 99).weights.params == r.weights.params);
    CHECK(local_update(w, 0, train, cfg, 98).weights.params != r.weights.params);

    auto opt = OptimizerState::adam(w.params.size(), cfg.lr);
    CHECK(testing::hand_train(w, opt, train, 3, 5, 99).params == r.weights.params);

    CHECK_THROWS_AS(local_update(w, 0, Batch{Matrix(0, arch.input_dim), {}}, cfg, 1), DomainError);
}

TEST_CASE("personal_update with lambda 0 is plain local training, bit for bit") {
    const auto f = testing::make_fixture(2, 2, 3, 10, 2);
    const Batch train = device_batch(f, 1);
    ArchSpec arch{f.train.feature_dim(), {8}, 3, Activation::tanh};
    const auto w = init_model(arch, 1);
    const LocalTrainConfig cfg{4, 6, 5e-3};

    auto v = w;
    auto opt = OptimizerState::adam(w.params.size(), cfg.lr);
    personal_update(v, opt, w, train, cfg, 0.0, 1234);
    CHECK(v.params == local_update(w, 1, train, cfg, 1234).weights.params);

    // and a persistent optimizer carries over across calls exactly like one long run
    auto v2 = init_model(arch, 2);
    auto opt2 = OptimizerState::sgd(v2.params.size(), 0.05);
    auto ref = v2;
    auto ref_opt = opt2;
    personal_update(v2, opt2, w, train, cfg, 0.0, 5);
    personal_update(v2, opt2, w, train, cfg, 0.0, 6);
    ref = testing::hand_train(ref, ref_opt, train, 4, 6, 5);
    ref = testing::hand_train(ref, ref_opt, train, 4, 6, 6);
    CHECK(v2.params == ref.params);
}

TEST_CASE("personal_update pulls toward the global model as lambda grows") {
    const auto f = testing::make_fixture(2, 2, 3, 10, 3);
    const Batch train = device_batch(f, 2);
    ArchSpec arch{f.train.feature_dim(), {8}, 3, Activation::relu};
    const auto w = init_model(arch, 10);
    const LocalTrainConfig cfg{10, 8, 1e-2};
    double prev = 1e300;
    for (double lambda : {0.0, 1.0, 100.0}) {
        auto v = init_model(arch, 20);
        auto opt = OptimizerState::adam(v.params.size(), cfg.lr);
        personal_update(v, opt, w, train, cfg, lambda, 7);
        const double d = l2_distance(v, w);
        CHECK(d < prev);
        prev = d;
    }
    auto bad = init_model(ArchSpec{f.train.feature_dim(), {4}, 3, Activation::relu}, 1);
    auto opt = OptimizerState::adam(bad.params.size(), 1e-3);
    CHECK_THROWS_AS(personal_update(bad, opt, w, train, cfg, 1.0, 1), ShapeError);
    auto v = w;
    CHECK_THROWS_AS(personal_update(v, opt, w, train, cfg, -1.0, 1), ConfigError);
}

TEST_CASE("strategy presets and config") {
    CHECK(preset(Strategy::flame) == StrategySwitches{SelectionKind::flame, true, true});
    CHECK(preset(Strategy::ditto_random) == StrategySwitches{SelectionKind::random, true, false});
    CHECK(preset(Strategy::fedavg_random) == StrategySwitches{SelectionKind::random, false, false});
    CHECK(preset(Strategy::oort_like) == StrategySwitches{SelectionKind::oort, true, true});
    for (auto s : {Strategy::flame, Strategy::ditto_random, Strategy::fedavg_random, Strategy::oort_like})
        CHECK(strategy_from_string(to_string(s)) == s);
    CHECK_THROWS_AS(strategy_from_string("fedprox"), ConfigError);

    SimConfig c;
    CHECK(c.lr == 1e-3);
    CHECK(c.batch_size == 32);
    CHECK(c.local_epochs == 20);
    CHECK(c.lambda == 1.0);
    CHECK(c.sampling_fraction == 0.5);
    CHECK(c.alpha == 0.5);
    CHECK(c.oort_alpha == 2.0);
    CHECK(c.rounds == 100);
    CHECK(c.devices_per_round(60) == 30);
    CHECK(c.devices_per_round(1) == 1);
    c.time_aligned_ordering = false;
    CHECK_FALSE(c.switches().time_aligned);
    c.rho = 50;
    CHECK(c.selection_config(10).rho == 5);
    c.sampling_fraction = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("simulation runs, logs consistently and is deterministic") {
    const auto f = testing::make_fixture(4, 2, 3, 10, 5);
    for (auto s : {Strategy::flame, Strategy::ditto_random, Strategy::fedavg_random, Strategy::oort_like}) {
        CAPTURE(to_string(s));
        const auto cfg = testing::small_config(s, 3);
        Simulation a(f.train, f.test, f.profiles, cfg);
        Simulation b(f.train, f.test, f.profiles, cfg);
        const auto la = a.run();
        const auto lb = b.run();
        REQUIRE(la.size() == 5);
        CHECK(a.global_model().params == b.global_model().params);
        double cumulative = 0.0;
        for (std::size_t r = 0; r < la.size(); ++r) {
            CHECK(to_json_line(la[r]) == to_json_line(lb[r]));
            CHECK(la[r].round == static_cast<int>(r));
            CHECK(la[r].selected.size() == 4);  // 0.5 * 8 devices
            CHECK(la[r].reports.size() == la[r].selected.size());
            CHECK(la[r].personal_f1.has_value() == preset(s).personalization);
            CHECK(la[r].global_f1 >= 0.0);
            CHECK(la[r].global_f1 <= 1.0);
            cumulative += la[r].round_time;
            CHECK(la[r].cumulative_time == doctest::Approx(cumulative));
        }
        if (preset(s).selection == SelectionKind::flame) {
            for (const auto& log : la) {
                CHECK(oracle::respects_quotas(log.selected, a.topology(), 4, 2));
                CHECK(log.users_selected == 2);
            }
        }
    }
}

TEST_CASE("personal models start from the initial global model") {
    const auto f = testing::make_fixture(3, 2, 3, 10, 2);
    const auto cfg = testing::small_config(Strategy::ditto_random, 4);
    Simulation sim(f.train, f.test, f.profiles, cfg);
    const ArchSpec arch{f.train.feature_dim(), cfg.hidden_layers, 3, cfg.activation};
    const auto w0 = init_model(arch, hash_seed({cfg.seed, tag("global-init")}));
    CHECK(sim.global_model().params == w0.params);
    for (const auto& [d, u] : sim.topology().user_of_device) CHECK(sim.personal_model(d).params == w0.params);
}

TEST_CASE("threads do not change results") {
    const auto f = testing::make_fixture(4, 2, 3, 10, 6);
    auto cfg = testing::small_config(Strategy::flame, 8);
    Simulation one(f.train, f.test, f.profiles, cfg);
    cfg.threads = 3;
    Simulation three(f.train, f.test, f.profiles, cfg);
    const auto a = one.run();
    const auto b = three.run();
    for (std::size_t r = 0; r < a.size(); ++r) CHECK(to_json_line(a[r]) == to_json_line(b[r]));
    for (const auto& [d, u] : one.topology().user_of_device)
        CHECK(one.personal_model(d).params == three.personal_model(d).params);
}

TEST_CASE("energy accounting and invalid devices") {
    const auto f = testing::make_fixture(2, 2, 3, 10, 7);
    auto cfg = testing::small_config(Strategy::fedavg_random, 1);
    cfg.sampling_fraction = 1.0;
    cfg.rounds = 3;
    Simulation sim(f.train, f.test, f.profiles, cfg);
    CHECK(sim.model_bytes() == 4.0 * static_cast<double>(sim.global_model().params.size()));
    CHECK_THROWS_AS(sim.personal_model(0), ConfigError);
    sim.run();
    for (const auto& [d, prof] : f.profiles) {
        const auto n = f.train.find_device(d)->windows.size();
        const auto& rt = sim.runtime(d);
        CHECK(rt.rounds_participated == 3);
        CHECK(rt.accumulated_drain == doctest::Approx(3.0 * round_energy(prof.hardware, cfg.local_epochs, n)));
        const double t = round_cost(prof.hardware, prof.network, cfg.local_epochs, n, sim.model_bytes()).total_time();
        CHECK(*rt.last_round_time == doctest::Approx(t));
    }

    // A threshold below one round's energy: every device is invalid after
    // its first round and is never picked again.
    cfg.drain_threshold = 1e-6;
    cfg.sampling_fraction = 0.5;
    cfg.rounds = 4;
    Simulation drained(f.train, f.test, f.profiles, cfg);
    std::set<DeviceId> seen;
    for (const auto& log : drained.run()) {
        for (auto d : log.selected) {
            CHECK_FALSE(seen.contains(d));
            seen.insert(d);
        }
        CHECK(log.invalid_count == static_cast<int>(seen.size()));
    }
    CHECK(seen.size() == 4);
}

TEST_CASE("single-client FedAvg equals sequential local training, bitwise") {
    const auto f = testing::make_fixture(1, 1, 3, 12, 9);
    auto cfg = testing::small_config(Strategy::fedavg_random, 21);
    cfg.sampling_fraction = 1.0;
    cfg.rounds = 10;
    Simulation sim(f.train, f.test, f.profiles, cfg);
    const DeviceId d = f.train.users[0].devices[0].device_id;
    const UserId u = f.train.users[0].user_id;
    const Batch train = device_batch(f, d);

    ArchSpec arch{f.train.feature_dim(), cfg.hidden_layers, 3, cfg.activation};
    auto w = init_model(arch, hash_seed({cfg.seed, tag("global-init")}));
    CHECK(w.params == sim.global_model().params);
    for (int r = 0; r < 10; ++r) {
        sim.run_round();
        auto opt = OptimizerState::adam(w.params.size(), cfg.lr);
        w = testing::hand_train(w, opt, train, cfg.local_epochs, cfg.batch_size,
                                time_aligned_order_seed(u, r, cfg.seed, false, d));
        CHECK(w.params == sim.global_model().params);
    }
}

TEST_CASE("simulation constructor errors") {
    const auto f = testing::make_fixture(2, 2, 3, 10, 4);
    auto profiles = f.profiles;
    profiles.erase(profiles.begin());
    CHECK_THROWS_AS(Simulation(f.train, f.test, profiles, testing::small_config(Strategy::flame, 0)), ConfigError);
    auto cfg = testing::small_config(Strategy::flame, 0);
    cfg.rounds = 0;
    CHECK_THROWS_AS(Simulation(f.train, f.test, f.profiles, cfg), ConfigError);
}

TEST_CASE("round log JSON round trip") {
    RoundLog log;
    log.round = 3;
    log.selected = {4, 1};
    log.users_selected = 2;
    UtilityReport rep;
    rep.device_id = 4;
    rep.stat = 1.5;
    rep.system = 0.25;
    rep.time = 1.0;
    rep.unified = 0.375;
    rep.round_time = 12.5;
    log.reports = {rep};
    log.global_f1 = 0.1 + 0.2;
    log.personal_f1 = 0.7;
    log.invalid_count = 1;
    log.global_f1_variance = 1e-17;
    log.round_time = 12.5;
    log.cumulative_time = 40.0;
    const auto line = to_json_line(log);
    CHECK(line.find('\n') == std::string::npos);
    CHECK(line.rfind(R"({"round":3,"selected":[4,1],"users_selected":2,"utilities":)", 0) == 0);
    const auto back = round_log_from_json(line);
    CHECK(to_json_line(back) == line);
    CHECK(back.global_f1 == log.global_f1);
    CHECK_FALSE(back.personal_f1_variance.has_value());
    CHECK_THROWS_AS(round_log_from_json("{\"round\": 1}"), SchemaError);
}

TEST_CASE("run summary") {
    std::vector<RoundLog> logs(3);
    for (int i = 0; i < 3; ++i) {
        logs[static_cast<std::size_t>(i)].round = i;
        logs[static_cast<std::size_t>(i)].global_f1 = 0.3 * (i + 1);
        logs[static_cast<std::size_t>(i)].cumulative_time = 5.0 * (i + 1);
    }
    logs[2].invalid_count = 2;
    const auto s = summarize("flame", 4, logs, 0.5);
    CHECK(s.rounds == 3);
    CHECK(s.final_global_f1 == doctest::Approx(0.9));
    CHECK(s.final_invalid_count == 2);
    CHECK(s.total_sim_time == 15.0);
    CHECK(*s.global_to_target.round == 1);
    CHECK_FALSE(s.personal_to_target.round.has_value());
    const auto back = run_summary_from_json(to_json(s));
    CHECK(to_json(back) == to_json(s));
}
