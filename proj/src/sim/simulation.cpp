#include "mdfl/sim/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include <spdlog/spdlog.h>

#include "mdfl/error.hpp"
#include "mdfl/numeric/weights.hpp"
#include "mdfl/seeding.hpp"
#include "mdfl/sim/metrics.hpp"

namespace mdfl {

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::flame: return "flame";
        case Strategy::ditto_random: return "ditto_random";
        case Strategy::fedavg_random: return "fedavg_random";
        case Strategy::oort_like: return "oort_like";
    }
    return "?";
}

Strategy strategy_from_string(const std::string& s) {
    if (s == "flame") return Strategy::flame;
    if (s == "ditto_random") return Strategy::ditto_random;
    if (s == "fedavg_random") return Strategy::fedavg_random;
    if (s == "oort_like") return Strategy::oort_like;
    throw ConfigError("unknown strategy '" + s + "' (expected flame, ditto_random, fedavg_random or oort_like)");
}

StrategySwitches preset(Strategy s) {
    switch (s) {
        case Strategy::flame: return {SelectionKind::flame, true, true};
        case Strategy::ditto_random: return {SelectionKind::random, true, false};
        case Strategy::fedavg_random: return {SelectionKind::random, false, false};
        case Strategy::oort_like: return {SelectionKind::oort, true, true};
    }
    throw ConfigError("unknown strategy");
}

void SimConfig::validate() const {
    if (rounds < 1) throw ConfigError("rounds must be >= 1");
    if (local_epochs < 1) throw ConfigError("local_epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(lr > 0)) throw ConfigError("lr must be positive");
    if (!(lambda >= 0)) throw ConfigError("lambda must be >= 0");
    if (!(sampling_fraction > 0 && sampling_fraction <= 1)) throw ConfigError("sampling_fraction must be in (0, 1]");
    if (rho < 1) throw ConfigError("rho must be >= 1");
    if (!(t_max > 0)) throw ConfigError("t_max must be positive");
    if (!(alpha >= 0 && alpha <= 1)) throw ConfigError("alpha must be in [0, 1]");
    if (!(oort_alpha >= 0)) throw ConfigError("oort_alpha must be >= 0");
    if (!(drain_threshold > 0)) throw ConfigError("drain_threshold must be positive");
    if (!(drain_floor_fraction > 0 && drain_floor_fraction < 1))
        throw ConfigError("drain_floor_fraction must be in (0, 1)");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    for (auto h : hidden_layers)
        if (h < 1) throw ConfigError("hidden layer sizes must be >= 1");
}

StrategySwitches SimConfig::switches() const {
    auto sw = preset(strategy);
    if (time_aligned_ordering) sw.time_aligned = *time_aligned_ordering;
    return sw;
}

int SimConfig::devices_per_round(std::size_t n_devices) const {
    const auto c = static_cast<int>(std::lround(sampling_fraction * static_cast<double>(n_devices)));
    return std::max(1, c);
}

SelectionConfig SimConfig::selection_config(std::size_t n_devices) const {
    SelectionConfig s;
    s.devices_per_round = devices_per_round(n_devices);
    s.rho = std::min(rho, s.devices_per_round);
    s.t_max = t_max;
    s.alpha = alpha;
    s.oort_alpha = oort_alpha;
    return s;
}

LocalTrainConfig SimConfig::train_config() const { return {local_epochs, batch_size, lr}; }

Simulation::Simulation(const MultiDeviceDataset& train, const MultiDeviceDataset& test,
                       std::map<DeviceId, DeviceProfile> profiles, SimConfig cfg)
    : cfg_(std::move(cfg)), switches_(cfg_.switches()) {
    cfg_.validate();
    if (train.channels != test.channels || train.window_len != test.window_len ||
        train.num_classes != test.num_classes) {
        throw ShapeError("train and test datasets disagree on shape");
    }
    topology_ = train.topology();
    if (topology_.device_count() == 0) throw ConfigError("dataset has no devices");
    num_classes_ = train.num_classes;
    selection_ = cfg_.selection_config(topology_.device_count());

    ArchSpec arch;
    arch.input_dim = train.feature_dim();
    arch.hidden_layers = cfg_.hidden_layers;
    arch.num_classes = static_cast<std::size_t>(train.num_classes);
    arch.activation = cfg_.activation;
    global_ = init_model(arch, hash_seed({cfg_.seed, tag("global-init")}));

    for (const auto& user : train.users) {
        for (const auto& dd : user.devices) {
            Device dev;
            dev.id = dd.device_id;
            dev.user = user.user_id;
            dev.train = to_batch(dd, train.feature_dim());
            const DeviceDataset* td = test.find_device(dd.device_id);
            if (td == nullptr) throw ConfigError("device " + std::to_string(dd.device_id) + " has no test split");
            dev.test = to_batch(*td, test.feature_dim());
            auto pit = profiles.find(dd.device_id);
            if (pit == profiles.end()) throw ConfigError("device " + std::to_string(dd.device_id) + " has no profile");
            dev.profile = pit->second;
            dev.runtime.device_id = dev.id;
            dev.runtime.user_id = dev.user;
            dev.runtime.drain_threshold = cfg_.drain_threshold;
            if (switches_.personalization) {
                // Personal models start from the shared initial global model.
                dev.personal = global_;
                const auto n = dev.personal.params.size();
                dev.personal_opt = cfg_.personal_optimizer == OptimizerKind::adam ? OptimizerState::adam(n, cfg_.lr)
                                                                                  : OptimizerState::sgd(n, cfg_.lr);
            }
            if (dev.train.size() == 0) {
                spdlog::warn("device {} (user {}) has no training windows and will be skipped", dev.id, dev.user);
            }
            if (dev.test.size() > 0) eval_topology_.add(dev.user, dev.id);
            devices_.emplace(dev.id, std::move(dev));
        }
    }
    if (eval_topology_.device_count() == 0) throw ConfigError("no device has test windows");
}

double Simulation::model_bytes() const { return 4.0 * static_cast<double>(global_.params.size()); }

const ModelWeights& Simulation::personal_model(DeviceId d) const {
    if (!switches_.personalization) throw ConfigError("strategy has no personal models");
    auto it = devices_.find(d);
    if (it == devices_.end()) throw ConfigError("unknown device " + std::to_string(d));
    return it->second.personal;
}

const DeviceRuntimeState& Simulation::runtime(DeviceId d) const {
    auto it = devices_.find(d);
    if (it == devices_.end()) throw ConfigError("unknown device " + std::to_string(d));
    return it->second.runtime;
}

std::set<DeviceId> Simulation::eligible() const {
    std::set<DeviceId> out;
    for (const auto& [id, dev] : devices_)
        if (dev.train.size() > 0 && !is_invalid(dev.runtime)) out.insert(id);
    return out;
}

SelectionResult Simulation::select(const std::set<DeviceId>& eligible) const {
    const auto seed = hash_seed({cfg_.seed, tag("select"), static_cast<std::uint64_t>(round_)});
    switch (switches_.selection) {
        case SelectionKind::flame: return select_flame(reports_, topology_, selection_, round_, seed, eligible);
        case SelectionKind::oort: return select_oort_like(reports_, topology_, selection_, round_, seed, eligible);
        case SelectionKind::random: break;
    }
    return select_random(topology_, selection_.devices_per_round, seed, eligible);
}

RoundLog Simulation::run_round() {
    RoundLog log;
    log.round = round_;

    const auto sel = select(eligible());
    log.selected = sel.devices;
    log.users_selected = sel.users_selected;

    // Work in ascending device id so every later step is order-stable.
    std::vector<DeviceId> order = sel.devices;
    std::sort(order.begin(), order.end());
    const auto train_cfg = cfg_.train_config();
    std::vector<ClientResult> results(order.size());
    std::vector<std::exception_ptr> errors(order.size());

    auto work = [&](std::size_t i) {
        try {
            Device& dev = devices_.at(order[i]);
            const auto seed = time_aligned_order_seed(dev.user, round_, cfg_.seed, switches_.time_aligned, dev.id);
            results[i] = local_update(global_, dev.id, dev.train, train_cfg, seed);
            if (switches_.personalization) {
                personal_update(dev.personal, dev.personal_opt, global_, dev.train, train_cfg, cfg_.lambda, seed);
            }
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(cfg_.threads), order.size());
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < order.size(); ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < order.size(); i = next++) work(i);
            });
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    if (!results.empty()) {
        std::vector<AggregationEntry> entries;
        entries.reserve(results.size());
        for (const auto& r : results) entries.push_back({r.device_id, std::cref(r.weights), r.n_samples});
        global_ = weighted_average(entries);
    }

    double round_time = 0.0;
    for (auto& r : results) {
        Device& dev = devices_.at(r.device_id);
        const auto& hw = dev.profile.hardware;
        const auto& net = dev.profile.network;
        r.cost = round_cost(hw, net, cfg_.local_epochs, r.n_samples, model_bytes());
        dev.runtime = accrue_round(dev.runtime, hw, net, cfg_.local_epochs, r.n_samples, model_bytes());
        dev.runtime.last_per_sample_losses = r.per_sample_losses;
        round_time = std::max(round_time, r.cost.total_time());
        auto report = make_report(dev.id, r.per_sample_losses, dev.runtime.accumulated_drain,
                                  dev.runtime.drain_threshold, dev.runtime.last_round_time, cfg_.t_max, cfg_.alpha,
                                  cfg_.drain_floor_fraction, round_);
        reports_[dev.id] = report;
        log.reports.push_back(report);
    }
    cumulative_time_ += round_time;
    log.round_time = round_time;
    log.cumulative_time = cumulative_time_;
    log.invalid_count = static_cast<int>(
        std::count_if(devices_.begin(), devices_.end(), [](const auto& kv) { return is_invalid(kv.second.runtime); }));

    evaluate(log);
    ++round_;
    return log;
}

void Simulation::evaluate(RoundLog& log) const {
    std::map<DeviceId, double> global_f1;
    std::map<DeviceId, double> personal_f1;
    for (const auto& [id, user] : eval_topology_.user_of_device) {
        const Device& dev = devices_.at(id);
        global_f1[id] = macro_f1(predict(global_, dev.test.inputs), dev.test.labels, num_classes_);
        if (switches_.personalization) {
            personal_f1[id] = macro_f1(predict(dev.personal, dev.test.inputs), dev.test.labels, num_classes_);
        }
    }
    auto mean = [](const std::map<DeviceId, double>& m) {
        double s = 0.0;
        for (const auto& [d, v] : m) s += v;
        return s / static_cast<double>(m.size());
    };
    log.global_f1 = mean(global_f1);
    log.global_f1_variance = per_user_f1_variance(global_f1, eval_topology_);
    if (switches_.personalization) {
        log.personal_f1 = mean(personal_f1);
        log.personal_f1_variance = per_user_f1_variance(personal_f1, eval_topology_);
    }
}

std::vector<RoundLog> Simulation::run(const std::function<void(const RoundLog&)>& on_round) {
    std::vector<RoundLog> logs;
    while (round_ < cfg_.rounds) {
        logs.push_back(run_round());
        if (on_round) on_round(logs.back());
    }
    return logs;
}

}  // namespace mdfl
