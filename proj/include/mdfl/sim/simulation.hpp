#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mdfl/data/dataset.hpp"
#include "mdfl/numeric/model.hpp"
#include "mdfl/numeric/optimizer.hpp"
#include "mdfl/profiles/profiles.hpp"
#include "mdfl/selection/selection.hpp"
#include "mdfl/selection/utility.hpp"
#include "mdfl/sim/client.hpp"
#include "mdfl/sim/round_log.hpp"

namespace mdfl {

enum class Strategy { flame, ditto_random, fedavg_random, oort_like };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

enum class SelectionKind { flame, random, oort };

struct StrategySwitches {
    SelectionKind selection = SelectionKind::random;
    bool personalization = false;
    bool time_aligned = false;

    bool operator==(const StrategySwitches&) const = default;
};

/// flame: user-centred selection, personal models, aligned ordering.
/// ditto_random: random selection, personal models.
/// fedavg_random: random selection only.
/// oort_like: loss/latency ranking, personal models, aligned ordering.
StrategySwitches preset(Strategy s);

struct SimConfig {
    int rounds = 100;
    int local_epochs = 20;
    int batch_size = 32;
    double lr = 1e-3;
    double lambda = 1.0;
    double sampling_fraction = 0.5;
    int rho = 2;
    double t_max = 40.0;
    double alpha = 0.5;
    double oort_alpha = 2.0;
    std::uint64_t seed = 0;
    Strategy strategy = Strategy::flame;
    std::optional<bool> time_aligned_ordering;  // unset: the preset decides
    OptimizerKind personal_optimizer = OptimizerKind::adam;
    std::vector<std::size_t> hidden_layers{32};
    Activation activation = Activation::relu;
    double drain_threshold = kDefaultDrainThreshold;
    double drain_floor_fraction = kDefaultDrainFloorFraction;
    int threads = 1;

    void validate() const;
    StrategySwitches switches() const;
    /// C = max(1, round(sampling_fraction * n_devices)).
    int devices_per_round(std::size_t n_devices) const;
    SelectionConfig selection_config(std::size_t n_devices) const;
    LocalTrainConfig train_config() const;

    bool operator==(const SimConfig&) const = default;
};

class Simulation {
public:
    /// train and test must hold the same users and devices. Every device
    /// needs a profile.
    Simulation(const MultiDeviceDataset& train, const MultiDeviceDataset& test,
               std::map<DeviceId, DeviceProfile> profiles, SimConfig cfg);

    RoundLog run_round();
    /// Runs the remaining rounds, calling on_round after each one.
    std::vector<RoundLog> run(const std::function<void(const RoundLog&)>& on_round = {});

    int round() const { return round_; }
    const SimConfig& config() const { return cfg_; }
    const Topology& topology() const { return topology_; }
    int devices_per_round() const { return selection_.devices_per_round; }
    double model_bytes() const;

    const ModelWeights& global_model() const { return global_; }
    const ModelWeights& personal_model(DeviceId d) const;
    const DeviceRuntimeState& runtime(DeviceId d) const;
    const std::map<DeviceId, UtilityReport>& reports() const { return reports_; }

private:
    struct Device {
        DeviceId id = 0;
        UserId user = 0;
        Batch train;
        Batch test;
        DeviceProfile profile;
        DeviceRuntimeState runtime;
        ModelWeights personal;
        OptimizerState personal_opt;
    };

    std::set<DeviceId> eligible() const;
    SelectionResult select(const std::set<DeviceId>& eligible) const;
    void evaluate(RoundLog& log) const;

    SimConfig cfg_;
    StrategySwitches switches_;
    SelectionConfig selection_;
    Topology topology_;
    Topology eval_topology_;  // devices with a non-empty test set
    int num_classes_ = 0;
    std::map<DeviceId, Device> devices_;
    std::map<DeviceId, UtilityReport> reports_;
    ModelWeights global_;
    int round_ = 0;
    double cumulative_time_ = 0.0;
};

}  // namespace mdfl
