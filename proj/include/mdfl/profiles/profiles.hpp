#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mdfl/topology.hpp"

namespace mdfl {

/// Measured cost of one reference training round on a processor. Other
/// workloads scale linearly in epochs x samples.
struct HardwareProfile {
    std::string name;
    double train_time_ref = 0.0;  // seconds
    double energy_ref = 0.0;      // joules
    int ref_epochs = 20;
    int ref_samples = 130;

    double workload_scale(int epochs, std::size_t n_samples) const;
    bool operator==(const HardwareProfile&) const = default;
};

struct NetworkProfile {
    double download_mbps = 0.0;
    double upload_mbps = 0.0;

    bool operator==(const NetworkProfile&) const = default;
};

struct DeviceRuntimeState {
    DeviceId device_id = 0;
    UserId user_id = 0;
    double accumulated_drain = 0.0;  // joules
    double drain_threshold = 0.0;    // joules
    std::optional<double> last_round_time;
    std::optional<std::vector<double>> last_per_sample_losses;
    int rounds_participated = 0;
};

struct DeviceProfile {
    HardwareProfile hardware;
    NetworkProfile network;
};

struct RoundCost {
    double t_download = 0.0;
    double t_upload = 0.0;
    double t_train = 0.0;
    double energy = 0.0;

    double total_time() const { return t_download + t_train + t_upload; }
};

/// Nine processor profiles for the HAR workload (seconds and joules per
/// round at 20 local epochs over 130 samples).
std::vector<HardwareProfile> bundled_hardware_profiles();

/// Twenty mobile (download, upload) pairs between 4 and 120 Mbps.
std::vector<NetworkProfile> bundled_network_profiles();

std::vector<HardwareProfile> load_hardware_profiles(const std::filesystem::path& path);
std::vector<NetworkProfile> load_network_profiles(const std::filesystem::path& path);

/// fraction * capacity_mah * voltage * 3.6 joules.
double battery_drain_threshold(double capacity_mah = 3000.0, double fraction = 0.10, double voltage = 3.7);

inline const double kDefaultDrainThreshold = battery_drain_threshold();

/// Hardware drawn uniformly per device; network drawn uniformly per user and
/// shared by all of that user's devices.
std::map<DeviceId, DeviceProfile> assign_profiles(const Topology& topology,
                                                  const std::vector<HardwareProfile>& hw_table,
                                                  const std::vector<NetworkProfile>& net_table, std::uint64_t seed);

double round_train_time(const HardwareProfile& hw, int epochs, std::size_t n_samples);
double round_energy(const HardwareProfile& hw, int epochs, std::size_t n_samples);

struct TransferTimes {
    double download = 0.0;
    double upload = 0.0;
};
TransferTimes transfer_time(double model_bytes, const NetworkProfile& net);

RoundCost round_cost(const HardwareProfile& hw, const NetworkProfile& net, int epochs, std::size_t n_samples,
                     double model_bytes);

/// State after the device trained this round: drain grows by the round's
/// energy, last_round_time = t_dl + t_ul + t_train.
DeviceRuntimeState accrue_round(DeviceRuntimeState state, const HardwareProfile& hw, const NetworkProfile& net,
                                int epochs, std::size_t n_samples, double model_bytes);

/// drain >= threshold. Once true it stays true: there is no recharge.
bool is_invalid(const DeviceRuntimeState& state);

}  // namespace mdfl
