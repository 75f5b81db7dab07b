#include "mdfl/profiles/profiles.hpp"

#include <fstream>
#include <random>

#include "json.hpp"
#include "mdfl/error.hpp"
#include "mdfl/seeding.hpp"

namespace mdfl {

using nlohmann::json;

double HardwareProfile::workload_scale(int epochs, std::size_t n_samples) const {
    return (static_cast<double>(epochs) * static_cast<double>(n_samples)) /
           (static_cast<double>(ref_epochs) * static_cast<double>(ref_samples));
}

std::vector<HardwareProfile> bundled_hardware_profiles() {
    return {
        {"Raspberry Pi 4 (Model B) CPU", 38.18, 69.87, 20, 130},
        {"Jetson Nano CPU", 50.31, 27.3, 20, 130},
        {"Jetson Nano GPU", 33.10, 22.5, 20, 130},
        {"Jetson Xavier NX CPU", 23.12, 15.5, 20, 130},
        {"Jetson Xavier NX GPU", 16.11, 13.7, 20, 130},
        {"Jetson AGX Xavier CPU", 16.0, 8.85, 20, 130},
        {"Jetson AGX Xavier GPU", 11.11, 7.36, 20, 130},
        {"Jetson TX2 CPU", 42.79, 128.9, 20, 130},
        {"Jetson TX2 GPU", 28.73, 87.3, 20, 130},
    };
}

std::vector<NetworkProfile> bundled_network_profiles() {
    return {
        {4.2, 4.0},    {8.5, 4.1},    {12.3, 5.2},   {15.8, 6.0},   {19.4, 7.3},
        {23.1, 8.2},   {27.6, 9.0},   {31.2, 10.4},  {35.9, 11.1},  {40.3, 12.5},
        {45.7, 13.2},  {51.2, 14.0},  {57.8, 15.3},  {63.5, 16.8},  {70.1, 17.5},
        {78.4, 18.9},  {86.0, 20.2},  {95.3, 22.6},  {107.9, 25.1}, {120.0, 28.4},
    };
}

namespace {

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open profile table " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

}  // namespace

std::vector<HardwareProfile> load_hardware_profiles(const std::filesystem::path& path) {
    const json j = read_json(path);
    std::vector<HardwareProfile> out;
    try {
        for (const auto& e : j) {
            HardwareProfile p{e.at("name").get<std::string>(), e.at("train_time_ref").get<double>(),
                              e.at("energy_ref").get<double>(), e.at("ref_epochs").get<int>(),
                              e.at("ref_samples").get<int>()};
            if (p.train_time_ref <= 0 || p.energy_ref <= 0 || p.ref_epochs <= 0 || p.ref_samples <= 0) {
                throw ConfigError(path.string() + ": profile '" + p.name + "' must have positive values");
            }
            out.push_back(std::move(p));
        }
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    if (out.empty()) throw ConfigError(path.string() + ": empty hardware table");
    return out;
}

std::vector<NetworkProfile> load_network_profiles(const std::filesystem::path& path) {
    const json j = read_json(path);
    std::vector<NetworkProfile> out;
    try {
        for (const auto& e : j) {
            NetworkProfile p{e.at("download_mbps").get<double>(), e.at("upload_mbps").get<double>()};
            if (p.download_mbps <= 0 || p.upload_mbps <= 0) {
                throw ConfigError(path.string() + ": bandwidths must be positive");
            }
            out.push_back(p);
        }
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    if (out.empty()) throw ConfigError(path.string() + ": empty network table");
    return out;
}

double battery_drain_threshold(double capacity_mah, double fraction, double voltage) {
    return fraction * capacity_mah * voltage * 3.6;
}

std::map<DeviceId, DeviceProfile> assign_profiles(const Topology& topology,
                                                  const std::vector<HardwareProfile>& hw_table,
                                                  const std::vector<NetworkProfile>& net_table, std::uint64_t seed) {
    if (hw_table.empty() || net_table.empty()) throw ConfigError("assign_profiles: empty profile table");
    std::mt19937_64 rng(hash_seed({seed, tag("profiles")}));
    std::uniform_int_distribution<std::size_t> pick_hw(0, hw_table.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_net(0, net_table.size() - 1);
    std::map<DeviceId, DeviceProfile> out;
    for (const auto& [user, devices] : topology.devices_of_user) {
        const NetworkProfile& net = net_table[pick_net(rng)];
        for (DeviceId d : devices) out[d] = DeviceProfile{hw_table[pick_hw(rng)], net};
    }
    return out;
}

double round_train_time(const HardwareProfile& hw, int epochs, std::size_t n_samples) {
    return hw.train_time_ref * hw.workload_scale(epochs, n_samples);
}

double round_energy(const HardwareProfile& hw, int epochs, std::size_t n_samples) {
    return hw.energy_ref * hw.workload_scale(epochs, n_samples);
}

TransferTimes transfer_time(double model_bytes, const NetworkProfile& net) {
    const double bits = 8.0 * model_bytes;
    return {bits / (net.download_mbps * 1e6), bits / (net.upload_mbps * 1e6)};
}

RoundCost round_cost(const HardwareProfile& hw, const NetworkProfile& net, int epochs, std::size_t n_samples,
                     double model_bytes) {
    const auto t = transfer_time(model_bytes, net);
    return {t.download, t.upload, round_train_time(hw, epochs, n_samples), round_energy(hw, epochs, n_samples)};
}

DeviceRuntimeState accrue_round(DeviceRuntimeState state, const HardwareProfile& hw, const NetworkProfile& net,
                                int epochs, std::size_t n_samples, double model_bytes) {
    const RoundCost c = round_cost(hw, net, epochs, n_samples, model_bytes);
    state.accumulated_drain += c.energy;
    state.last_round_time = c.total_time();
    ++state.rounds_participated;
    return state;
}

bool is_invalid(const DeviceRuntimeState& state) { return state.accumulated_drain >= state.drain_threshold; }

}  // namespace mdfl
