#include "mdfl/data/split.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "mdfl/error.hpp"
#include "mdfl/seeding.hpp"

namespace mdfl {

std::pair<MultiDeviceDataset, MultiDeviceDataset> train_test_split(const MultiDeviceDataset& ds,
                                                                   double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("train_fraction must lie strictly between 0 and 1");
    }
    ds.validate();
    MultiDeviceDataset train = ds;
    MultiDeviceDataset test = ds;
    for (std::size_t ui = 0; ui < ds.users.size(); ++ui) {
        const auto& user = ds.users[ui];
        if (user.devices.empty()) continue;
        const auto& ref = user.devices.front().windows;
        const std::size_t n = ref.size();
        for (const auto& d : user.devices) {
            if (d.windows.size() < 2) {
                throw SplitError("device " + std::to_string(d.device_id) + " has " + std::to_string(d.windows.size()) +
                                 " windows, need at least 2 to split");
            }
        }
        std::vector<std::int64_t> stamps;
        stamps.reserve(n);
        for (const auto& w : ref) stamps.push_back(w.timestamp_index);
        std::mt19937_64 rng(hash_seed({seed, tag("split"), static_cast<std::uint64_t>(user.user_id)}));
        std::shuffle(stamps.begin(), stamps.end(), rng);
        auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
        n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
        const std::set<std::int64_t> in_train(stamps.begin(), stamps.begin() + static_cast<std::ptrdiff_t>(n_train));

        for (std::size_t k = 0; k < user.devices.size(); ++k) {
            auto& tr = train.users[ui].devices[k].windows;
            auto& te = test.users[ui].devices[k].windows;
            tr.clear();
            te.clear();
            for (const auto& w : user.devices[k].windows) {
                (in_train.contains(w.timestamp_index) ? tr : te).push_back(w);
            }
        }
    }
    return {std::move(train), std::move(test)};
}

}  // namespace mdfl
