#pragma once

#include <cstdint>
#include <utility>

#include "mdfl/data/dataset.hpp"

namespace mdfl {

/// Per-user random split of the aligned timestamp set: round(fraction * n)
/// timestamps (clamped to [1, n-1]) go to train, the same ones on every
/// device of the user. Deterministic in seed.
std::pair<MultiDeviceDataset, MultiDeviceDataset> train_test_split(const MultiDeviceDataset& ds,
                                                                   double train_fraction, std::uint64_t seed);

}  // namespace mdfl
