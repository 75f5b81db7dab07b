#pragma once

#include <filesystem>

#include "mdfl/data/dataset.hpp"

namespace mdfl {

/// Writes manifest.json plus one CSV per device
/// (timestamp_index,label,origin_user,origin_index,f0..fD-1).
void export_dataset(const MultiDeviceDataset& ds, const std::filesystem::path& dir);

MultiDeviceDataset import_dataset(const std::filesystem::path& dir);

}  // namespace mdfl
