#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mdfl/data/dataset.hpp"

namespace mdfl {

/// Column names in a raw sensor CSV. An empty channel_cols list means "every
/// column whose name starts with channel_prefix, in header order".
struct CsvSchema {
    std::string user_col = "user";
    std::string device_col = "device";
    std::string label_col = "label";
    std::string timestamp_col = "timestamp";
    std::vector<std::string> channel_cols;
    std::string channel_prefix = "ch";

    bool operator==(const CsvSchema&) const = default;
};

struct IngestResult {
    MultiDeviceDataset dataset;
    std::vector<std::string> warnings;
};

/// Reads one row per sensor sample, groups rows by (user, device), trims
/// each user's devices to their common timestamp range and cuts
/// non-overlapping windows of window_len rows (a trailing partial window is
/// dropped). Raw labels are mapped to dense ids in sorted order; the mapping
/// is kept in dataset.label_names.
IngestResult ingest_csv(const std::filesystem::path& path, const CsvSchema& schema, int window_len);

}  // namespace mdfl
