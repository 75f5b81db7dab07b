#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mdfl/numeric/model.hpp"
#include "mdfl/topology.hpp"

namespace mdfl {

/// One labelled, non-overlapping window of sensor samples. Features are
/// channel-major: features[ch * window_len + t].
struct SampleWindow {
    std::vector<double> features;
    int label = 0;
    std::int64_t timestamp_index = 0;  // position in the user's aligned stream
    // Where the window was first created. Partitioning rewrites user ids and
    // timestamp indices but carries these through unchanged.
    int origin_user = 0;
    std::int64_t origin_index = 0;

    bool operator==(const SampleWindow&) const = default;
};

struct DeviceDataset {
    UserId user_id = 0;
    DeviceId device_id = 0;
    std::string position;
    std::vector<SampleWindow> windows;  // sorted by timestamp_index
};

struct UserRecord {
    UserId user_id = 0;
    std::string name;
    std::vector<DeviceDataset> devices;
};

struct MultiDeviceDataset {
    std::vector<UserRecord> users;
    int num_classes = 0;
    int channels = 0;
    int window_len = 0;
    std::vector<std::string> label_names;  // dense id -> original label

    std::size_t feature_dim() const {
        return static_cast<std::size_t>(channels) * static_cast<std::size_t>(window_len);
    }
    std::size_t device_count() const;
    std::size_t window_count() const;

    /// Checks label ranges, feature lengths, timestamp ordering and time
    /// alignment across each user's devices. Throws on the first violation.
    void validate() const;

    Topology topology() const;
    const DeviceDataset* find_device(DeviceId id) const;
};

/// Design matrix + labels for a device, rows in timestamp order.
Batch to_batch(const DeviceDataset& device, std::size_t feature_dim);

}  // namespace mdfl
