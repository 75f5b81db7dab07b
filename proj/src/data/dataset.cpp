#include "mdfl/data/dataset.hpp"

#include <set>

#include "mdfl/error.hpp"

namespace mdfl {

std::size_t MultiDeviceDataset::device_count() const {
    std::size_t n = 0;
    for (const auto& u : users) n += u.devices.size();
    return n;
}

std::size_t MultiDeviceDataset::window_count() const {
    std::size_t n = 0;
    for (const auto& u : users)
        for (const auto& d : u.devices) n += d.windows.size();
    return n;
}

void MultiDeviceDataset::validate() const {
    if (num_classes < 2) throw SchemaError("dataset needs at least 2 classes");
    if (channels < 1 || window_len < 1) throw SchemaError("channels and window_len must be positive");
    std::set<DeviceId> seen;
    for (const auto& u : users) {
        const std::vector<SampleWindow>* ref = nullptr;
        for (const auto& d : u.devices) {
            if (!seen.insert(d.device_id).second) {
                throw SchemaError("duplicate device id " + std::to_string(d.device_id));
            }
            if (d.user_id != u.user_id) {
                throw SchemaError("device " + std::to_string(d.device_id) + " filed under user " +
                                  std::to_string(u.user_id) + " claims user " + std::to_string(d.user_id));
            }
            for (std::size_t i = 0; i < d.windows.size(); ++i) {
                const auto& w = d.windows[i];
                if (w.features.size() != feature_dim()) {
                    throw SchemaError("device " + std::to_string(d.device_id) + ": window feature length " +
                                      std::to_string(w.features.size()) + " != " + std::to_string(feature_dim()));
                }
                if (w.label < 0 || w.label >= num_classes) {
                    throw SchemaError("device " + std::to_string(d.device_id) + ": label " +
                                      std::to_string(w.label) + " out of range");
                }
                if (i > 0 && d.windows[i - 1].timestamp_index >= w.timestamp_index) {
                    throw SchemaError("device " + std::to_string(d.device_id) +
                                      ": windows not strictly sorted by timestamp_index");
                }
            }
            if (ref == nullptr) {
                ref = &d.windows;
                continue;
            }
            bool aligned = ref->size() == d.windows.size();
            for (std::size_t i = 0; aligned && i < ref->size(); ++i) {
                aligned = (*ref)[i].timestamp_index == d.windows[i].timestamp_index;
            }
            if (!aligned) {
                throw AlignmentError("user " + std::to_string(u.user_id) +
                                     ": devices do not share identical timestamp indices");
            }
        }
    }
}

Topology MultiDeviceDataset::topology() const {
    Topology t;
    for (const auto& u : users)
        for (const auto& d : u.devices) t.add(u.user_id, d.device_id);
    return t;
}

const DeviceDataset* MultiDeviceDataset::find_device(DeviceId id) const {
    for (const auto& u : users)
        for (const auto& d : u.devices)
            if (d.device_id == id) return &d;
    return nullptr;
}

Batch to_batch(const DeviceDataset& device, std::size_t feature_dim) {
    Batch b;
    b.inputs.resize(static_cast<Eigen::Index>(device.windows.size()), static_cast<Eigen::Index>(feature_dim));
    b.labels.reserve(device.windows.size());
    for (std::size_t i = 0; i < device.windows.size(); ++i) {
        const auto& w = device.windows[i];
        for (std::size_t j = 0; j < feature_dim; ++j) {
            b.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = w.features[j];
        }
        b.labels.push_back(w.label);
    }
    return b;
}

}  // namespace mdfl
