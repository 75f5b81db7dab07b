#pragma once

#include <map>
#include <vector>

namespace mdfl {

using UserId = int;
using DeviceId = int;

/// Which devices belong to which user. Device ids are globally unique.
struct Topology {
    std::map<UserId, std::vector<DeviceId>> devices_of_user;
    std::map<DeviceId, UserId> user_of_device;

    void add(UserId user, DeviceId device) {
        devices_of_user[user].push_back(device);
        user_of_device[device] = user;
    }
    std::size_t device_count() const { return user_of_device.size(); }
    std::size_t user_count() const { return devices_of_user.size(); }
};

}  // namespace mdfl
