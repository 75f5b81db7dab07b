#include "mdfl/data/partition.hpp"

#include <algorithm>

#include "mdfl/error.hpp"

namespace mdfl {

namespace {

// [begin, end) ranges into a user's per-class timestamp list.
struct Chunk {
    std::size_t begin = 0;
    std::size_t end = 0;
};

}  // namespace

MultiDeviceDataset partition(const MultiDeviceDataset& ds, const PartitionConfig& cfg) {
    ds.validate();
    const int n_users = static_cast<int>(ds.users.size());
    if (n_users == 0) throw PartitionError("cannot partition an empty dataset");
    if (cfg.target_users < n_users) {
        throw PartitionError("target_users (" + std::to_string(cfg.target_users) + ") < existing users (" +
                             std::to_string(n_users) + ")");
    }
    const std::size_t k_devices = ds.users.front().devices.size();
    for (const auto& u : ds.users) {
        if (u.devices.size() != k_devices) throw PartitionError("all users need the same number of devices");
        for (std::size_t k = 0; k < k_devices; ++k) {
            if (u.devices[k].position != ds.users.front().devices[k].position) {
                throw PartitionError("user " + std::to_string(u.user_id) + " device positions differ from user " +
                                     std::to_string(ds.users.front().user_id));
            }
        }
    }

    if (cfg.target_users == n_users) return ds;

    const int m = cfg.target_users / n_users;
    const int remainder = cfg.target_users - m * n_users;
    const int n_chunks = m + (remainder > 0 ? 1 : 0);
    const auto n_classes = static_cast<std::size_t>(ds.num_classes);

    // Per original user, per class: indices (into device windows) in time order.
    std::vector<std::vector<std::vector<std::size_t>>> by_class(static_cast<std::size_t>(n_users));
    std::vector<std::vector<std::vector<Chunk>>> chunks(static_cast<std::size_t>(n_users));
    for (int o = 0; o < n_users; ++o) {
        const auto& user = ds.users[static_cast<std::size_t>(o)];
        auto& cls = by_class[static_cast<std::size_t>(o)];
        cls.assign(n_classes, {});
        if (k_devices > 0) {
            const auto& ref = user.devices.front().windows;
            for (std::size_t i = 0; i < ref.size(); ++i) cls[static_cast<std::size_t>(ref[i].label)].push_back(i);
        }
        auto& ch = chunks[static_cast<std::size_t>(o)];
        ch.assign(n_classes, {});
        for (std::size_t c = 0; c < n_classes; ++c) {
            const std::size_t n = cls[c].size();
            if (n == 0) continue;  // class not owned by this user
            if (n < static_cast<std::size_t>(n_chunks)) {
                throw PartitionError("user " + std::to_string(user.user_id) + ", class " + std::to_string(c) + ": " +
                                     std::to_string(n) + " windows, need at least " + std::to_string(n_chunks));
            }
            const std::size_t size = n / static_cast<std::size_t>(n_chunks);
            for (int j = 0; j < n_chunks; ++j) {
                ch[c].push_back({static_cast<std::size_t>(j) * size, static_cast<std::size_t>(j + 1) * size});
            }
            ch[c].front().end = size;  // chunk 0 proper; leftovers appended below
        }
    }

    // claimed[o][c][j]: chunk j of (o, c) went to a new user
    std::vector<std::vector<std::vector<bool>>> claimed(
        static_cast<std::size_t>(n_users),
        std::vector<std::vector<bool>>(n_classes, std::vector<bool>(static_cast<std::size_t>(n_chunks), false)));

    struct Source {
        int orig = 0;
        std::size_t cls = 0;
        int chunk = 0;
    };
    std::vector<std::vector<Source>> new_users;  // in output order
    for (int j = 1; j < n_chunks; ++j) {
        const int users_in_slot = (j < m) ? n_users : remainder;
        for (int o = 0; o < users_in_slot; ++o) {
            std::vector<Source> src;
            for (std::size_t c = 0; c < n_classes; ++c) {
                const int from = static_cast<int>((static_cast<std::size_t>(o) + c) % static_cast<std::size_t>(n_users));
                src.push_back({from, c, j});
                claimed[static_cast<std::size_t>(from)][c][static_cast<std::size_t>(j)] = true;
            }
            new_users.push_back(std::move(src));
        }
    }

    MultiDeviceDataset out;
    out.num_classes = ds.num_classes;
    out.channels = ds.channels;
    out.window_len = ds.window_len;
    out.label_names = ds.label_names;

    DeviceId next_device = 0;
    auto make_user = [&](UserId id, std::string name, const std::vector<std::pair<int, std::vector<std::size_t>>>& parts,
                         bool reindex) {
        // parts: (original user, window indices) in class-then-time order
        UserRecord user;
        user.user_id = id;
        user.name = std::move(name);
        for (std::size_t k = 0; k < k_devices; ++k) {
            DeviceDataset d;
            d.user_id = id;
            d.device_id = next_device++;
            d.position = ds.users.front().devices[k].position;
            std::int64_t ts = 0;
            for (const auto& [orig, idx] : parts) {
                const auto& src = ds.users[static_cast<std::size_t>(orig)].devices[k].windows;
                for (auto i : idx) {
                    SampleWindow w = src[i];
                    if (reindex) w.timestamp_index = ts++;
                    d.windows.push_back(std::move(w));
                }
            }
            user.devices.push_back(std::move(d));
        }
        out.users.push_back(std::move(user));
    };

    for (int o = 0; o < n_users; ++o) {
        const auto& cls = by_class[static_cast<std::size_t>(o)];
        const auto& ch = chunks[static_cast<std::size_t>(o)];
        std::vector<std::size_t> kept;
        for (std::size_t c = 0; c < n_classes; ++c) {
            if (cls[c].empty()) continue;
            std::vector<bool> take(cls[c].size(), true);
            for (int j = 1; j < n_chunks; ++j) {
                if (!claimed[static_cast<std::size_t>(o)][c][static_cast<std::size_t>(j)]) continue;
                const auto& r = ch[c][static_cast<std::size_t>(j)];
                for (auto i = r.begin; i < r.end; ++i) take[i] = false;
            }
            for (std::size_t i = 0; i < take.size(); ++i)
                if (take[i]) kept.push_back(cls[c][i]);
        }
        // Originals keep their windows in time order, not class order.
        std::sort(kept.begin(), kept.end());
        const auto& orig = ds.users[static_cast<std::size_t>(o)];
        make_user(o, orig.name, {{o, kept}}, false);
    }
    UserId next_user = n_users;
    for (const auto& src : new_users) {
        std::vector<std::pair<int, std::vector<std::size_t>>> parts;
        std::string name = "new" + std::to_string(next_user);
        for (const auto& s : src) {
            const auto& cls = by_class[static_cast<std::size_t>(s.orig)][s.cls];
            if (cls.empty()) continue;
            const auto& r = chunks[static_cast<std::size_t>(s.orig)][s.cls][static_cast<std::size_t>(s.chunk)];
            parts.push_back({s.orig, std::vector<std::size_t>(cls.begin() + static_cast<std::ptrdiff_t>(r.begin),
                                                              cls.begin() + static_cast<std::ptrdiff_t>(r.end))});
        }
        make_user(next_user++, std::move(name), parts, true);
    }
    return out;
}

}  // namespace mdfl
