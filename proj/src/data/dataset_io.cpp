#include "mdfl/data/dataset_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "mdfl/error.hpp"

namespace mdfl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void append_double(std::string& out, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

template <typename T>
T parse_field(std::string_view s, const fs::path& file) {
    T v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw SchemaError(file.string() + ": bad field '" + std::string(s) + "'");
    }
    return v;
}

std::string device_file(const DeviceDataset& d) {
    return "u" + std::to_string(d.user_id) + "_d" + std::to_string(d.device_id) + ".csv";
}

}  // namespace

void export_dataset(const MultiDeviceDataset& ds, const fs::path& dir) {
    ds.validate();
    fs::create_directories(dir);
    json manifest;
    manifest["format_version"] = 1;
    manifest["num_classes"] = ds.num_classes;
    manifest["channels"] = ds.channels;
    manifest["window_len"] = ds.window_len;
    manifest["label_map"] = ds.label_names;
    manifest["users"] = json::array();
    for (const auto& u : ds.users) {
        json ju{{"user_id", u.user_id}, {"name", u.name}, {"devices", json::array()}};
        for (const auto& d : u.devices) {
            const auto file = device_file(d);
            ju["devices"].push_back(
                {{"device_id", d.device_id}, {"position", d.position}, {"file", file}, {"windows", d.windows.size()}});
            std::string text = "timestamp_index,label,origin_user,origin_index";
            for (std::size_t j = 0; j < ds.feature_dim(); ++j) text += ",f" + std::to_string(j);
            text += '\n';
            for (const auto& w : d.windows) {
                text += std::to_string(w.timestamp_index) + ',' + std::to_string(w.label) + ',' +
                        std::to_string(w.origin_user) + ',' + std::to_string(w.origin_index);
                for (double v : w.features) {
                    text += ',';
                    append_double(text, v);
                }
                text += '\n';
            }
            std::ofstream(dir / file) << text;
        }
        manifest["users"].push_back(std::move(ju));
    }
    std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
}

MultiDeviceDataset import_dataset(const fs::path& dir) {
    std::ifstream mf(dir / "manifest.json");
    if (!mf) throw SchemaError("no manifest.json in " + dir.string());
    json manifest;
    try {
        manifest = json::parse(mf);
    } catch (const json::exception& e) {
        throw SchemaError((dir / "manifest.json").string() + ": " + e.what());
    }
    MultiDeviceDataset ds;
    try {
        ds.num_classes = manifest.at("num_classes").get<int>();
        ds.channels = manifest.at("channels").get<int>();
        ds.window_len = manifest.at("window_len").get<int>();
        ds.label_names = manifest.at("label_map").get<std::vector<std::string>>();
        for (const auto& ju : manifest.at("users")) {
            UserRecord u;
            u.user_id = ju.at("user_id").get<int>();
            u.name = ju.at("name").get<std::string>();
            for (const auto& jd : ju.at("devices")) {
                DeviceDataset d;
                d.user_id = u.user_id;
                d.device_id = jd.at("device_id").get<int>();
                d.position = jd.at("position").get<std::string>();
                const fs::path file = dir / jd.at("file").get<std::string>();
                std::ifstream in(file);
                if (!in) throw SchemaError("cannot open " + file.string());
                std::string line;
                std::getline(in, line);  // header
                while (std::getline(in, line)) {
                    if (line.empty()) continue;
                    std::vector<std::string_view> f;
                    std::string_view sv(line);
                    while (true) {
                        const auto pos = sv.find(',');
                        f.push_back(sv.substr(0, pos));
                        if (pos == std::string_view::npos) break;
                        sv.remove_prefix(pos + 1);
                    }
                    if (f.size() != 4 + ds.feature_dim()) throw SchemaError(file.string() + ": wrong field count");
                    SampleWindow w;
                    w.timestamp_index = parse_field<std::int64_t>(f[0], file);
                    w.label = parse_field<int>(f[1], file);
                    w.origin_user = parse_field<int>(f[2], file);
                    w.origin_index = parse_field<std::int64_t>(f[3], file);
                    w.features.reserve(ds.feature_dim());
                    for (std::size_t j = 4; j < f.size(); ++j) w.features.push_back(parse_field<double>(f[j], file));
                    d.windows.push_back(std::move(w));
                }
                u.devices.push_back(std::move(d));
            }
            ds.users.push_back(std::move(u));
        }
    } catch (const json::exception& e) {
        throw SchemaError((dir / "manifest.json").string() + ": " + e.what());
    }
    ds.validate();
    return ds;
}

}  // namespace mdfl
