#include "mdfl/data/csv_ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "mdfl/error.hpp"

namespace mdfl {

namespace {

struct Row {
    std::int64_t timestamp = 0;
    std::string label;
    std::vector<double> channels;
};

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

template <typename T>
T parse_number(const std::string& s, const std::filesystem::path& path, std::size_t line_no) {
    T value{};
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": cannot parse number '" + s + "'");
    }
    return value;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw SchemaError("missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

bool all_integers(const std::set<std::string>& labels) {
    for (const auto& l : labels) {
        long long v = 0;
        auto [ptr, ec] = std::from_chars(l.data(), l.data() + l.size(), v);
        if (ec != std::errc{} || ptr != l.data() + l.size()) return false;
    }
    return true;
}

}  // namespace

IngestResult ingest_csv(const std::filesystem::path& path, const CsvSchema& schema, int window_len) {
    if (window_len < 1) throw ConfigError("window_len must be >= 1");
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw SchemaError(path.string() + ": empty file");
    const auto header = split_line(line);
    const auto user_idx = column_index(header, schema.user_col);
    const auto device_idx = column_index(header, schema.device_col);
    const auto label_idx = column_index(header, schema.label_col);
    const auto ts_idx = column_index(header, schema.timestamp_col);
    std::vector<std::size_t> channel_idx;
    if (schema.channel_cols.empty()) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i].rfind(schema.channel_prefix, 0) == 0) channel_idx.push_back(i);
        }
        if (channel_idx.empty()) throw SchemaError("no channel columns with prefix '" + schema.channel_prefix + "'");
    } else {
        for (const auto& c : schema.channel_cols) channel_idx.push_back(column_index(header, c));
    }

    std::map<std::string, std::map<std::string, std::vector<Row>>> grouped;
    std::set<std::string> raw_labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto f = split_line(line);
        if (f.size() != header.size()) {
            throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
        }
        Row r;
        r.timestamp = parse_number<std::int64_t>(f[ts_idx], path, line_no);
        r.label = f[label_idx];
        r.channels.reserve(channel_idx.size());
        for (auto c : channel_idx) r.channels.push_back(parse_number<double>(f[c], path, line_no));
        raw_labels.insert(r.label);
        grouped[f[user_idx]][f[device_idx]].push_back(std::move(r));
    }

    IngestResult result;
    auto& ds = result.dataset;
    ds.channels = static_cast<int>(channel_idx.size());
    ds.window_len = window_len;

    // Dense label ids: numeric order when every label is an integer,
    // lexicographic otherwise.
    std::vector<std::string> names(raw_labels.begin(), raw_labels.end());
    if (all_integers(raw_labels)) {
        std::sort(names.begin(), names.end(),
                  [](const std::string& a, const std::string& b) { return std::stoll(a) < std::stoll(b); });
    }
    std::map<std::string, int> label_id;
    for (std::size_t i = 0; i < names.size(); ++i) label_id[names[i]] = static_cast<int>(i);
    ds.label_names = names;
    ds.num_classes = static_cast<int>(names.size());

    const auto w = static_cast<std::size_t>(window_len);
    const auto n_ch = channel_idx.size();
    DeviceId next_device = 0;
    UserId next_user = 0;
    for (auto& [user_name, devices] : grouped) {
        std::int64_t lo = std::numeric_limits<std::int64_t>::min();
        std::int64_t hi = std::numeric_limits<std::int64_t>::max();
        for (auto& [dev_name, rows] : devices) {
            std::stable_sort(rows.begin(), rows.end(),
                             [](const Row& a, const Row& b) { return a.timestamp < b.timestamp; });
            lo = std::max(lo, rows.front().timestamp);
            hi = std::min(hi, rows.back().timestamp);
        }
        if (lo > hi) {
            throw AlignmentError("user '" + user_name + "': devices share no common timestamps");
        }
        bool trimmed = false;
        std::size_t n_windows = std::numeric_limits<std::size_t>::max();
        for (auto& [dev_name, rows] : devices) {
            const auto before = rows.size();
            std::erase_if(rows, [&](const Row& r) { return r.timestamp < lo || r.timestamp > hi; });
            trimmed = trimmed || rows.size() != before;
            n_windows = std::min(n_windows, rows.size() / w);
        }
        if (trimmed) {
            auto msg = "user '" + user_name + "': devices truncated to common timestamp range [" +
                       std::to_string(lo) + ", " + std::to_string(hi) + "]";
            spdlog::warn("{}", msg);
            result.warnings.push_back(std::move(msg));
        }

        UserRecord user;
        user.user_id = next_user++;
        user.name = user_name;
        for (auto& [dev_name, rows] : devices) {
            DeviceDataset dev;
            dev.user_id = user.user_id;
            dev.device_id = next_device++;
            dev.position = dev_name;
            for (std::size_t k = 0; k < n_windows; ++k) {
                SampleWindow sw;
                sw.features.resize(n_ch * w);
                std::vector<int> votes(names.size(), 0);
                for (std::size_t t = 0; t < w; ++t) {
                    const Row& r = rows[k * w + t];
                    for (std::size_t c = 0; c < n_ch; ++c) sw.features[c * w + t] = r.channels[c];
                    ++votes[static_cast<std::size_t>(label_id[r.label])];
                }
                // majority label, ties to the smaller id
                sw.label = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
                sw.timestamp_index = static_cast<std::int64_t>(k);
                sw.origin_user = user.user_id;
                sw.origin_index = sw.timestamp_index;
                dev.windows.push_back(std::move(sw));
            }
            user.devices.push_back(std::move(dev));
        }
        ds.users.push_back(std::move(user));
    }
    if (ds.num_classes < 2) throw SchemaError(path.string() + ": need at least two distinct labels");
    ds.validate();
    return result;
}

}  // namespace mdfl
