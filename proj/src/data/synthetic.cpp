#include "mdfl/data/synthetic.hpp"

#include <cmath>
#include <random>

#include "mdfl/error.hpp"
#include "mdfl/seeding.hpp"

namespace mdfl {

namespace {

const char* const kPositions[] = {"head", "chest", "upperarm", "waist", "forearm", "thigh", "shin"};

std::string position_name(int k) {
    if (k < 7) return kPositions[k];
    return "pos" + std::to_string(k);
}

std::vector<double> gaussian_vector(std::mt19937_64& rng, int n, double scale) {
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = scale * nd(rng);
    return v;
}

struct Affine {
    Matrix a;
    std::vector<double> b;
};

}  // namespace

void SynthConfig::validate() const {
    if (num_users < 1 || devices_per_user < 1 || windows_per_class < 1 || channels < 1 || window_len < 1) {
        throw ConfigError("synthetic config: counts must be positive");
    }
    if (num_classes < 2) throw ConfigError("synthetic config: num_classes must be >= 2");
    if (user_spread < 0 || device_transform_scale < 0 || noise_sigma < 0 || class_separation < 0) {
        throw ConfigError("synthetic config: spreads must be non-negative");
    }
}

MultiDeviceDataset synthesize(const SynthConfig& cfg) {
    cfg.validate();
    const int ch = cfg.channels;
    const int len = cfg.window_len;

    std::mt19937_64 class_rng(hash_seed({cfg.seed, tag("class-centres")}));
    std::vector<std::vector<double>> centres;
    for (int c = 0; c < cfg.num_classes; ++c) centres.push_back(gaussian_vector(class_rng, ch, cfg.class_separation));

    std::mt19937_64 device_rng(hash_seed({cfg.seed, tag("device-transforms")}));
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<Affine> transforms;
    const double s = cfg.device_transform_scale;
    // A body position sees the shared motion in its own sensor frame: a
    // rotation by s radians (Cayley transform of a random skew matrix) and
    // an offset whose norm is s times the expected class-centre norm. Only
    // the directions are random.
    for (int k = 0; k < cfg.devices_per_user; ++k) {
        const Matrix eye = Matrix::Identity(ch, ch);
        Affine t{eye, std::vector<double>(static_cast<std::size_t>(ch), 0.0)};
        Matrix g(ch, ch);
        for (int i = 0; i < ch; ++i)
            for (int j = 0; j < ch; ++j) g(i, j) = nd(device_rng);
        const Matrix skew = g - g.transpose();
        const double skew_norm = skew.norm();
        if (s > 0 && skew_norm > 0) {
            const Matrix a = (s * std::sqrt(2.0) / skew_norm) * skew;
            t.a = (eye - 0.5 * a).partialPivLu().solve(eye + 0.5 * a);
        }
        auto dir = gaussian_vector(device_rng, ch, 1.0);
        double dir_norm = 0.0;
        for (double x : dir) dir_norm += x * x;
        dir_norm = std::sqrt(dir_norm);
        if (dir_norm > 0) {
            const double len = s * cfg.class_separation * std::sqrt(static_cast<double>(ch));
            for (int i = 0; i < ch; ++i) t.b[static_cast<std::size_t>(i)] = len * dir[static_cast<std::size_t>(i)] / dir_norm;
        }
        transforms.push_back(std::move(t));
    }

    MultiDeviceDataset ds;
    ds.num_classes = cfg.num_classes;
    ds.channels = ch;
    ds.window_len = len;
    for (int c = 0; c < cfg.num_classes; ++c) ds.label_names.push_back(std::to_string(c));

    DeviceId next_device = 0;
    for (int u = 0; u < cfg.num_users; ++u) {
        std::mt19937_64 rng(hash_seed({cfg.seed, tag("user"), static_cast<std::uint64_t>(u)}));
        UserRecord user;
        user.user_id = u;
        user.name = "user" + std::to_string(u);
        for (int k = 0; k < cfg.devices_per_user; ++k) {
            DeviceDataset d;
            d.user_id = u;
            d.device_id = next_device++;
            d.position = position_name(k);
            user.devices.push_back(std::move(d));
        }

        std::int64_t ts = 0;
        std::vector<double> latent(static_cast<std::size_t>(ch * len));
        for (int c = 0; c < cfg.num_classes; ++c) {
            auto mean = gaussian_vector(rng, ch, cfg.user_spread);
            for (int i = 0; i < ch; ++i) mean[static_cast<std::size_t>(i)] += centres[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)];
            // one activity session per class, windows contiguous in time
            for (int wi = 0; wi < cfg.windows_per_class; ++wi, ++ts) {
                const auto jitter = gaussian_vector(rng, ch, cfg.noise_sigma);
                for (int i = 0; i < ch; ++i) {
                    for (int t = 0; t < len; ++t) {
                        latent[static_cast<std::size_t>(i * len + t)] =
                            mean[static_cast<std::size_t>(i)] + jitter[static_cast<std::size_t>(i)] + cfg.noise_sigma * nd(rng);
                    }
                }
                for (int k = 0; k < cfg.devices_per_user; ++k) {
                    const auto& tr = transforms[static_cast<std::size_t>(k)];
                    SampleWindow w;
                    w.features.assign(latent.size(), 0.0);
                    for (int i = 0; i < ch; ++i) {
                        for (int t = 0; t < len; ++t) {
                            double v = tr.b[static_cast<std::size_t>(i)];
                            for (int j = 0; j < ch; ++j) v += tr.a(i, j) * latent[static_cast<std::size_t>(j * len + t)];
                            w.features[static_cast<std::size_t>(i * len + t)] = v;
                        }
                    }
                    w.label = c;
                    w.timestamp_index = ts;
                    w.origin_user = u;
                    w.origin_index = ts;
                    user.devices[static_cast<std::size_t>(k)].windows.push_back(std::move(w));
                }
            }
        }
        ds.users.push_back(std::move(user));
    }
    return ds;
}

}  // namespace mdfl
