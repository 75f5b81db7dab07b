#include "mdfl/sim/client.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "mdfl/error.hpp"
#include "mdfl/numeric/weights.hpp"
#include "mdfl/seeding.hpp"

namespace mdfl {

namespace {

void check_train(const Batch& train, const LocalTrainConfig& cfg) {
    if (train.size() == 0) throw DomainError("empty training set");
    if (cfg.epochs < 0) throw ConfigError("epochs must be >= 0");
    if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
}

template <class Adjust>
void run_epochs(ModelWeights& m, OptimizerState& opt, const Batch& train, const LocalTrainConfig& cfg,
                std::uint64_t order_seed, Adjust&& adjust) {
    const std::size_t n = train.size();
    const auto bs = static_cast<std::size_t>(cfg.batch_size);
    std::mt19937_64 rng(order_seed);
    std::vector<std::size_t> idx(n);
    Batch b;
    for (int e = 0; e < cfg.epochs; ++e) {
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t start = 0; start < n; start += bs) {
            const std::size_t k = std::min(bs, n - start);
            b.inputs.resize(static_cast<Eigen::Index>(k), train.inputs.cols());
            b.labels.resize(k);
            for (std::size_t i = 0; i < k; ++i) {
                const auto src = idx[start + i];
                b.inputs.row(static_cast<Eigen::Index>(i)) = train.inputs.row(static_cast<Eigen::Index>(src));
                b.labels[i] = train.labels[src];
            }
            auto lg = loss_and_grads(m, b);
            adjust(lg.grads, m);
            apply_step(opt, m.params, lg.grads);
        }
    }
}

}  // namespace

std::uint64_t time_aligned_order_seed(UserId user, int round, std::uint64_t global_seed, bool aligned,
                                      DeviceId device) {
    const auto u = static_cast<std::uint64_t>(user);
    const auto r = static_cast<std::uint64_t>(round);
    if (aligned) return hash_seed({global_seed, tag("order"), u, r});
    return hash_seed({global_seed, tag("order"), u, r, static_cast<std::uint64_t>(device)});
}

ClientResult local_update(const ModelWeights& w_r, DeviceId device, const Batch& train,
                          const LocalTrainConfig& cfg, std::uint64_t order_seed) {
    check_train(train, cfg);
    ClientResult out;
    out.device_id = device;
    out.n_samples = train.size();
    out.per_sample_losses = per_sample_losses(w_r, train);
    out.weights = w_r;
    auto opt = OptimizerState::adam(w_r.params.size(), cfg.lr);
    run_epochs(out.weights, opt, train, cfg, order_seed, [](std::vector<double>&, const ModelWeights&) {});
    return out;
}

ClientResult local_update(const ModelWeights& w_r, const DeviceDataset& device, std::size_t feature_dim,
                          const LocalTrainConfig& cfg, std::uint64_t order_seed) {
    return local_update(w_r, device.device_id, to_batch(device, feature_dim), cfg, order_seed);
}

void personal_update(ModelWeights& v, OptimizerState& opt, const ModelWeights& w_r, const Batch& train,
                     const LocalTrainConfig& cfg, double lambda, std::uint64_t order_seed) {
    check_train(train, cfg);
    if (lambda < 0) throw ConfigError("lambda must be >= 0");
    if (!(v.arch == w_r.arch)) throw ShapeError("personal and global models differ in architecture");
    run_epochs(v, opt, train, cfg, order_seed, [&](std::vector<double>& g, const ModelWeights& cur) {
        if (lambda != 0.0) g = prox_grad(g, cur, w_r, lambda);
    });
}

}  // namespace mdfl
