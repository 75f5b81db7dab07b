#pragma once

#include <cstdint>
#include <vector>

#include "mdfl/data/dataset.hpp"
#include "mdfl/numeric/model.hpp"
#include "mdfl/numeric/optimizer.hpp"
#include "mdfl/profiles/profiles.hpp"

namespace mdfl {

struct LocalTrainConfig {
    int epochs = 20;
    int batch_size = 32;
    double lr = 1e-3;
};

struct ClientResult {
    DeviceId device_id = 0;
    ModelWeights weights;  // the updated global model; personal models never go here
    std::size_t n_samples = 0;
    std::vector<double> per_sample_losses;  // of the received model, before training
    RoundCost cost;                         // filled in by the simulator
};

/// Aligned: every device of the user gets the same seed for the round, so
/// they walk their (time-aligned) training windows in the same order.
/// Otherwise the device id is mixed in.
std::uint64_t time_aligned_order_seed(UserId user, int round, std::uint64_t global_seed, bool aligned,
                                      DeviceId device);

/// Records the received model's per-sample losses, then runs `epochs` passes
/// of mini-batch Adam from w_r with a fresh optimizer state. Batches come
/// from one shuffle per epoch drawn from a generator seeded by order_seed.
/// Throws DomainError on an empty training set.
ClientResult local_update(const ModelWeights& w_r, DeviceId device, const Batch& train,
                          const LocalTrainConfig& cfg, std::uint64_t order_seed);

ClientResult local_update(const ModelWeights& w_r, const DeviceDataset& device, std::size_t feature_dim,
                          const LocalTrainConfig& cfg, std::uint64_t order_seed);

/// Ditto-style step on the device's own model: each mini-batch gradient gets
/// the proximal term lambda * (v - w_r) before going to `opt`, which
/// persists across rounds. Batch order follows order_seed exactly as in
/// local_update. The learning rate is the one stored in `opt`.
void personal_update(ModelWeights& v, OptimizerState& opt, const ModelWeights& w_r, const Batch& train,
                     const LocalTrainConfig& cfg, double lambda, std::uint64_t order_seed);

}  // namespace mdfl
