#pragma once

#include <functional>
#include <span>
#include <vector>

#include "mdfl/numeric/model.hpp"

namespace mdfl {

struct AggregationEntry {
    int device_id = 0;
    std::reference_wrapper<const ModelWeights> weights;
    std::size_t count = 0;
};

/// Sample-count weighted average. Entries are summed in ascending device id
/// order whatever order they arrive in, so the result is bitwise
/// reproducible.
ModelWeights weighted_average(std::span<const AggregationEntry> entries);

/// grads + lambda * (v - w). lambda == 0 returns grads unchanged.
std::vector<double> prox_grad(std::span<const double> grads, const ModelWeights& v,
                              const ModelWeights& w, double lambda);

double l2_distance(const ModelWeights& a, const ModelWeights& b);

}  // namespace mdfl
