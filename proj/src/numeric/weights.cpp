#include "mdfl/numeric/weights.hpp"

#include <algorithm>
#include <cmath>

#include "mdfl/error.hpp"

namespace mdfl {

ModelWeights weighted_average(std::span<const AggregationEntry> entries) {
    if (entries.empty()) throw DomainError("weighted_average needs at least one entry");

    std::vector<const AggregationEntry*> order;
    order.reserve(entries.size());
    for (const auto& e : entries) order.push_back(&e);
    std::stable_sort(order.begin(), order.end(),
                     [](const auto* a, const auto* b) { return a->device_id < b->device_id; });

    const ModelWeights& first = order.front()->weights.get();
    std::size_t total = 0;
    for (const auto* e : order) {
        const ModelWeights& w = e->weights.get();
        if (!(w.arch == first.arch) || w.params.size() != first.params.size()) {
            throw ShapeError("weighted_average: architecture mismatch for device " +
                             std::to_string(e->device_id));
        }
        if (e->count == 0) throw DomainError("weighted_average: sample counts must be positive");
        total += e->count;
    }

    // Anchored at the first entry: w0 + sum_k c_k (w_k - w0). Equal to the
    // plain convex combination, but identical inputs come back bit for bit.
    const auto denom = static_cast<double>(total);
    ModelWeights out = first;
    for (std::size_t k = 1; k < order.size(); ++k) {
        const double c = static_cast<double>(order[k]->count) / denom;
        const auto& p = order[k]->weights.get().params;
        for (std::size_t i = 0; i < out.params.size(); ++i) out.params[i] += c * (p[i] - first.params[i]);
    }
    return out;
}

std::vector<double> prox_grad(std::span<const double> grads, const ModelWeights& v,
                              const ModelWeights& w, double lambda) {
    if (grads.size() != v.params.size() || v.params.size() != w.params.size()) {
        throw ShapeError("prox_grad: vector lengths disagree");
    }
    std::vector<double> out(grads.begin(), grads.end());
    if (lambda == 0.0) return out;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += lambda * (v.params[i] - w.params[i]);
    return out;
}

double l2_distance(const ModelWeights& a, const ModelWeights& b) {
    if (a.params.size() != b.params.size()) throw ShapeError("l2_distance: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.params.size(); ++i) {
        const double d = a.params[i] - b.params[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace mdfl
