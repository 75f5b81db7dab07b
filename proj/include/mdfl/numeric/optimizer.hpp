#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mdfl/numeric/model.hpp"

namespace mdfl {

enum class OptimizerKind { adam, sgd };

std::string to_string(OptimizerKind k);
OptimizerKind optimizer_from_string(const std::string& s);

struct OptimizerState {
    OptimizerKind kind = OptimizerKind::adam;
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::uint64_t step_count = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static OptimizerState adam(std::size_t n_params, double lr);
    static OptimizerState sgd(std::size_t n_params, double lr);
};

/// In-place update. Adam uses bias-corrected moments; SGD is p -= lr * g.
void apply_step(OptimizerState& state, std::vector<double>& params, std::span<const double> grads);

/// Value-returning form of apply_step.
std::pair<OptimizerState, ModelWeights> optimizer_step(OptimizerState state, ModelWeights m,
                                                       std::span<const double> grads);

}  // namespace mdfl
