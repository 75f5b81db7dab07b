#include "mdfl/numeric/optimizer.hpp"

#include <cmath>

#include "mdfl/error.hpp"

namespace mdfl {

std::string to_string(OptimizerKind k) { return k == OptimizerKind::adam ? "adam" : "sgd"; }

OptimizerKind optimizer_from_string(const std::string& s) {
    if (s == "adam") return OptimizerKind::adam;
    if (s == "sgd") return OptimizerKind::sgd;
    throw ConfigError("unknown optimizer '" + s + "' (expected adam or sgd)");
}

OptimizerState OptimizerState::adam(std::size_t n_params, double lr) {
    OptimizerState s;
    s.kind = OptimizerKind::adam;
    s.first_moment.assign(n_params, 0.0);
    s.second_moment.assign(n_params, 0.0);
    s.lr = lr;
    return s;
}

OptimizerState OptimizerState::sgd(std::size_t n_params, double lr) {
    OptimizerState s = adam(n_params, lr);
    s.kind = OptimizerKind::sgd;
    return s;
}

void apply_step(OptimizerState& state, std::vector<double>& params, std::span<const double> grads) {
    if (grads.size() != params.size()) {
        throw ShapeError("gradient length " + std::to_string(grads.size()) + " != parameter count " +
                         std::to_string(params.size()));
    }
    ++state.step_count;
    if (state.kind == OptimizerKind::sgd) {
        for (std::size_t i = 0; i < params.size(); ++i) params[i] -= state.lr * grads[i];
        return;
    }
    if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size()) {
        throw ShapeError("optimizer moments do not match parameter count");
    }
    const double t = static_cast<double>(state.step_count);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        double& m = state.first_moment[i];
        double& v = state.second_moment[i];
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = state.beta2 * v + (1.0 - state.beta2) * g * g;
        const double m_hat = m / c1;
        const double v_hat = v / c2;
        params[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
}

std::pair<OptimizerState, ModelWeights> optimizer_step(OptimizerState state, ModelWeights m,
                                                       std::span<const double> grads) {
    apply_step(state, m.params, grads);
    return {std::move(state), std::move(m)};
}

}  // namespace mdfl
