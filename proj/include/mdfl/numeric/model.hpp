#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mdfl {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Activation { relu, tanh };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

/// Shape of the multilayer perceptron classifier.
struct ArchSpec {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_layers{128, 64};
    std::size_t num_classes = 2;
    Activation activation = Activation::relu;

    /// Throws ConfigError on zero-sized layers or fewer than two classes.
    void validate() const;
    /// input, hidden..., output
    std::vector<std::size_t> layer_sizes() const;
    std::size_t param_count() const;

    bool operator==(const ArchSpec&) const = default;
};

/// Flat parameter vector. Layer l occupies a row-major weight block
/// [out_l x in_l] followed by its bias [out_l].
struct ModelWeights {
    ArchSpec arch;
    std::vector<double> params;

    std::size_t param_count() const { return params.size(); }
};

struct Batch {
    Matrix inputs;            // [batch x input_dim]
    std::vector<int> labels;  // [batch]

    std::size_t size() const { return labels.size(); }
};

struct LossAndGrads {
    double mean_loss = 0.0;
    std::vector<double> per_sample_losses;
    std::vector<double> grads;
};

/// Glorot-uniform weights (s = sqrt(6 / (fan_in + fan_out)) per layer), zero
/// biases. Deterministic in (arch, seed).
ModelWeights init_model(const ArchSpec& arch, std::uint64_t seed);

ModelWeights zero_model(const ArchSpec& arch);

/// Softmax class probabilities, one row per batch row.
Matrix forward(const ModelWeights& m, const Matrix& inputs);

/// Categorical cross-entropy (natural log, probabilities clamped at 1e-12)
/// and the gradient of the mean loss.
LossAndGrads loss_and_grads(const ModelWeights& m, const Batch& b);

/// Per-sample cross-entropy without the backward pass.
std::vector<double> per_sample_losses(const ModelWeights& m, const Batch& b);

std::vector<int> predict(const ModelWeights& m, const Matrix& inputs);

inline constexpr double kProbabilityFloor = 1e-12;

}  // namespace mdfl
