#include "mdfl/numeric/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mdfl/error.hpp"

namespace mdfl {

namespace {

using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using ConstMatrixMap = Eigen::Map<const Matrix>;
using MatrixMap = Eigen::Map<Matrix>;
using ConstRowMap = Eigen::Map<const RowVector>;
using RowMap = Eigen::Map<RowVector>;

struct LayerView {
    std::size_t in = 0;
    std::size_t out = 0;
    std::size_t offset = 0;  // start of the weight block; bias follows
};

std::vector<LayerView> layer_views(const ArchSpec& arch) {
    const auto sizes = arch.layer_sizes();
    std::vector<LayerView> views;
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        views.push_back({sizes[l], sizes[l + 1], offset});
        offset += sizes[l] * sizes[l + 1] + sizes[l + 1];
    }
    return views;
}

void check_params(const ModelWeights& m) {
    if (m.params.size() != m.arch.param_count()) {
        throw ShapeError("model has " + std::to_string(m.params.size()) +
                         " parameters, architecture implies " +
                         std::to_string(m.arch.param_count()));
    }
}

void check_inputs(const ModelWeights& m, const Matrix& inputs) {
    check_params(m);
    if (inputs.rows() > 0 && static_cast<std::size_t>(inputs.cols()) != m.arch.input_dim) {
        throw ShapeError("input has " + std::to_string(inputs.cols()) + " columns, model expects " +
                         std::to_string(m.arch.input_dim));
    }
}

void activate(Matrix& z, Activation a) {
    if (a == Activation::relu) {
        z = z.cwiseMax(0.0);
    } else {
        z = z.array().tanh().matrix();
    }
}

// Runs the network, keeping every post-activation output. acts[0] is the
// input, acts.back() the softmax probabilities.
std::vector<Matrix> run_layers(const ModelWeights& m, const Matrix& inputs) {
    const auto views = layer_views(m.arch);
    std::vector<Matrix> acts;
    acts.reserve(views.size() + 1);
    acts.push_back(inputs);
    for (std::size_t l = 0; l < views.size(); ++l) {
        const auto& v = views[l];
        ConstMatrixMap w(m.params.data() + v.offset, static_cast<Eigen::Index>(v.out),
                         static_cast<Eigen::Index>(v.in));
        ConstRowMap b(m.params.data() + v.offset + v.in * v.out, static_cast<Eigen::Index>(v.out));
        Matrix z(acts.back().rows(), static_cast<Eigen::Index>(v.out));
        z.noalias() = acts.back() * w.transpose();
        z.rowwise() += b;
        if (l + 1 < views.size()) {
            activate(z, m.arch.activation);
        } else {
            for (Eigen::Index r = 0; r < z.rows(); ++r) {
                const double mx = z.row(r).maxCoeff();
                z.row(r) = (z.row(r).array() - mx).exp().matrix();
                z.row(r) /= z.row(r).sum();
            }
        }
        acts.push_back(std::move(z));
    }
    return acts;
}

std::vector<double> losses_from_probs(const Matrix& probs, const std::vector<int>& labels,
                                      std::size_t num_classes) {
    std::vector<double> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int y = labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
            throw ShapeError("label " + std::to_string(y) + " out of range");
        }
        const double p = probs(static_cast<Eigen::Index>(i), y);
        out[i] = -std::log(std::max(p, kProbabilityFloor));
    }
    return out;
}

void check_batch(const ModelWeights& m, const Batch& b) {
    check_inputs(m, b.inputs);
    if (static_cast<std::size_t>(b.inputs.rows()) != b.labels.size()) {
        throw ShapeError("batch has " + std::to_string(b.inputs.rows()) + " rows but " +
                         std::to_string(b.labels.size()) + " labels");
    }
}

}  // namespace

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    throw ConfigError("unknown activation '" + s + "' (expected relu or tanh)");
}

void ArchSpec::validate() const {
    if (input_dim < 1) throw ConfigError("input_dim must be >= 1");
    if (num_classes < 2) throw ConfigError("num_classes must be >= 2");
    for (auto h : hidden_layers) {
        if (h < 1) throw ConfigError("hidden layer sizes must be >= 1");
    }
}

std::vector<std::size_t> ArchSpec::layer_sizes() const {
    std::vector<std::size_t> sizes;
    sizes.push_back(input_dim);
    sizes.insert(sizes.end(), hidden_layers.begin(), hidden_layers.end());
    sizes.push_back(num_classes);
    return sizes;
}

std::size_t ArchSpec::param_count() const {
    const auto sizes = layer_sizes();
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) n += sizes[l] * sizes[l + 1] + sizes[l + 1];
    return n;
}

ModelWeights init_model(const ArchSpec& arch, std::uint64_t seed) {
    arch.validate();
    ModelWeights m{arch, std::vector<double>(arch.param_count(), 0.0)};
    std::mt19937_64 rng(seed);
    for (const auto& v : layer_views(arch)) {
        const double s = std::sqrt(6.0 / static_cast<double>(v.in + v.out));
        std::uniform_real_distribution<double> dist(-s, s);
        for (std::size_t k = 0; k < v.in * v.out; ++k) m.params[v.offset + k] = dist(rng);
    }
    return m;
}

ModelWeights zero_model(const ArchSpec& arch) {
    arch.validate();
    return ModelWeights{arch, std::vector<double>(arch.param_count(), 0.0)};
}

Matrix forward(const ModelWeights& m, const Matrix& inputs) {
    check_inputs(m, inputs);
    if (inputs.rows() == 0) return Matrix(0, static_cast<Eigen::Index>(m.arch.num_classes));
    return run_layers(m, inputs).back();
}

std::vector<double> per_sample_losses(const ModelWeights& m, const Batch& b) {
    check_batch(m, b);
    if (b.size() == 0) return {};
    return losses_from_probs(run_layers(m, b.inputs).back(), b.labels, m.arch.num_classes);
}

LossAndGrads loss_and_grads(const ModelWeights& m, const Batch& b) {
    check_batch(m, b);
    if (b.size() == 0) throw DomainError("loss_and_grads needs a non-empty batch");

    const auto views = layer_views(m.arch);
    auto acts = run_layers(m, b.inputs);

    LossAndGrads out;
    out.per_sample_losses = losses_from_probs(acts.back(), b.labels, m.arch.num_classes);
    double total = 0.0;
    for (double l : out.per_sample_losses) total += l;
    const auto n = static_cast<double>(b.size());
    out.mean_loss = total / n;
    out.grads.assign(m.params.size(), 0.0);

    // d(mean CE)/d(logits) = (p - onehot) / n
    Matrix delta = acts.back();
    for (std::size_t i = 0; i < b.size(); ++i) delta(static_cast<Eigen::Index>(i), b.labels[i]) -= 1.0;
    delta /= n;

    for (std::size_t li = views.size(); li-- > 0;) {
        const auto& v = views[li];
        const Matrix& a_prev = acts[li];
        MatrixMap gw(out.grads.data() + v.offset, static_cast<Eigen::Index>(v.out),
                     static_cast<Eigen::Index>(v.in));
        RowMap gb(out.grads.data() + v.offset + v.in * v.out, static_cast<Eigen::Index>(v.out));
        gw.noalias() = delta.transpose() * a_prev;
        gb = delta.colwise().sum();
        if (li == 0) break;

        ConstMatrixMap w(m.params.data() + v.offset, static_cast<Eigen::Index>(v.out),
                         static_cast<Eigen::Index>(v.in));
        Matrix next(delta.rows(), static_cast<Eigen::Index>(v.in));
        next.noalias() = delta * w;
        if (m.arch.activation == Activation::relu) {
            next = (a_prev.array() > 0.0).select(next, 0.0);
        } else {
            next.array() *= 1.0 - a_prev.array().square();
        }
        delta = std::move(next);
    }
    return out;
}

std::vector<int> predict(const ModelWeights& m, const Matrix& inputs) {
    const Matrix probs = forward(m, inputs);
    std::vector<int> out(static_cast<std::size_t>(probs.rows()));
    for (Eigen::Index r = 0; r < probs.rows(); ++r) {
        Eigen::Index arg = 0;
        probs.row(r).maxCoeff(&arg);
        out[static_cast<std::size_t>(r)] = static_cast<int>(arg);
    }
    return out;
}

}  // namespace mdfl
