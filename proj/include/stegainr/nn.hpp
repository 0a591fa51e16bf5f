#pragma once

// Sine-activated coordinate MLP: parameters, forward pass, reverse-mode
// gradients of the mean squared error, and SGD/Adam updates.
//
// Layer i maps in_i -> out_i with weight matrix (out_i x in_i) and bias out_i.
// Hidden layers apply x -> sin(w_i * (W x + b)) with w_0 = omega0 and w_i = 1
// for i > 0; the last layer is affine. Batches are column-major matrices with
// one sample per column.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "stegainr/detail/sine_kernel.hpp"
#include "stegainr/errors.hpp"
#include "stegainr/random.hpp"

namespace stegainr {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Batch = Eigen::MatrixXd;
using MaskLayer = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ArchSpec {
    std::size_t in_dim = 2;
    std::size_t out_dim = 3;
    std::size_t hidden_layers = 8;
    std::size_t width = 128;
    double omega0 = 30.0;

    bool operator==(const ArchSpec&) const = default;

    void validate() const {
        if (in_dim < 1 || out_dim < 1 || hidden_layers < 1 || width < 1)
            throw ContractError("ArchSpec: all dimensions must be >= 1");
        if (!(omega0 > 0.0) || !std::isfinite(omega0))
            throw ContractError("ArchSpec: omega0 must be finite and > 0");
    }

    std::size_t layer_count() const noexcept { return hidden_layers + 1; }
    std::size_t layer_inputs(std::size_t layer) const noexcept { return layer == 0 ? in_dim : width; }
    std::size_t layer_outputs(std::size_t layer) const noexcept {
        return layer == hidden_layers ? out_dim : width;
    }
    std::size_t layer_weight_count(std::size_t layer) const noexcept {
        return layer_inputs(layer) * layer_outputs(layer);
    }
    double layer_omega(std::size_t layer) const noexcept { return layer == 0 ? omega0 : 1.0; }

    std::size_t weight_count() const noexcept {
        std::size_t n = 0;
        for (std::size_t i = 0; i < layer_count(); ++i) n += layer_weight_count(i);
        return n;
    }
    std::size_t bias_count() const noexcept { return hidden_layers * width + out_dim; }

    std::string to_string() const {
        std::string s = std::to_string(in_dim);
        for (std::size_t i = 0; i < hidden_layers; ++i) s += "-" + std::to_string(width);
        return s + "-" + std::to_string(out_dim);
    }
};

/// One binary matrix per weight matrix; 1 marks a position.
struct WeightMask {
    std::vector<MaskLayer> layers;

    static WeightMask zeros(const ArchSpec& arch) {
        WeightMask m;
        for (std::size_t i = 0; i < arch.layer_count(); ++i)
            m.layers.push_back(MaskLayer::Zero(static_cast<Eigen::Index>(arch.layer_outputs(i)),
                                               static_cast<Eigen::Index>(arch.layer_inputs(i))));
        return m;
    }

    std::size_t count() const {
        std::size_t n = 0;
        for (const auto& l : layers)
            for (Eigen::Index k = 0; k < l.size(); ++k) n += l.data()[k] != 0;
        return n;
    }

    bool operator==(const WeightMask& other) const {
        if (layers.size() != other.layers.size()) return false;
        for (std::size_t i = 0; i < layers.size(); ++i) {
            if (layers[i].rows() != other.layers[i].rows() || layers[i].cols() != other.layers[i].cols())
                return false;
            if (layers[i] != other.layers[i]) return false;
        }
        return true;
    }
};

struct NetworkParams {
    ArchSpec arch;
    std::vector<Matrix> weights;
    std::vector<Vector> biases;

    static NetworkParams zeros(const ArchSpec& arch) {
        arch.validate();
        NetworkParams p;
        p.arch = arch;
        for (std::size_t i = 0; i < arch.layer_count(); ++i) {
            const auto rows = static_cast<Eigen::Index>(arch.layer_outputs(i));
            const auto cols = static_cast<Eigen::Index>(arch.layer_inputs(i));
            p.weights.push_back(Matrix::Zero(rows, cols));
            p.biases.push_back(Vector::Zero(rows));
        }
        return p;
    }

    /// Throws ContractError if shapes do not chain according to `arch` or any entry is non-finite.
    void validate() const {
        arch.validate();
        if (weights.size() != arch.layer_count() || biases.size() != arch.layer_count())
            throw ContractError("NetworkParams: layer count does not match architecture");
        for (std::size_t i = 0; i < arch.layer_count(); ++i) {
            const auto rows = static_cast<Eigen::Index>(arch.layer_outputs(i));
            const auto cols = static_cast<Eigen::Index>(arch.layer_inputs(i));
            if (weights[i].rows() != rows || weights[i].cols() != cols || biases[i].size() != rows)
                throw ContractError("NetworkParams: layer " + std::to_string(i) + " has wrong shape");
            if (!weights[i].allFinite() || !biases[i].allFinite())
                throw ContractError("NetworkParams: layer " + std::to_string(i) + " has non-finite entries");
        }
    }

    bool operator==(const NetworkParams& other) const {
        if (!(arch == other.arch) || weights.size() != other.weights.size() ||
            biases.size() != other.biases.size())
            return false;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i].rows() != other.weights[i].rows() || weights[i].cols() != other.weights[i].cols() ||
                weights[i] != other.weights[i])
                return false;
            if (biases[i].size() != other.biases[i].size() || biases[i] != other.biases[i]) return false;
        }
        return true;
    }
};

/// Gradient tensors, one per parameter tensor of the matching NetworkParams.
struct GradientSet {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;

    static GradientSet zeros_like(const NetworkParams& p) {
        GradientSet g;
        for (const auto& w : p.weights) g.weights.push_back(Matrix::Zero(w.rows(), w.cols()));
        for (const auto& b : p.biases) g.biases.push_back(Vector::Zero(b.size()));
        return g;
    }

    void set_zero() {
        for (auto& w : weights) w.setZero();
        for (auto& b : biases) b.setZero();
    }

    /// this += scale * other
    void add_scaled(const GradientSet& other, double scale) {
        for (std::size_t i = 0; i < weights.size(); ++i) {
            weights[i] += scale * other.weights[i];
            biases[i] += scale * other.biases[i];
        }
    }

    bool all_finite() const {
        for (std::size_t i = 0; i < weights.size(); ++i)
            if (!weights[i].allFinite() || !biases[i].allFinite()) return false;
        return true;
    }
};

/// Rounds every parameter to the nearest 32-bit float (the storage precision).
inline void quantize_to_float(NetworkParams& p) {
    auto q = [](double v) { return static_cast<double>(static_cast<float>(v)); };
    for (auto& w : p.weights) w = w.unaryExpr(q);
    for (auto& b : p.biases) b = b.unaryExpr(q);
}

inline NetworkParams quantized(NetworkParams p) {
    quantize_to_float(p);
    return p;
}

/// Standard sine-network initialization. First layer U(-1/in_dim, 1/in_dim),
/// later layers U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero biases.
inline NetworkParams sine_init(const ArchSpec& arch, std::uint64_t seed) {
    NetworkParams p = NetworkParams::zeros(arch);
    RandomStream rng(mix_seed(seed, 0x5349524eULL));
    for (std::size_t i = 0; i < arch.layer_count(); ++i) {
        const double fan_in = static_cast<double>(arch.layer_inputs(i));
        const double bound = i == 0 ? 1.0 / fan_in : std::sqrt(6.0 / fan_in);
        auto& w = p.weights[i];
        for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = rng.uniform(-bound, bound);
    }
    return p;
}

namespace detail {

inline void check_coords(const ArchSpec& arch, const Batch& coords) {
    if (static_cast<std::size_t>(coords.rows()) != arch.in_dim)
        throw ContractError("coordinate dimension " + std::to_string(coords.rows()) +
                            " does not match in_dim " + std::to_string(arch.in_dim));
}

} // namespace detail

/// Evaluates the network on every column of `coords`; returns out_dim x batch.
inline Batch forward(const NetworkParams& params, const Batch& coords) {
    const ArchSpec& arch = params.arch;
    detail::check_coords(arch, coords);
    Batch h = coords;
    Batch z;
    for (std::size_t i = 0; i < arch.hidden_layers; ++i) {
        z.noalias() = params.weights[i] * h;
        z.colwise() += params.biases[i];
        detail::apply_sine(z.data(), z.data(), static_cast<std::size_t>(z.size()), arch.layer_omega(i));
        h.swap(z);
    }
    Batch y;
    y.noalias() = params.weights.back() * h;
    y.colwise() += params.biases.back();
    return y;
}

/// Reusable buffers for repeated gradient evaluation on same-size batches.
class Backprop {
public:
    /// Computes the mean squared error over all outputs and its exact
    /// gradient into `grads` (overwritten). Returns the loss.
    double run(const NetworkParams& params, const Batch& coords, const Batch& targets, GradientSet& grads) {
        const ArchSpec& arch = params.arch;
        detail::check_coords(arch, coords);
        if (targets.cols() != coords.cols() || static_cast<std::size_t>(targets.rows()) != arch.out_dim)
            throw ContractError("targets shape does not match coordinates/out_dim");
        if (grads.weights.size() != arch.layer_count()) grads = GradientSet::zeros_like(params);

        const std::size_t n_hidden = arch.hidden_layers;
        acts_.resize(n_hidden + 1);
        derivs_.resize(n_hidden);
        acts_[0] = coords;
        for (std::size_t i = 0; i < n_hidden; ++i) {
            Batch& z = acts_[i + 1];
            z.noalias() = params.weights[i] * acts_[i];
            z.colwise() += params.biases[i];
            derivs_[i].resize(z.rows(), z.cols());
            detail::apply_sine_with_derivative(z.data(), z.data(), derivs_[i].data(),
                                               static_cast<std::size_t>(z.size()), arch.layer_omega(i));
        }
        output_.noalias() = params.weights.back() * acts_[n_hidden];
        output_.colwise() += params.biases.back();

        const double count = static_cast<double>(targets.size());
        delta_ = output_ - targets;
        const double loss = delta_.squaredNorm() / count;
        if (!std::isfinite(loss)) {
            // sin() of a non-finite value is NaN, so the first bad layer is
            // the first one whose activations are non-finite.
            for (std::size_t i = 0; i < n_hidden; ++i)
                if (!acts_[i + 1].allFinite()) throw NumericError("non-finite activation", i);
            throw NumericError("non-finite output", n_hidden);
        }
        delta_ *= 2.0 / count;

        for (std::size_t layer = n_hidden + 1; layer-- > 0;) {
            grads.weights[layer].noalias() = delta_ * acts_[layer].transpose();
            grads.biases[layer] = delta_.rowwise().sum();
            if (layer == 0) break;
            back_.noalias() = params.weights[layer].transpose() * delta_;
            delta_ = back_.cwiseProduct(derivs_[layer - 1]);
        }
        return loss;
    }

    /// Network output of the last `run` (out_dim x batch).
    const Batch& output() const noexcept { return output_; }

private:
    std::vector<Batch> acts_;
    std::vector<Batch> derivs_;
    Batch output_;
    Batch delta_;
    Batch back_;
};

struct LossAndGrad {
    double loss = 0.0;
    GradientSet grads;
};

inline LossAndGrad backward(const NetworkParams& params, const Batch& coords, const Batch& targets) {
    Backprop bp;
    LossAndGrad out;
    out.loss = bp.run(params, coords, targets, out.grads);
    return out;
}

enum class OptimizerKind { sgd, adam };

inline std::string_view to_string(OptimizerKind k) { return k == OptimizerKind::sgd ? "sgd" : "adam"; }

inline OptimizerKind parse_optimizer(std::string_view s) {
    if (s == "sgd") return OptimizerKind::sgd;
    if (s == "adam") return OptimizerKind::adam;
    throw ContractError("unknown optimizer '" + std::string(s) + "'");
}

struct OptimizerState {
    OptimizerKind kind = OptimizerKind::adam;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t step_count = 0;
    GradientSet first_moment;
    GradientSet second_moment;

    OptimizerState() = default;
    OptimizerState(OptimizerKind k, double lr) : kind(k), learning_rate(lr) { validate(); }

    void validate() const {
        if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
            throw ContractError("learning rate must be > 0");
        if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
            throw ContractError("Adam betas must lie in (0, 1)");
    }
};

/// Applies one update in place. Weights where `frozen` is nonzero are left
/// bit-identical; biases are always updated.
inline void optimizer_step(OptimizerState& state, NetworkParams& params, const GradientSet& grads,
                           const WeightMask* frozen = nullptr) {
    const std::size_t layers = params.weights.size();
    if (grads.weights.size() != layers || grads.biases.size() != layers)
        throw ContractError("gradient set does not match parameters");
    if (frozen && frozen->layers.size() != layers) throw ContractError("mask does not match parameters");
    for (std::size_t i = 0; i < layers; ++i) {
        if (grads.weights[i].rows() != params.weights[i].rows() ||
            grads.weights[i].cols() != params.weights[i].cols() ||
            grads.biases[i].size() != params.biases[i].size())
            throw ContractError("gradient shape mismatch at layer " + std::to_string(i));
        if (frozen && (frozen->layers[i].rows() != params.weights[i].rows() ||
                       frozen->layers[i].cols() != params.weights[i].cols()))
            throw ContractError("mask shape mismatch at layer " + std::to_string(i));
    }

    const double lr = state.learning_rate;
    if (state.kind == OptimizerKind::sgd) {
        ++state.step_count;
        for (std::size_t i = 0; i < layers; ++i) {
            if (frozen) {
                const auto keep = frozen->layers[i].array() != 0;
                params.weights[i] = keep.select(params.weights[i], params.weights[i] - lr * grads.weights[i]);
            } else {
                params.weights[i] -= lr * grads.weights[i];
            }
            params.biases[i] -= lr * grads.biases[i];
        }
        return;
    }

    if (state.first_moment.weights.size() != layers) {
        state.first_moment = GradientSet::zeros_like(params);
        state.second_moment = GradientSet::zeros_like(params);
    }
    ++state.step_count;
    const double t = static_cast<double>(state.step_count);
    const double b1 = state.beta1, b2 = state.beta2, eps = state.epsilon;
    const double bc1 = 1.0 - std::pow(b1, t);
    const double bc2 = 1.0 - std::pow(b2, t);

    // Returns lr * mhat / (sqrt(vhat) + eps) after updating the moments.
    auto adam = [&](const auto& g, auto& m, auto& v) {
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
        return (lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps)).matrix().eval();
    };
    for (std::size_t i = 0; i < layers; ++i) {
        auto& m = state.first_moment.weights[i];
        auto& v = state.second_moment.weights[i];
        if (frozen) {
            const auto keep = frozen->layers[i].array() != 0;
            const Matrix g = keep.select(Matrix::Zero(m.rows(), m.cols()), grads.weights[i]);
            const Matrix step = adam(g, m, v);
            params.weights[i] = keep.select(params.weights[i], params.weights[i] - step);
        } else {
            params.weights[i] -= adam(grads.weights[i], m, v);
        }
        params.biases[i] -= adam(grads.biases[i], state.first_moment.biases[i], state.second_moment.biases[i]);
    }
}

} // namespace stegainr
