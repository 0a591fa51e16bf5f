#pragma once

// Attacks on a published stego network: weight pruning, random-key
// guessing, and per-layer parameter histograms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stegainr/codec.hpp"
#include "stegainr/errors.hpp"
#include "stegainr/image.hpp"
#include "stegainr/keying.hpp"
#include "stegainr/masking.hpp"
#include "stegainr/metrics.hpp"
#include "stegainr/nn.hpp"
#include "stegainr/random.hpp"
#include "stegainr/steg_train.hpp"

namespace stegainr {

enum class PruneMethod { l1_unstructured, structured };

inline std::string_view to_string(PruneMethod m) {
    return m == PruneMethod::l1_unstructured ? "l1_unstructured" : "structured";
}

inline PruneMethod parse_prune_method(std::string_view s) {
    if (s == "l1_unstructured" || s == "l1") return PruneMethod::l1_unstructured;
    if (s == "structured") return PruneMethod::structured;
    throw ContractError("unknown pruning method '" + std::string(s) + "'");
}

struct PruneSpec {
    PruneMethod method = PruneMethod::l1_unstructured;
    double rate = 0.0;
};

/// l1_unstructured: zero the floor(rate * N) smallest-magnitude weights over
/// all layers (ties to the earlier position); biases untouched.
///
/// structured: in every hidden layer, remove the floor(rate * width) neurons
/// whose incoming weight rows have the smallest L2 norm (measured on the
/// unpruned network). Removing a neuron zeroes its row, its bias and its
/// column in the next layer.
inline NetworkParams prune(const NetworkParams& params, const PruneSpec& spec) {
    if (!(spec.rate >= 0.0 && spec.rate < 1.0)) throw ContractError("prune rate must lie in [0, 1)");
    params.validate();
    NetworkParams out = params;
    if (spec.method == PruneMethod::l1_unstructured) {
        auto refs = detail::weight_refs(params);
        const std::size_t k = selection_count(spec.rate, refs.size());
        auto smaller = [](const detail::WeightRef& a, const detail::WeightRef& b) {
            if (a.magnitude != b.magnitude) return a.magnitude < b.magnitude;
            return detail::position_less(a, b);
        };
        std::partial_sort(refs.begin(), refs.begin() + static_cast<std::ptrdiff_t>(k), refs.end(), smaller);
        for (std::size_t i = 0; i < k; ++i) out.weights[refs[i].layer].data()[refs[i].index] = 0.0;
        return out;
    }

    const std::size_t width = params.arch.width;
    const std::size_t k = selection_count(spec.rate, width);
    for (std::size_t layer = 0; layer < params.arch.hidden_layers; ++layer) {
        const Vector norms = params.weights[layer].rowwise().norm();
        std::vector<std::size_t> order(width);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return norms[static_cast<Eigen::Index>(a)] < norms[static_cast<Eigen::Index>(b)];
        });
        for (std::size_t i = 0; i < k; ++i) {
            const auto n = static_cast<Eigen::Index>(order[i]);
            out.weights[layer].row(n).setZero();
            out.biases[layer][n] = 0.0;
            out.weights[layer + 1].col(n).setZero();
        }
    }
    return out;
}

struct AttackTrial {
    std::uint64_t seed = 0;
    bool injected = false;
    std::vector<double> psnr; // against each true secret
};

struct AttackReport {
    std::vector<AttackTrial> trials;
    double max_psnr = 0.0;        // over all trials and secrets
    double max_random_psnr = 0.0; // excluding injected seeds
};

/// Seed guessed by trial `index` of an attack started from `attack_seed`.
inline std::uint64_t attack_trial_seed(std::uint64_t attack_seed, std::size_t index) {
    return mix_seed(attack_seed, 0x41545441434bULL + index);
}

/// Adversary who knows the mask but not the seed: recovers with `trials`
/// guessed seeds and scores each sample against every true secret.
/// `injected_seeds` are appended as extra, flagged trials.
inline AttackReport random_key_attack(const NetworkParams& stego, const SparseMask& mask,
                                      const std::vector<ImageBuffer>& true_secrets, std::size_t trials,
                                      std::uint64_t attack_seed,
                                      std::span<const std::uint64_t> injected_seeds = {}) {
    if (trials < 1) throw ContractError("attack needs at least one trial");
    if (true_secrets.empty()) throw ContractError("attack needs at least one reference secret");
    const WeightMask dense = from_sparse(mask, stego.arch);

    AttackReport report;
    report.max_psnr = -std::numeric_limits<double>::infinity();
    report.max_random_psnr = -std::numeric_limits<double>::infinity();
    auto run_trial = [&](std::uint64_t seed, bool injected) {
        const NetworkParams guess = substitute(stego, dense, generate_secret_weights(seed, stego.arch));
        AttackTrial t{seed, injected, {}};
        for (const auto& secret : true_secrets) {
            const double p = psnr(sample(guess, secret.height, secret.width), secret);
            t.psnr.push_back(p);
            report.max_psnr = std::max(report.max_psnr, p);
            if (!injected) report.max_random_psnr = std::max(report.max_random_psnr, p);
        }
        report.trials.push_back(std::move(t));
    };
    for (std::size_t i = 0; i < trials; ++i) run_trial(attack_trial_seed(attack_seed, i), false);
    for (std::uint64_t s : injected_seeds) run_trial(s, true);
    return report;
}

struct Histogram {
    std::string layer; // layer index, or "all"
    double low = 0.0;
    double high = 0.0;
    std::vector<std::size_t> counts;

    double bin_low(std::size_t b) const { return low + (high - low) * static_cast<double>(b) / counts.size(); }
    double bin_high(std::size_t b) const { return low + (high - low) * static_cast<double>(b + 1) / counts.size(); }
    std::size_t total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }
};

namespace detail {

inline Histogram histogram_of(const std::vector<double>& values, std::size_t bins, std::string label) {
    Histogram h;
    h.layer = std::move(label);
    h.counts.assign(bins, 0);
    if (values.empty()) return h;
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    h.low = *mn;
    h.high = *mx;
    const double span = h.high - h.low;
    for (double v : values) {
        std::size_t b = 0;
        if (span > 0.0) {
            b = static_cast<std::size_t>((v - h.low) / span * static_cast<double>(bins));
            b = std::min(b, bins - 1);
        }
        ++h.counts[b];
    }
    return h;
}

} // namespace detail

/// Equal-width histograms of every layer's weights and biases, followed by
/// one over all parameters (label "all").
inline std::vector<Histogram> weight_histogram(const NetworkParams& params, std::size_t bins) {
    if (bins < 1) throw ContractError("histogram needs at least one bin");
    std::vector<Histogram> out;
    std::vector<double> all;
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        std::vector<double> vals(params.weights[l].data(), params.weights[l].data() + params.weights[l].size());
        vals.insert(vals.end(), params.biases[l].data(), params.biases[l].data() + params.biases[l].size());
        all.insert(all.end(), vals.begin(), vals.end());
        out.push_back(detail::histogram_of(vals, bins, std::to_string(l)));
    }
    out.push_back(detail::histogram_of(all, bins, "all"));
    return out;
}

} // namespace stegainr
