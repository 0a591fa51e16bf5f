#pragma once

// Hiding N secret images in one network.
//
// The mask M marks the frozen weights of the cover network. The published
// stego network keeps those weights; secret view i replaces them with the
// seeded weights of key i:
//
//   stego view   : W_cover * M + W_shared * (1 - M)
//   secret view i: W_seed_i * M + W_shared * (1 - M)
//
// Joint training updates only W_shared (mask = 0) and the biases, using the
// combined gradient lambda_st * dL_stego + lambda_se * sum_i dL_i computed
// from one parameter snapshot per epoch.

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "stegainr/codec.hpp"
#include "stegainr/config.hpp"
#include "stegainr/errors.hpp"
#include "stegainr/image.hpp"
#include "stegainr/keying.hpp"
#include "stegainr/masking.hpp"
#include "stegainr/metrics.hpp"
#include "stegainr/nn.hpp"

namespace stegainr {

/// Default loss weights: 1 / (N + 1) for both terms.
inline std::pair<double, double> lambda_defaults(std::size_t n_secrets) {
    if (n_secrets < 1) throw ContractError("at least one secret image is required");
    const double l = 1.0 / static_cast<double>(n_secrets + 1);
    return {l, l};
}

/// Replaces the masked weights of `cover` with `secret_weights`; biases are kept.
inline NetworkParams substitute(const NetworkParams& cover, const WeightMask& mask, const SecretWeights& secret_weights) {
    check_mask_shape(mask, cover.arch);
    NetworkParams out = cover;
    out.weights = complement_apply(secret_weights, cover.weights, mask);
    return out;
}

struct QualityRow {
    std::size_t epoch = 0;
    std::string view; // "stego", "secret1", ...
    double psnr = 0.0;
    double loss = 0.0;
};

struct StegoBundle {
    NetworkParams stego_params;   // published, 32-bit representable
    WeightMask mask;
    std::vector<std::uint64_t> seeds;
    std::vector<NetworkParams> secret_views; // secret networks of the final epoch
    ImageBuffer stego_sample;                // final-epoch samples at training resolution
    std::vector<ImageBuffer> secret_samples;
};

struct JointResult {
    StegoBundle bundle;
    std::vector<QualityRow> log;
};

/// Network and mask that enter joint training for each init mode.
struct EmbeddingStart {
    NetworkParams network;
    WeightMask mask;
};

/// `cover` is the fitted cover network for InitMode::pretrained; for the
/// other modes only its architecture is used and `init_seed` drives the
/// fresh initialization.
inline EmbeddingStart prepare_start(InitMode mode, const NetworkParams& cover, double ratio, std::uint64_t init_seed) {
    switch (mode) {
    case InitMode::pretrained: {
        NetworkParams net = quantized(cover);
        WeightMask mask = select_mask(net, ratio);
        return {std::move(net), std::move(mask)};
    }
    case InitMode::xavier_scratch: {
        NetworkParams net = xavier_init(cover.arch, init_seed);
        WeightMask mask = select_mask(net, ratio);
        return {std::move(net), std::move(mask)};
    }
    case InitMode::random_positions: {
        NetworkParams net = quantized(sine_init(cover.arch, init_seed));
        WeightMask mask = random_mask(cover.arch, ratio, init_seed);
        return {std::move(net), std::move(mask)};
    }
    }
    throw ContractError("unknown init mode");
}

inline std::string view_name(std::size_t view) {
    return view == 0 ? std::string("stego") : "secret" + std::to_string(view);
}

/// Jointly trains the stego view and one secret view per seed. `cover` is
/// rounded to 32-bit precision first; weights where `mask` is 1 keep those
/// values bit-exactly for the whole run. `on_row` sees every log row as it
/// is produced.
inline JointResult joint_train(const NetworkParams& cover, const WeightMask& mask, const ImageBuffer& stego_target,
                               const std::vector<ImageBuffer>& secrets, const std::vector<std::uint64_t>& seeds,
                               const TrainingConfig& config,
                               const std::function<void(const QualityRow&)>& on_row = {}) {
    config.validate();
    cover.validate();
    check_mask_shape(mask, cover.arch);
    if (secrets.empty()) throw ContractError("at least one secret image is required");
    if (secrets.size() != seeds.size())
        throw ContractError("got " + std::to_string(secrets.size()) + " secrets but " + std::to_string(seeds.size()) +
                            " seeds");
    if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
        throw ContractError("secret seeds must be pairwise distinct");
    stego_target.validate();
    for (const auto& s : secrets) s.validate();
    if (cover.arch.in_dim != 2 || cover.arch.out_dim != 3)
        throw ContractError("image networks need in_dim = 2 and out_dim = 3");

    const std::size_t n_views = secrets.size() + 1;
    std::vector<const ImageBuffer*> images{&stego_target};
    for (const auto& s : secrets) images.push_back(&s);
    std::vector<CoordGrid> grids;
    std::vector<Batch> targets;
    for (const ImageBuffer* img : images) {
        grids.push_back(make_grid(img->height, img->width));
        targets.push_back(image_targets(*img));
    }

    std::vector<SecretWeights> secret_weights;
    for (std::uint64_t seed : seeds) secret_weights.push_back(generate_secret_weights(seed, cover.arch));

    NetworkParams shared = quantized(cover);
    std::vector<NetworkParams> secret_views(secrets.size(), shared);
    auto compose_views = [&](const NetworkParams& base) {
        for (std::size_t i = 0; i < secrets.size(); ++i) {
            for (std::size_t l = 0; l < base.weights.size(); ++l)
                secret_views[i].weights[l] = (mask.layers[l].array() != 0).select(secret_weights[i][l], base.weights[l]);
            secret_views[i].biases = base.biases;
        }
    };
    auto view_params = [&](std::size_t v, const NetworkParams& base) -> const NetworkParams& {
        return v == 0 ? base : secret_views[v - 1];
    };

    JointResult result;
    auto emit = [&](QualityRow row) {
        if (on_row) on_row(row);
        result.log.push_back(std::move(row));
    };

    OptimizerState opt(config.optimizer, config.lr);
    Backprop bp;
    GradientSet view_grads;
    GradientSet combined = GradientSet::zeros_like(shared);

    for (std::size_t epoch = 0; epoch < config.joint_epochs; ++epoch) {
        compose_views(shared);
        combined.set_zero();
        const bool log_now = config.log_every > 0 && epoch % config.log_every == 0;
        for (std::size_t v = 0; v < n_views; ++v) {
            double loss = 0.0;
            try {
                loss = bp.run(view_params(v, shared), grids[v].coords, targets[v], view_grads);
            } catch (const NumericError& e) {
                throw TrainingError(std::string("joint training diverged in view ") + view_name(v) + ": " + e.what(),
                                    epoch);
            }
            combined.add_scaled(view_grads, v == 0 ? config.lambda_st : config.lambda_se);
            if (log_now) {
                const ImageBuffer img = outputs_to_image(bp.output(), images[v]->height, images[v]->width);
                emit({epoch, view_name(v), psnr(img, *images[v]), loss});
            }
        }
        if (!combined.all_finite()) throw TrainingError("non-finite gradient", epoch);
        optimizer_step(opt, shared, combined, &mask);
    }

    StegoBundle& bundle = result.bundle;
    bundle.stego_params = quantized(shared);
    bundle.mask = mask;
    bundle.seeds = seeds;
    compose_views(bundle.stego_params);
    bundle.secret_views = secret_views;
    for (std::size_t v = 0; v < n_views; ++v) {
        const NetworkParams& p = view_params(v, bundle.stego_params);
        const Batch out = forward(p, grids[v].coords);
        const double loss = (out - targets[v]).squaredNorm() / static_cast<double>(targets[v].size());
        ImageBuffer img = outputs_to_image(out, images[v]->height, images[v]->width);
        emit({config.joint_epochs, view_name(v), psnr(img, *images[v]), loss});
        if (v == 0)
            bundle.stego_sample = std::move(img);
        else
            bundle.secret_samples.push_back(std::move(img));
    }
    return result;
}

/// Convenience overload: magnitude mask of `cover` at config.ratio.
inline JointResult joint_train(const NetworkParams& cover, const ImageBuffer& stego_target,
                               const std::vector<ImageBuffer>& secrets, const std::vector<std::uint64_t>& seeds,
                               const TrainingConfig& config,
                               const std::function<void(const QualityRow&)>& on_row = {}) {
    const NetworkParams q = quantized(cover);
    return joint_train(q, select_mask(q, config.ratio), stego_target, secrets, seeds, config, on_row);
}

/// Rebuilds the secret network for `key` from the published stego network.
inline NetworkParams recover(const NetworkParams& stego, const StegoKey& key) {
    if (!(key.arch == stego.arch))
        throw KeyError("key architecture " + key.arch.to_string() + " does not match model " + stego.arch.to_string());
    if (key.sparse_mask.fingerprint != arch_fingerprint(stego.arch))
        throw KeyError("key fingerprint does not match the model architecture");
    if (key.prng_id != kPrngId) throw KeyError("unsupported secret-weight generator '" + key.prng_id + "'");
    const WeightMask mask = from_sparse(key.sparse_mask, stego.arch);
    return substitute(stego, mask, generate_secret_weights(key.seed, stego.arch));
}

inline void write_quality_csv_header(std::ostream& os) { os << "epoch,view,psnr,loss\n"; }

inline void write_quality_csv_row(std::ostream& os, const QualityRow& row) {
    os << row.epoch << ',' << row.view << ',' << row.psnr << ',' << row.loss << '\n';
}

} // namespace stegainr
