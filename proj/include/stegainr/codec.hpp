#pragma once

// Conversion between explicit images and coordinate networks: sampling
// grids, fitting a network to a cover image, and resampling at any size.
//
// Coordinates are the inclusive linspace of [-1, 1] per axis (row index ->
// first component). RGB values are trained in [-1, 1] via 2v - 1.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <utility>

#include "stegainr/config.hpp"
#include "stegainr/errors.hpp"
#include "stegainr/image.hpp"
#include "stegainr/metrics.hpp"
#include "stegainr/nn.hpp"

namespace stegainr {

struct CoordGrid {
    std::size_t height = 0;
    std::size_t width = 0;
    Batch coords; // 2 x (height * width), row-major pixel order
};

inline double linspace_at(std::size_t i, std::size_t n) {
    if (n == 1) return 0.0;
    return -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
}

inline CoordGrid make_grid(std::size_t height, std::size_t width) {
    if (height < 1 || width < 1) throw ContractError("grid dimensions must be >= 1");
    CoordGrid g{height, width, Batch(2, static_cast<Eigen::Index>(height * width))};
    for (std::size_t r = 0; r < height; ++r) {
        const double y = linspace_at(r, height);
        for (std::size_t c = 0; c < width; ++c) {
            const auto k = static_cast<Eigen::Index>(r * width + c);
            g.coords(0, k) = y;
            g.coords(1, k) = linspace_at(c, width);
        }
    }
    return g;
}

inline double to_signed_range(double v) { return 2.0 * v - 1.0; }
inline double to_unit_range(double v) { return (v + 1.0) / 2.0; }

/// 3 x (H*W) training targets in [-1, 1].
inline Batch image_targets(const ImageBuffer& img) {
    Batch t(3, static_cast<Eigen::Index>(img.pixel_count()));
    for (std::size_t p = 0; p < img.pixel_count(); ++p)
        for (std::size_t ch = 0; ch < 3; ++ch)
            t(static_cast<Eigen::Index>(ch), static_cast<Eigen::Index>(p)) = to_signed_range(img.pixels[p * 3 + ch]);
    return t;
}

/// Maps network outputs (3 x H*W) back to a clamped image.
inline ImageBuffer outputs_to_image(const Batch& out, std::size_t height, std::size_t width) {
    if (out.rows() != 3 || static_cast<std::size_t>(out.cols()) != height * width)
        throw ContractError("network output does not match the requested image size (out_dim must be 3)");
    ImageBuffer img(height, width);
    for (std::size_t p = 0; p < height * width; ++p)
        for (std::size_t ch = 0; ch < 3; ++ch) {
            const double v = to_unit_range(out(static_cast<Eigen::Index>(ch), static_cast<Eigen::Index>(p)));
            img.pixels[p * 3 + ch] = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        }
    return img;
}

inline ImageBuffer sample(const NetworkParams& params, std::size_t height, std::size_t width) {
    const CoordGrid grid = make_grid(height, width);
    return outputs_to_image(forward(params, grid.coords), height, width);
}

struct FitReport {
    std::size_t epochs_run = 0;
    std::size_t best_epoch = 0; // index of the parameter snapshot: 0 = initialization
    double best_loss = 0.0;
    double final_psnr = 0.0;    // PSNR of the returned network against the image
};

/// Fits a fresh sine network to `image` with Adam at config.cover_lr for
/// config.cover_epochs full-batch epochs. Returns the lowest-loss snapshot
/// rounded to 32-bit storage precision.
inline std::pair<NetworkParams, FitReport> fit_cover(const ImageBuffer& image, const ArchSpec& arch,
                                                     const TrainingConfig& config, std::uint64_t rng_seed) {
    image.validate();
    arch.validate();
    if (arch.in_dim != 2 || arch.out_dim != 3)
        throw ContractError("image networks need in_dim = 2 and out_dim = 3");
    if (!(config.cover_lr > 0.0)) throw ContractError("cover learning rate must be > 0");

    const CoordGrid grid = make_grid(image.height, image.width);
    const Batch targets = image_targets(image);

    NetworkParams params = sine_init(arch, rng_seed);
    OptimizerState opt(OptimizerKind::adam, config.cover_lr);
    Backprop bp;
    GradientSet grads;

    FitReport report;
    report.best_loss = std::numeric_limits<double>::infinity();
    NetworkParams best = params;

    // Epoch e evaluates the snapshot produced by e updates; the loop runs one
    // extra evaluation so the final snapshot is a candidate too.
    for (std::size_t epoch = 0; epoch <= config.cover_epochs; ++epoch) {
        double loss = 0.0;
        try {
            loss = bp.run(params, grid.coords, targets, grads);
        } catch (const NumericError& e) {
            throw TrainingError(std::string("cover fitting diverged: ") + e.what(), epoch);
        }
        if (loss < report.best_loss) {
            report.best_loss = loss;
            report.best_epoch = epoch;
            best = params;
        }
        if (epoch == config.cover_epochs) break;
        optimizer_step(opt, params, grads);
    }
    report.epochs_run = config.cover_epochs;
    quantize_to_float(best);
    report.final_psnr = psnr(sample(best, image.height, image.width), image);
    return {std::move(best), report};
}

} // namespace stegainr
