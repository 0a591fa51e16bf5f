#pragma once

// Image quality metrics on the 8-bit domain: every channel value is
// quantized with round(v * 255) before comparison.
//
// SSIM uses whole-image statistics per channel (population mean, variance
// and covariance) and averages the three channels.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "stegainr/errors.hpp"
#include "stegainr/image.hpp"

namespace stegainr {

inline constexpr double kPsnrCap = 99.0;

struct MetricReport {
    double psnr = 0.0;
    double ssim = 0.0;
    double rmse = 0.0;
    double mae = 0.0;
};

namespace detail {

inline void check_pair(const ImageBuffer& x, const ImageBuffer& y) {
    if (!x.same_shape(y) || x.pixels.size() != y.pixels.size())
        throw ContractError("images differ in size: " + std::to_string(x.height) + "x" + std::to_string(x.width) +
                            " vs " + std::to_string(y.height) + "x" + std::to_string(y.width));
    if (x.pixels.empty()) throw ContractError("empty image");
}

inline std::vector<int> bytes_of(const ImageBuffer& img) {
    std::vector<int> out(img.pixels.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = to_byte(img.pixels[i]);
    return out;
}

} // namespace detail

inline double mse(const ImageBuffer& x, const ImageBuffer& y) {
    detail::check_pair(x, y);
    double sum = 0.0;
    for (std::size_t i = 0; i < x.pixels.size(); ++i) {
        const double d = to_byte(x.pixels[i]) - to_byte(y.pixels[i]);
        sum += d * d;
    }
    return sum / static_cast<double>(x.pixels.size());
}

/// Peak signal-to-noise ratio in dB with MAX = 255; kPsnrCap when identical.
inline double psnr(const ImageBuffer& x, const ImageBuffer& y) {
    const double m = mse(x, y);
    if (m == 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / m));
}

inline double rmse(const ImageBuffer& x, const ImageBuffer& y) { return std::sqrt(mse(x, y)); }

inline double mae(const ImageBuffer& x, const ImageBuffer& y) {
    detail::check_pair(x, y);
    double sum = 0.0;
    for (std::size_t i = 0; i < x.pixels.size(); ++i)
        sum += std::abs(to_byte(x.pixels[i]) - to_byte(y.pixels[i]));
    return sum / static_cast<double>(x.pixels.size());
}

inline double ssim(const ImageBuffer& x, const ImageBuffer& y) {
    detail::check_pair(x, y);
    constexpr double c1 = (0.01 * 255.0) * (0.01 * 255.0);
    constexpr double c2 = (0.03 * 255.0) * (0.03 * 255.0);
    constexpr double c3 = c2 / 2.0;

    const auto xb = detail::bytes_of(x);
    const auto yb = detail::bytes_of(y);
    const std::size_t n = x.pixel_count();
    double total = 0.0;
    for (std::size_t ch = 0; ch < 3; ++ch) {
        double sx = 0.0, sy = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            sx += xb[p * 3 + ch];
            sy += yb[p * 3 + ch];
        }
        const double mx = sx / static_cast<double>(n);
        const double my = sy / static_cast<double>(n);
        double vx = 0.0, vy = 0.0, cov = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            const double dx = xb[p * 3 + ch] - mx;
            const double dy = yb[p * 3 + ch] - my;
            vx += dx * dx;
            vy += dy * dy;
            cov += dx * dy;
        }
        vx /= static_cast<double>(n);
        vy /= static_cast<double>(n);
        cov /= static_cast<double>(n);
        // sqrt(v * v) == v exactly in IEEE arithmetic, so ssim(x, x) == 1.
        const double sxy = std::sqrt(vx * vy);
        const double l = (2.0 * mx * my + c1) / (mx * mx + my * my + c1);
        const double c = (2.0 * sxy + c2) / (vx + vy + c2);
        const double s = (cov + c3) / (sxy + c3);
        total += l * c * s;
    }
    return total / 3.0;
}

inline MetricReport evaluate(const ImageBuffer& x, const ImageBuffer& y) {
    return {psnr(x, y), ssim(x, y), rmse(x, y), mae(x, y)};
}

} // namespace stegainr
