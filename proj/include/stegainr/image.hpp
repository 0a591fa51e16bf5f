#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "stegainr/errors.hpp"

namespace stegainr {

/// H x W x 3 image with channel values in [0, 1], stored row-major with
/// interleaved RGB.
struct ImageBuffer {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> pixels;

    ImageBuffer() = default;
    ImageBuffer(std::size_t h, std::size_t w, double fill = 0.0) : height(h), width(w), pixels(h * w * 3, fill) {}

    static constexpr std::size_t channels = 3;

    std::size_t pixel_count() const noexcept { return height * width; }
    std::size_t size() const noexcept { return pixels.size(); }

    double& at(std::size_t row, std::size_t col, std::size_t ch) { return pixels[(row * width + col) * 3 + ch]; }
    double at(std::size_t row, std::size_t col, std::size_t ch) const {
        return pixels[(row * width + col) * 3 + ch];
    }

    void validate() const {
        if (height < 1 || width < 1) throw ContractError("image dimensions must be >= 1");
        if (pixels.size() != height * width * 3) throw ContractError("image payload size mismatch");
        for (double v : pixels)
            if (!(v >= 0.0 && v <= 1.0)) throw ContractError("image values must lie in [0, 1]");
    }

    bool same_shape(const ImageBuffer& other) const noexcept {
        return height == other.height && width == other.width;
    }

    bool operator==(const ImageBuffer&) const = default;
};

/// 8-bit quantization used for files and metrics.
inline int to_byte(double v) {
    const double c = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    return static_cast<int>(std::lround(c * 255.0));
}

inline ImageBuffer quantized_8bit(const ImageBuffer& img) {
    ImageBuffer out = img;
    for (double& v : out.pixels) v = to_byte(v) / 255.0;
    return out;
}

} // namespace stegainr
