#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "stegainr/metrics.hpp"
#include "test_support.hpp"

namespace stegainr {
namespace {

ImageBuffer from_bytes(std::size_t h, std::size_t w, const std::vector<int>& bytes) {
    ImageBuffer img(h, w);
    for (std::size_t i = 0; i < bytes.size(); ++i) img.pixels[i] = bytes[i] / 255.0;
    return img;
}

ImageBuffer gray(std::size_t h, std::size_t w, const std::vector<int>& levels) {
    std::vector<int> bytes;
    for (int v : levels) bytes.insert(bytes.end(), {v, v, v});
    return from_bytes(h, w, bytes);
}

using test::oracle_mae;
using test::oracle_mse;
using test::oracle_ssim;

TEST(Psnr, IdenticalImagesHitCap) {
    const ImageBuffer x = test::random_image(8, 8, 1);
    EXPECT_EQ(psnr(x, x), 99.0);
}

TEST(Psnr, BlackVersusWhiteIsZero) {
    ImageBuffer black(4, 4), white(4, 4);
    std::fill(white.pixels.begin(), white.pixels.end(), 1.0);
    EXPECT_EQ(mse(black, white), 255.0 * 255.0);
    EXPECT_EQ(psnr(black, white), 0.0);
}

TEST(Psnr, TwoPixelGrayExample) {
    const ImageBuffer x = gray(2, 1, {128, 128});
    const ImageBuffer y = gray(2, 1, {129, 128});
    EXPECT_EQ(mse(x, y), oracle_mse(x, y));
    EXPECT_EQ(mse(x, y), 0.5);
    EXPECT_NEAR(psnr(x, y), 10.0 * std::log10(255.0 * 255.0 / 0.5), 1e-12);
}

TEST(Psnr, QuantizesBeforeComparing) {
    ImageBuffer x(1, 1), y(1, 1);
    std::fill(x.pixels.begin(), x.pixels.end(), 0.5);
    std::fill(y.pixels.begin(), y.pixels.end(), 0.5 + 1e-4); // same 8-bit value
    EXPECT_EQ(psnr(x, y), 99.0);
}

TEST(Ssim, IdentityIsExactlyOne) {
    for (std::uint32_t s = 0; s < 40; ++s) {
        const ImageBuffer x = test::random_image(1 + s % 9, 1 + s % 7, s);
        EXPECT_EQ(ssim(x, x), 1.0);
    }
    ImageBuffer flat(3, 3);
    EXPECT_EQ(ssim(flat, flat), 1.0);
}

TEST(Ssim, ConstantShiftMatchesLuminanceClosedForm) {
    for (auto [u, d] : {std::pair<int, int>{100, 20}, {0, 255}, {37, 1}}) {
        const ImageBuffer x = gray(3, 4, std::vector<int>(12, u));
        const ImageBuffer y = gray(3, 4, std::vector<int>(12, u + d));
        const double c1 = (0.01 * 255) * (0.01 * 255);
        const double lum = (2.0 * u * (u + d) + c1) / (double(u) * u + double(u + d) * (u + d) + c1);
        EXPECT_NEAR(ssim(x, y), lum, 1e-15);
        EXPECT_LT(ssim(x, y), 1.0);
    }
}

TEST(RmseMae, IdentityAndExtremes) {
    const ImageBuffer x = test::random_image(5, 5, 4);
    EXPECT_EQ(rmse(x, x), 0.0);
    EXPECT_EQ(mae(x, x), 0.0);
    ImageBuffer black(2, 3), white(2, 3);
    std::fill(white.pixels.begin(), white.pixels.end(), 1.0);
    EXPECT_EQ(rmse(black, white), 255.0);
    EXPECT_EQ(mae(black, white), 255.0);
}

TEST(RmseMae, HandBuiltTwoByTwo) {
    // Differences per channel value: 0,1,2,...,11 (12 values).
    std::vector<int> a(12), b(12);
    for (int i = 0; i < 12; ++i) {
        a[i] = 100;
        b[i] = 100 + (i % 2 ? i : -i);
    }
    const ImageBuffer x = from_bytes(2, 2, a), y = from_bytes(2, 2, b);
    EXPECT_DOUBLE_EQ(mae(x, y), 66.0 / 12.0);
    EXPECT_DOUBLE_EQ(rmse(x, y), std::sqrt(506.0 / 12.0));
    EXPECT_DOUBLE_EQ(mae(x, y), oracle_mae(x, y));
}

TEST(Metrics, MatchScalarOraclesOnRandomPairs) {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t h = 1 + rng() % 24, w = 1 + rng() % 24;
        const ImageBuffer x = test::random_image(h, w, rng());
        ImageBuffer y = test::random_image(h, w, rng());
        if (trial % 3 == 0) // correlated pair
            for (std::size_t i = 0; i < y.pixels.size(); ++i)
                y.pixels[i] = std::clamp(x.pixels[i] + 0.1 * (y.pixels[i] - 0.5), 0.0, 1.0);
        const double m = oracle_mse(x, y);
        EXPECT_NEAR(psnr(x, y), m == 0 ? 99.0 : 10 * std::log10(65025.0 / m), 1e-9);
        EXPECT_NEAR(rmse(x, y), std::sqrt(m), 1e-9);
        EXPECT_NEAR(mae(x, y), oracle_mae(x, y), 1e-9);
        EXPECT_NEAR(ssim(x, y), oracle_ssim(x, y), 1e-9);
    }
}

TEST(Metrics, Properties) {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const ImageBuffer x = test::random_image(6, 6, rng());
        const ImageBuffer y = test::random_image(6, 6, rng());
        const MetricReport xy = evaluate(x, y), yx = evaluate(y, x);
        EXPECT_EQ(xy.psnr, yx.psnr);
        EXPECT_EQ(xy.rmse, yx.rmse);
        EXPECT_EQ(xy.mae, yx.mae);
        EXPECT_NEAR(xy.ssim, yx.ssim, 1e-15);
        EXPECT_LE(xy.mae, xy.rmse);
        EXPECT_LE(xy.ssim, 1.0);
        EXPECT_NEAR(xy.psnr, 20 * std::log10(255.0) - 20 * std::log10(xy.rmse), 1e-9);
    }
}

TEST(Metrics, RejectDimensionMismatch) {
    const ImageBuffer a(2, 3), b(3, 2);
    EXPECT_THROW(psnr(a, b), ContractError);
    EXPECT_THROW(ssim(a, b), ContractError);
    EXPECT_THROW(rmse(a, b), ContractError);
    EXPECT_THROW(mae(a, b), ContractError);
}

} // namespace
} // namespace stegainr
