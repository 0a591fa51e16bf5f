#include <gtest/gtest.h>

#include <random>

#include "stegainr/codec.hpp"
#include "stegainr/metrics.hpp"
#include "test_support.hpp"

namespace stegainr {
namespace {

ArchSpec small_arch(std::size_t hidden, std::size_t width) {
    ArchSpec a;
    a.hidden_layers = hidden;
    a.width = width;
    return a;
}

TrainingConfig cover_config(std::size_t epochs) {
    TrainingConfig c;
    c.cover_epochs = epochs;
    c.cover_lr = 1e-3;
    return c;
}

TEST(Grid, CornerGrid) {
    const CoordGrid g = make_grid(2, 2);
    const double expected[4][2] = {{-1, -1}, {-1, 1}, {1, -1}, {1, 1}};
    for (int k = 0; k < 4; ++k) {
        EXPECT_EQ(g.coords(0, k), expected[k][0]);
        EXPECT_EQ(g.coords(1, k), expected[k][1]);
    }
}

TEST(Grid, SinglePixelIsCentre) {
    const CoordGrid g = make_grid(1, 1);
    EXPECT_EQ(g.coords.cols(), 1);
    EXPECT_EQ(g.coords(0, 0), 0.0);
    EXPECT_EQ(g.coords(1, 0), 0.0);
}

TEST(Grid, ThreeByTwoMatchesLinspace) {
    const CoordGrid g = make_grid(3, 2);
    const std::vector<double> rows{-1.0, 0.0, 1.0};
    const std::vector<double> cols{-1.0, 1.0};
    ASSERT_EQ(g.coords.cols(), 6);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 2; ++c) {
            const auto k = static_cast<Eigen::Index>(r * 2 + c);
            EXPECT_EQ(g.coords(0, k), rows[r]);
            EXPECT_EQ(g.coords(1, k), cols[c]);
        }
}

TEST(Grid, GeneralLinspaceAndDeterminism) {
    for (auto [h, w] : {std::pair<std::size_t, std::size_t>{5, 7}, {1, 4}, {9, 1}, {16, 16}}) {
        const CoordGrid g = make_grid(h, w);
        EXPECT_TRUE(g.coords == make_grid(h, w).coords);
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < w; ++c) {
                const auto k = static_cast<Eigen::Index>(r * w + c);
                const double y = h == 1 ? 0.0 : -1.0 + 2.0 * double(r) / double(h - 1);
                const double x = w == 1 ? 0.0 : -1.0 + 2.0 * double(c) / double(w - 1);
                EXPECT_DOUBLE_EQ(g.coords(0, k), y);
                EXPECT_DOUBLE_EQ(g.coords(1, k), x);
                EXPECT_GE(g.coords(0, k), -1.0);
                EXPECT_LE(g.coords(1, k), 1.0);
            }
    }
}

TEST(Grid, RejectsZeroDimension) {
    EXPECT_THROW(make_grid(0, 3), ContractError);
    EXPECT_THROW(make_grid(3, 0), ContractError);
}

TEST(ValueMapping, RoundTrip) {
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const double v = dist(rng);
        EXPECT_NEAR(to_unit_range(to_signed_range(v)), v, 1e-16);
    }
    EXPECT_EQ(to_unit_range(to_signed_range(0.0)), 0.0);
    EXPECT_EQ(to_unit_range(to_signed_range(1.0)), 1.0);
}

TEST(Sample, ZeroNetworkIsMidGray) {
    const ImageBuffer img = sample(NetworkParams::zeros(small_arch(2, 8)), 5, 3);
    EXPECT_EQ(img.height, 5u);
    EXPECT_EQ(img.width, 3u);
    for (double v : img.pixels) EXPECT_EQ(v, 0.5);
}

TEST(Sample, EqualsForwardOnTrainingGrid) {
    const NetworkParams p = test::random_network(small_arch(2, 16), 3, 0.3);
    const ImageBuffer img = sample(p, 6, 9);
    const Batch out = forward(p, make_grid(6, 9).coords);
    for (std::size_t px = 0; px < 54; ++px)
        for (std::size_t ch = 0; ch < 3; ++ch) {
            const double v = std::clamp((out(Eigen::Index(ch), Eigen::Index(px)) + 1.0) / 2.0, 0.0, 1.0);
            EXPECT_EQ(img.pixels[px * 3 + ch], v);
        }
}

TEST(Sample, SizeAndRangeForArbitraryNetworks) {
    for (std::uint32_t seed = 0; seed < 10; ++seed) {
        const NetworkParams p = test::random_network(small_arch(2, 8), seed, 2.0);
        const std::size_t h = 1 + seed % 5, w = 2 + seed % 3;
        const ImageBuffer img = sample(p, h, w);
        ASSERT_EQ(img.pixels.size(), h * w * 3);
        for (double v : img.pixels) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
}

TEST(FitCover, ZeroEpochsReturnsInitialization) {
    const ImageBuffer img = test::fixture("astronaut_32.png");
    const ArchSpec a = small_arch(2, 16);
    const auto [p, report] = fit_cover(img, a, cover_config(0), 9);
    EXPECT_TRUE(p == quantized(sine_init(a, 9)));
    EXPECT_EQ(report.best_epoch, 0u);
    EXPECT_EQ(report.epochs_run, 0u);
    const Batch targets = image_targets(img);
    EXPECT_EQ(report.best_loss, backward(sine_init(a, 9), make_grid(32, 32).coords, targets).loss);
}

ImageBuffer constant_image(std::size_t h, std::size_t w, double v) {
    ImageBuffer img(h, w);
    std::fill(img.pixels.begin(), img.pixels.end(), v);
    return img;
}

TEST(FitCover, ConstantImagesLearnableWithinThousandEpochs) {
    for (double v : {0.1, 0.37, 0.5, 0.8})
        for (std::uint64_t seed : {1, 2}) {
            const auto [p, report] = fit_cover(constant_image(16, 16, v), small_arch(2, 64), cover_config(1000), seed);
            EXPECT_GE(report.final_psnr, 40.0) << "value " << v << " seed " << seed;
            EXPECT_GE(report.best_loss, 0.0);
        }
}

TEST(FitCover, NaturalCropKeepsImproving) {
    const ImageBuffer img = test::fixture("astronaut_32.png");
    const ArchSpec a = small_arch(4, 64);
    const auto early = fit_cover(img, a, cover_config(100), 5).second;
    const auto late = fit_cover(img, a, cover_config(2000), 5).second;
    EXPECT_GT(late.final_psnr, early.final_psnr);
    EXPECT_LE(late.best_loss, early.best_loss);
}

TEST(FitCover, ReturnsFloatRepresentableBestSnapshot) {
    const auto [p, report] = fit_cover(test::fixture("rocket_32.png"), small_arch(2, 16), cover_config(50), 3);
    EXPECT_TRUE(quantized(p) == p);
    EXPECT_LE(report.best_epoch, 50u);
}

TEST(FitCover, DivergenceReportsEpoch) {
    TrainingConfig c = cover_config(50);
    c.cover_lr = 1e300;
    try {
        fit_cover(test::fixture("rocket_32.png"), small_arch(2, 16), c, 3);
        FAIL() << "expected TrainingError";
    } catch (const TrainingError& e) {
        EXPECT_GE(e.epoch(), 1u);
        EXPECT_LE(e.epoch(), 50u);
    }
}

TEST(FitCover, RejectsNonImageArchitecture) {
    ArchSpec a = small_arch(1, 4);
    a.out_dim = 1;
    EXPECT_THROW(fit_cover(test::fixture("rocket_32.png"), a, cover_config(0), 1), ContractError);
}

ImageBuffer box_downsample_2x(const ImageBuffer& img) {
    ImageBuffer out(img.height / 2, img.width / 2);
    for (std::size_t r = 0; r < out.height; ++r)
        for (std::size_t c = 0; c < out.width; ++c)
            for (std::size_t ch = 0; ch < 3; ++ch)
                out.pixels[(r * out.width + c) * 3 + ch] =
                    (img.at(2 * r, 2 * c, ch) + img.at(2 * r + 1, 2 * c, ch) + img.at(2 * r, 2 * c + 1, ch) +
                     img.at(2 * r + 1, 2 * c + 1, ch)) /
                    4.0;
    return out;
}

// Holds while the network has far fewer parameters than pixel values; a net that
// memorizes a small image gets a native PSNR that no interpolant can match at 2x.
TEST(Sample, DoubleResolutionDownsamplesConsistentlyBelowCapacity) {
    const ImageBuffer img = test::fixture("astronaut_128.png");
    const ArchSpec a = small_arch(2, 32);
    ASSERT_LT(a.weight_count() + a.bias_count(), img.pixels.size() / 10);
    const auto [p, report] = fit_cover(img, a, cover_config(500), 5);
    const ImageBuffer hi = sample(p, 256, 256);
    ASSERT_EQ(hi.height, 256u);
    ASSERT_EQ(hi.width, 256u);
    const double native = psnr(sample(p, 128, 128), img);
    const double down = psnr(box_downsample_2x(hi), img);
    EXPECT_LE(std::abs(native - down), 3.0) << "native " << native << " dB, downsampled " << down << " dB";
}

} // namespace
} // namespace stegainr
