#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <tuple>

#include "stegainr/masking.hpp"
#include "test_support.hpp"

namespace stegainr {
namespace {

ArchSpec arch_of(std::size_t in, std::size_t width, std::size_t hidden, std::size_t out) {
    return ArchSpec{in, out, hidden, width, 30.0};
}

std::vector<std::uint8_t> flat(const WeightMask& m) {
    std::vector<std::uint8_t> out;
    for (const auto& l : m.layers) out.insert(out.end(), l.data(), l.data() + l.size());
    return out;
}

// Full sort of (|w|, layer, index) as the selection oracle.
std::vector<std::uint8_t> oracle_mask(const NetworkParams& p, double ratio) {
    std::vector<std::tuple<double, std::size_t, Eigen::Index>> all;
    std::size_t offset = 0;
    std::vector<std::size_t> offsets;
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        offsets.push_back(offset);
        for (Eigen::Index k = 0; k < p.weights[l].size(); ++k) all.emplace_back(std::abs(p.weights[l].data()[k]), l, k);
        offset += static_cast<std::size_t>(p.weights[l].size());
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
        return std::tie(std::get<1>(a), std::get<2>(a)) < std::tie(std::get<1>(b), std::get<2>(b));
    });
    const auto k = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(all.size())));
    std::vector<std::uint8_t> out(all.size(), 0);
    for (std::size_t i = 0; i < k; ++i)
        out[offsets[std::get<1>(all[i])] + static_cast<std::size_t>(std::get<2>(all[i]))] = 1;
    return out;
}

TEST(SelectMask, PicksTwoLargestMagnitudes) {
    // Layer 0 holds the four example weights; the lone output weight is 0 so
    // floor(0.5 * 5) = 2 picks come from layer 0.
    NetworkParams p = NetworkParams::zeros(arch_of(4, 1, 1, 1));
    p.weights[0] << 0.5, -0.9, 0.1, 0.3;
    const WeightMask m = select_mask(p, 0.5);
    EXPECT_EQ(m.layers[0](0, 0), 1);
    EXPECT_EQ(m.layers[0](0, 1), 1);
    EXPECT_EQ(m.layers[0](0, 2), 0);
    EXPECT_EQ(m.layers[0](0, 3), 0);
    EXPECT_EQ(m.layers[1](0, 0), 0);
}

TEST(SelectMask, ThresholdIsGlobalAcrossLayers) {
    NetworkParams p = NetworkParams::zeros(arch_of(1, 1, 1, 1));
    p.weights[0](0, 0) = 1.0;
    p.weights[1](0, 0) = 2.0;
    const WeightMask m = select_mask(p, 0.5);
    EXPECT_EQ(m.layers[0](0, 0), 0);
    EXPECT_EQ(m.layers[1](0, 0), 1);
}

TEST(SelectMask, EmptySelection) {
    const NetworkParams p = test::random_network(arch_of(2, 4, 1, 3), 1);
    const WeightMask m = select_mask(p, 0.01); // floor(0.01 * 20) = 0
    EXPECT_EQ(m.count(), 0u);
}

TEST(SelectMask, RejectsRatioOutsideOpenInterval) {
    const NetworkParams p = test::random_network(arch_of(2, 4, 1, 3), 1);
    for (double bad : {0.0, 1.0, -0.1, 1.5, std::nan("")}) EXPECT_THROW(select_mask(p, bad), ContractError);
}

TEST(SelectMask, TiesBrokenByPosition) {
    NetworkParams p = NetworkParams::zeros(arch_of(2, 3, 1, 2));
    for (auto& w : p.weights) w.setConstant(0.25);
    p.weights[0](1, 0) = -0.25;
    const WeightMask m = select_mask(p, 0.5); // 12 weights, 6 picked: all of layer 0
    EXPECT_TRUE((m.layers[0].array() == 1).all());
    EXPECT_TRUE((m.layers[1].array() == 0).all());
}

TEST(SelectMask, MatchesSortOracleAndCount) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> ratio(0.001, 0.999);
    for (int trial = 0; trial < 40; ++trial) {
        const ArchSpec a = arch_of(2, 4 + rng() % 20, 1 + rng() % 3, 3);
        NetworkParams p = test::random_network(a, rng());
        // Coarse rounding creates many exact ties.
        if (trial % 2 == 0)
            for (auto& w : p.weights) w = (w.array() * 4.0).round() / 4.0;
        const double s = ratio(rng);
        const WeightMask m = select_mask(p, s);
        EXPECT_EQ(m.count(), static_cast<std::size_t>(std::floor(s * a.weight_count())));
        EXPECT_EQ(flat(m), oracle_mask(p, s)) << a.to_string() << " S=" << s;
    }
}

TEST(SelectMask, NestedInRatio) {
    const NetworkParams p = test::random_network(arch_of(2, 32, 3, 3), 5);
    std::vector<double> ratios{0.01, 0.05, 0.1, 0.2, 0.5, 0.9};
    for (std::size_t i = 1; i < ratios.size(); ++i) {
        const auto small = flat(select_mask(p, ratios[i - 1]));
        const auto large = flat(select_mask(p, ratios[i]));
        for (std::size_t k = 0; k < small.size(); ++k)
            if (small[k]) EXPECT_EQ(large[k], 1) << "position " << k;
    }
}

TEST(SelectMask, ScaleEquivariant) {
    NetworkParams p = test::random_network(arch_of(2, 16, 2, 3), 6);
    for (auto& w : p.weights) w = (w.array() * 8.0).round() / 8.0; // ties survive scaling
    const auto base = flat(select_mask(p, 0.3));
    for (double c : {0.5, 2.0, 8.0, 1e-3}) {
        NetworkParams q = p;
        for (auto& w : q.weights) w *= c;
        EXPECT_EQ(flat(select_mask(q, 0.3)), base) << "scale " << c;
    }
}

TEST(RandomMask, CountAndDeterminism) {
    const ArchSpec a = arch_of(2, 16, 2, 3);
    const WeightMask m = random_mask(a, 0.2, 9);
    EXPECT_EQ(m.count(), static_cast<std::size_t>(std::floor(0.2 * a.weight_count())));
    EXPECT_TRUE(m == random_mask(a, 0.2, 9));
    EXPECT_FALSE(m == random_mask(a, 0.2, 10));
}

TEST(ComplementApply, Examples) {
    const ArchSpec a = arch_of(1, 2, 1, 1); // layers 2x1 and 1x2
    std::vector<Matrix> x{Matrix::Constant(2, 1, 1.0), Matrix::Constant(1, 2, 2.0)};
    std::vector<Matrix> y{Matrix::Constant(2, 1, 3.0), Matrix::Constant(1, 2, 4.0)};
    WeightMask ones = WeightMask::zeros(a);
    for (auto& l : ones.layers) l.setOnes();
    EXPECT_EQ(complement_apply(x, y, ones), x);
    EXPECT_EQ(complement_apply(x, y, WeightMask::zeros(a)), y);

    WeightMask m = WeightMask::zeros(a);
    m.layers[1](0, 0) = 1;
    std::vector<Matrix> a2{Matrix::Constant(2, 1, 0.0), (Matrix(1, 2) << 1, 2).finished()};
    std::vector<Matrix> b2{Matrix::Constant(2, 1, 0.0), (Matrix(1, 2) << 3, 4).finished()};
    const auto r = complement_apply(a2, b2, m);
    EXPECT_EQ(r[1](0, 0), 1.0);
    EXPECT_EQ(r[1](0, 1), 4.0);
}

TEST(ComplementApply, RejectsShapeMismatch) {
    const ArchSpec a = arch_of(1, 2, 1, 1);
    std::vector<Matrix> x{Matrix::Zero(2, 1), Matrix::Zero(1, 2)};
    std::vector<Matrix> bad{Matrix::Zero(2, 1), Matrix::Zero(1, 3)};
    EXPECT_THROW(complement_apply(x, bad, WeightMask::zeros(a)), ContractError);
}

TEST(Sparse, EmptyMaskHasNoIndices) {
    const ArchSpec a = arch_of(2, 16, 1, 3);
    const SparseMask s = to_sparse(WeightMask::zeros(a), a);
    ASSERT_EQ(s.indices.size(), 2u);
    for (const auto& l : s.indices) EXPECT_TRUE(l.empty());
    EXPECT_EQ(s.fingerprint, arch_fingerprint(a));
}

TEST(Sparse, RoundTripRandomMasks) {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const ArchSpec a = trial == 0 ? arch_of(2, 16, 1, 3) : arch_of(2, 1 + rng() % 40, 1 + rng() % 4, 3);
        WeightMask m = WeightMask::zeros(a);
        const unsigned density = rng() % 5;
        for (auto& l : m.layers)
            for (Eigen::Index k = 0; k < l.size(); ++k) l.data()[k] = density && rng() % density == 0;
        const SparseMask s = to_sparse(m, a);
        EXPECT_TRUE(from_sparse(s, a) == m);
        const auto bytes = encode_sparse(s, a);
        detail::ByteReader r(bytes);
        EXPECT_EQ(decode_sparse(r, a, s.fingerprint), s);
        EXPECT_EQ(r.remaining(), 0u);
    }
}

TEST(Sparse, IndexWidth) {
    EXPECT_EQ(index_bit_width(1), 1u);
    EXPECT_EQ(index_bit_width(2), 1u);
    EXPECT_EQ(index_bit_width(3), 2u);
    EXPECT_EQ(index_bit_width(64), 6u);
    EXPECT_EQ(index_bit_width(65), 7u);
    EXPECT_EQ(index_bit_width(128 * 128), 14u);
}

TEST(Sparse, EightOfFiveHundredTwelve) {
    // Eight 8x8 layers: 512 mask bits, 64 weights per layer -> 6-bit indices.
    const ArchSpec a = arch_of(8, 8, 7, 8);
    ASSERT_EQ(a.weight_count(), 512u);
    WeightMask m = WeightMask::zeros(a);
    for (std::size_t l = 0; l < 8; ++l) m.layers[l].data()[(l * 9) % 64] = 1;
    const SparseMask s = to_sparse(m, a);
    EXPECT_EQ(s.count(), 8u);
    EXPECT_EQ(dense_mask_bits(a), 512u);
    EXPECT_EQ(sparse_payload_bits(s, a), 48u);
    const double reduction = 1.0 - double(sparse_payload_bits(s, a)) / double(dense_mask_bits(a));
    EXPECT_DOUBLE_EQ(reduction, 0.90625);
}

TEST(Sparse, BitPackingLayout) {
    const ArchSpec a = arch_of(2, 2, 1, 1); // 4 weights (2-bit), 2 weights (1-bit)
    SparseMask s{arch_fingerprint(a), {{1, 3}, {0}}};
    const std::vector<std::uint8_t> expected{2, 0, 0, 0, 0b1101, 1, 0, 0, 0, 0};
    EXPECT_EQ(encode_sparse(s, a), expected);
}

TEST(Sparse, RejectsMalformedInput) {
    const ArchSpec a = arch_of(2, 4, 1, 3);
    SparseMask s{arch_fingerprint(a), {{0, 8}, {}}};
    EXPECT_THROW(from_sparse(s, a), FormatError); // 8 >= 2*4
    s.indices[0] = {3, 3};
    EXPECT_THROW(from_sparse(s, a), FormatError);
    s.indices[0] = {1};
    EXPECT_NO_THROW(from_sparse(s, a));
    EXPECT_THROW(from_sparse(s, arch_of(2, 5, 1, 3)), FormatError);
    s.indices.pop_back();
    EXPECT_THROW(from_sparse(s, a), FormatError);

    // Count larger than the layer, and a truncated payload.
    std::vector<std::uint8_t> bytes{9, 0, 0, 0};
    detail::ByteReader r1(bytes);
    EXPECT_THROW(decode_sparse(r1, a, arch_fingerprint(a)), FormatError);
    std::vector<std::uint8_t> cut{2, 0, 0, 0};
    detail::ByteReader r2(cut);
    EXPECT_THROW(decode_sparse(r2, a, arch_fingerprint(a)), FormatError);
}

TEST(Fingerprint, DistinguishesArchitectures) {
    const ArchSpec a = arch_of(2, 64, 4, 3);
    EXPECT_EQ(arch_fingerprint(a), arch_fingerprint(arch_of(2, 64, 4, 3)));
    EXPECT_NE(arch_fingerprint(a), arch_fingerprint(arch_of(2, 64, 5, 3)));
    EXPECT_NE(arch_fingerprint(a), arch_fingerprint(arch_of(2, 65, 4, 3)));
    ArchSpec b = a;
    b.omega0 = 31.0;
    EXPECT_NE(arch_fingerprint(a), arch_fingerprint(b));
}

} // namespace
} // namespace stegainr
