#pragma once

// Magnitude-based selection of the frozen weight set and its compact
// index encoding.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "stegainr/detail/binary.hpp"
#include "stegainr/errors.hpp"
#include "stegainr/nn.hpp"
#include "stegainr/random.hpp"

namespace stegainr {

/// Hash of the architecture; guards masks and keys against the wrong model.
inline std::uint64_t arch_fingerprint(const ArchSpec& arch) {
    detail::ByteWriter w;
    w.u64(arch.in_dim);
    w.u64(arch.out_dim);
    w.u64(arch.hidden_layers);
    w.u64(arch.width);
    w.f64(arch.omega0);
    return detail::fnv1a(w.bytes());
}

/// floor(ratio * total), the number of positions a selection of `ratio` covers.
inline std::size_t selection_count(double ratio, std::size_t total) {
    return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(total)));
}

namespace detail {

struct WeightRef {
    double magnitude;
    std::uint32_t layer;
    std::uint32_t index; // flat row-major index inside the layer
};

inline std::vector<WeightRef> weight_refs(const NetworkParams& params) {
    std::vector<WeightRef> refs;
    refs.reserve(params.arch.weight_count());
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        const auto& w = params.weights[l];
        for (Eigen::Index k = 0; k < w.size(); ++k)
            refs.push_back({std::abs(w.data()[k]), static_cast<std::uint32_t>(l), static_cast<std::uint32_t>(k)});
    }
    return refs;
}

inline bool position_less(const WeightRef& a, const WeightRef& b) {
    return a.layer != b.layer ? a.layer < b.layer : a.index < b.index;
}

} // namespace detail

/// Marks the floor(ratio * N) weights of largest magnitude across all layers
/// (one global threshold). Ties go to the earlier (layer, index) position.
inline WeightMask select_mask(const NetworkParams& params, double ratio) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw ContractError("ratio S must lie in (0, 1)");
    params.validate();
    auto refs = detail::weight_refs(params);
    const std::size_t k = selection_count(ratio, refs.size());
    auto larger = [](const detail::WeightRef& a, const detail::WeightRef& b) {
        if (a.magnitude != b.magnitude) return a.magnitude > b.magnitude;
        return detail::position_less(a, b);
    };
    std::partial_sort(refs.begin(), refs.begin() + static_cast<std::ptrdiff_t>(k), refs.end(), larger);
    WeightMask mask = WeightMask::zeros(params.arch);
    for (std::size_t i = 0; i < k; ++i) mask.layers[refs[i].layer].data()[refs[i].index] = 1;
    return mask;
}

/// floor(ratio * N) positions drawn uniformly without replacement.
inline WeightMask random_mask(const ArchSpec& arch, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw ContractError("ratio S must lie in (0, 1)");
    const std::size_t n = arch.weight_count();
    const std::size_t k = selection_count(ratio, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    RandomStream rng(mix_seed(seed, 0x4d41534bULL));
    // Partial Fisher-Yates; the first k slots are the selection.
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform() * static_cast<double>(n - i));
        std::swap(order[i], order[std::min(j, n - 1)]);
    }
    WeightMask mask = WeightMask::zeros(arch);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t flat = order[i];
        std::size_t layer = 0;
        while (flat >= arch.layer_weight_count(layer)) flat -= arch.layer_weight_count(layer++);
        mask.layers[layer].data()[flat] = 1;
    }
    return mask;
}

inline void check_mask_shape(const WeightMask& mask, const ArchSpec& arch) {
    if (mask.layers.size() != arch.layer_count()) throw ContractError("mask layer count does not match architecture");
    for (std::size_t i = 0; i < arch.layer_count(); ++i)
        if (static_cast<std::size_t>(mask.layers[i].rows()) != arch.layer_outputs(i) ||
            static_cast<std::size_t>(mask.layers[i].cols()) != arch.layer_inputs(i))
            throw ContractError("mask shape mismatch at layer " + std::to_string(i));
}

/// Entry-wise a where mask = 1 and b where mask = 0.
inline std::vector<Matrix> complement_apply(const std::vector<Matrix>& a, const std::vector<Matrix>& b,
                                            const WeightMask& mask) {
    if (a.size() != b.size() || a.size() != mask.layers.size())
        throw ContractError("complement_apply: layer counts differ");
    std::vector<Matrix> out;
    out.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].rows() != b[i].rows() || a[i].cols() != b[i].cols() || a[i].rows() != mask.layers[i].rows() ||
            a[i].cols() != mask.layers[i].cols())
            throw ContractError("complement_apply: shape mismatch at layer " + std::to_string(i));
        out.push_back((mask.layers[i].array() != 0).select(a[i], b[i]));
    }
    return out;
}

/// Positions where the mask is 1, as sorted flat indices per layer.
struct SparseMask {
    std::uint64_t fingerprint = 0;
    std::vector<std::vector<std::uint32_t>> indices;

    std::size_t count() const {
        std::size_t n = 0;
        for (const auto& l : indices) n += l.size();
        return n;
    }
    bool operator==(const SparseMask&) const = default;
};

inline SparseMask to_sparse(const WeightMask& mask, const ArchSpec& arch) {
    check_mask_shape(mask, arch);
    SparseMask s;
    s.fingerprint = arch_fingerprint(arch);
    s.indices.resize(mask.layers.size());
    for (std::size_t l = 0; l < mask.layers.size(); ++l) {
        const auto& m = mask.layers[l];
        for (Eigen::Index k = 0; k < m.size(); ++k)
            if (m.data()[k] != 0) s.indices[l].push_back(static_cast<std::uint32_t>(k));
    }
    return s;
}

inline WeightMask from_sparse(const SparseMask& sparse, const ArchSpec& arch) {
    if (sparse.fingerprint != arch_fingerprint(arch))
        throw FormatError("sparse mask fingerprint does not match architecture " + arch.to_string());
    if (sparse.indices.size() != arch.layer_count())
        throw FormatError("sparse mask has " + std::to_string(sparse.indices.size()) + " layers, expected " +
                          std::to_string(arch.layer_count()));
    WeightMask mask = WeightMask::zeros(arch);
    for (std::size_t l = 0; l < sparse.indices.size(); ++l) {
        const std::size_t limit = arch.layer_weight_count(l);
        std::int64_t prev = -1;
        for (std::uint32_t idx : sparse.indices[l]) {
            if (idx >= limit)
                throw FormatError("sparse index " + std::to_string(idx) + " out of range in layer " + std::to_string(l));
            if (static_cast<std::int64_t>(idx) <= prev)
                throw FormatError("sparse indices not strictly increasing in layer " + std::to_string(l));
            prev = idx;
            mask.layers[l].data()[idx] = 1;
        }
    }
    return mask;
}

/// Bits per stored index for a layer with `weight_count` entries.
inline unsigned index_bit_width(std::size_t weight_count) {
    return weight_count <= 2 ? 1u : static_cast<unsigned>(std::bit_width(weight_count - 1));
}

/// Size of the index payload in bits (per-layer byte padding and counts excluded).
inline std::size_t sparse_payload_bits(const SparseMask& sparse, const ArchSpec& arch) {
    std::size_t bits = 0;
    for (std::size_t l = 0; l < sparse.indices.size(); ++l)
        bits += sparse.indices[l].size() * index_bit_width(arch.layer_weight_count(l));
    return bits;
}

/// Bits of the dense binary mask: one per weight.
inline std::size_t dense_mask_bits(const ArchSpec& arch) { return arch.weight_count(); }

/// Per layer: u32 count, then `count` indices of index_bit_width bits packed
/// LSB-first and padded to a byte boundary. The layer count is implied by
/// the architecture.
inline std::vector<std::uint8_t> encode_sparse(const SparseMask& sparse, const ArchSpec& arch) {
    if (sparse.indices.size() != arch.layer_count())
        throw ContractError("sparse mask layer count does not match architecture");
    detail::ByteWriter w;
    for (std::size_t l = 0; l < sparse.indices.size(); ++l) {
        const auto& idx = sparse.indices[l];
        const unsigned width = index_bit_width(arch.layer_weight_count(l));
        w.u32(static_cast<std::uint32_t>(idx.size()));
        std::vector<std::uint8_t> packed((idx.size() * width + 7) / 8, 0);
        std::size_t bit = 0;
        for (std::uint32_t v : idx) {
            for (unsigned b = 0; b < width; ++b, ++bit)
                if ((v >> b) & 1u) packed[bit / 8] |= static_cast<std::uint8_t>(1u << (bit % 8));
        }
        w.raw(packed);
    }
    return w.take();
}

/// Inverse of encode_sparse; `reader` is advanced past the payload.
inline SparseMask decode_sparse(detail::ByteReader& reader, const ArchSpec& arch, std::uint64_t fingerprint) {
    SparseMask s;
    s.fingerprint = fingerprint;
    s.indices.resize(arch.layer_count());
    for (std::size_t l = 0; l < arch.layer_count(); ++l) {
        const std::size_t limit = arch.layer_weight_count(l);
        const std::size_t count_offset = reader.offset();
        const std::uint32_t count = reader.u32();
        if (count > limit)
            throw FormatError("layer " + std::to_string(l) + " declares more indices than weights", count_offset);
        const unsigned width = index_bit_width(limit);
        const std::size_t nbytes = (static_cast<std::size_t>(count) * width + 7) / 8;
        const std::size_t data_offset = reader.offset();
        const std::uint8_t* packed = reader.take(nbytes);
        auto& out = s.indices[l];
        out.reserve(count);
        std::size_t bit = 0;
        for (std::uint32_t i = 0; i < count; ++i) {
            std::uint32_t v = 0;
            for (unsigned b = 0; b < width; ++b, ++bit)
                if ((packed[bit / 8] >> (bit % 8)) & 1u) v |= 1u << b;
            if (v >= limit || (!out.empty() && v <= out.back()))
                throw FormatError("malformed sparse index in layer " + std::to_string(l), data_offset + bit / 8);
            out.push_back(v);
        }
    }
    return s;
}

} // namespace stegainr
