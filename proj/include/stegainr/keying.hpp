#pragma once

// Seeded secret-weight generation and the recipient key.
//
// Generation pipeline (identified by kPrngId, part of every key file):
//   1. layer sub-seed  = splitmix64(seed ^ splitmix64(layer_index))
//   2. uniform stream  = std::mt19937_64(sub-seed), 53-bit doubles
//   3. normals         = Box-Muller, cosine branch first, pairs consumed in order
//   4. each entry      = normal * sqrt(2 / (n_in + n_out)), rounded to float
// Entries fill each layer's weight matrix in row-major order. The full shape
// is generated regardless of the mask.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "stegainr/errors.hpp"
#include "stegainr/masking.hpp"
#include "stegainr/nn.hpp"
#include "stegainr/random.hpp"

namespace stegainr {

inline constexpr const char* kPrngId = "splitmix64-mt19937_64-boxmuller-f32/1";

using SecretWeights = std::vector<Matrix>;

inline SecretWeights generate_secret_weights(std::uint64_t seed, const ArchSpec& arch) {
    arch.validate();
    SecretWeights out;
    out.reserve(arch.layer_count());
    for (std::size_t l = 0; l < arch.layer_count(); ++l) {
        const std::size_t fan_in = arch.layer_inputs(l);
        const std::size_t fan_out = arch.layer_outputs(l);
        const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in + fan_out));
        RandomStream rng(mix_seed(seed, l));
        Matrix w(static_cast<Eigen::Index>(fan_out), static_cast<Eigen::Index>(fan_in));
        for (Eigen::Index k = 0; k < w.size(); ++k)
            w.data()[k] = static_cast<double>(static_cast<float>(rng.normal() * stddev));
        out.push_back(std::move(w));
    }
    return out;
}

/// Xavier-normal network with zero biases, built from the same stream.
inline NetworkParams xavier_init(const ArchSpec& arch, std::uint64_t seed) {
    NetworkParams p = NetworkParams::zeros(arch);
    p.weights = generate_secret_weights(seed, arch);
    return p;
}

struct StegoKey {
    SparseMask sparse_mask;
    std::uint64_t seed = 0;
    ArchSpec arch;
    std::string prng_id = kPrngId;

    bool operator==(const StegoKey&) const = default;
};

inline StegoKey make_key(const SparseMask& mask, std::uint64_t seed, const ArchSpec& arch) {
    if (mask.fingerprint != arch_fingerprint(arch))
        throw KeyError("sparse mask fingerprint does not match architecture " + arch.to_string());
    if (mask.indices.size() != arch.layer_count())
        throw KeyError("sparse mask layer count does not match architecture " + arch.to_string());
    return StegoKey{mask, seed, arch, kPrngId};
}

} // namespace stegainr
