#pragma once

// Binary model, key and mask files. All integers and floats are little-endian.
//
// Model  ("SINR"): magic, u32 version, u32 in_dim, u32 out_dim,
//                  u32 hidden_layers, u32 width, f64 omega0,
//                  u32 train_height, u32 train_width,
//                  then per layer: weights (f32, row-major), biases (f32).
// Key    ("SKEY"): magic, u32 version, u16 prng-id length, prng-id bytes,
//                  u64 seed, u64 architecture fingerprint, sparse payload.
// Mask   ("SMSK"): magic, u32 version, u64 architecture fingerprint,
//                  sparse payload.
//
// The sparse payload layout is defined by encode_sparse(); decoding it needs
// the architecture, which is why keys and masks load against a model.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "stegainr/detail/binary.hpp"
#include "stegainr/errors.hpp"
#include "stegainr/keying.hpp"
#include "stegainr/masking.hpp"
#include "stegainr/nn.hpp"

namespace stegainr {

inline constexpr std::uint32_t kModelVersion = 1;
inline constexpr std::uint32_t kKeyVersion = 1;
inline constexpr std::uint32_t kMaskVersion = 1;
inline constexpr std::size_t kModelHeaderBytes = 40;

struct ModelFile {
    NetworkParams params;
    std::uint32_t train_height = 0; // 0 when unknown
    std::uint32_t train_width = 0;
};

namespace detail {

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

inline void expect_magic(ByteReader& r, const char* magic) {
    const std::string got = r.str(4);
    if (got != magic) throw FormatError(std::string("bad magic, expected '") + magic + "'", 0);
}

inline void expect_version(ByteReader& r, std::uint32_t expected) {
    const std::size_t at = r.offset();
    const std::uint32_t v = r.u32();
    if (v != expected) throw FormatError("unsupported format version " + std::to_string(v), at);
}

inline void expect_end(const ByteReader& r) {
    if (r.remaining() != 0) throw FormatError("trailing bytes after payload", r.offset());
}

} // namespace detail

inline std::vector<std::uint8_t> encode_model(const ModelFile& model) {
    const NetworkParams& p = model.params;
    p.validate();
    detail::ByteWriter w;
    w.raw("SINR");
    w.u32(kModelVersion);
    w.u32(static_cast<std::uint32_t>(p.arch.in_dim));
    w.u32(static_cast<std::uint32_t>(p.arch.out_dim));
    w.u32(static_cast<std::uint32_t>(p.arch.hidden_layers));
    w.u32(static_cast<std::uint32_t>(p.arch.width));
    w.f64(p.arch.omega0);
    w.u32(model.train_height);
    w.u32(model.train_width);
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        for (Eigen::Index k = 0; k < p.weights[l].size(); ++k) w.f32(static_cast<float>(p.weights[l].data()[k]));
        for (Eigen::Index k = 0; k < p.biases[l].size(); ++k) w.f32(static_cast<float>(p.biases[l][k]));
    }
    return w.take();
}

inline ModelFile decode_model(const std::vector<std::uint8_t>& bytes) {
    detail::ByteReader r(bytes);
    detail::expect_magic(r, "SINR");
    detail::expect_version(r, kModelVersion);
    ModelFile m;
    ArchSpec& a = m.params.arch;
    const std::size_t arch_at = r.offset();
    a.in_dim = r.u32();
    a.out_dim = r.u32();
    a.hidden_layers = r.u32();
    a.width = r.u32();
    a.omega0 = r.f64();
    m.train_height = r.u32();
    m.train_width = r.u32();
    try {
        a.validate();
    } catch (const ContractError& e) {
        throw FormatError(std::string("invalid architecture: ") + e.what(), arch_at);
    }
    const std::size_t expected = 4 * (a.weight_count() + a.bias_count());
    if (r.remaining() < expected) throw FormatError("truncated parameter payload", bytes.size());
    m.params = NetworkParams::zeros(a);
    for (std::size_t l = 0; l < a.layer_count(); ++l) {
        auto read_into = [&](double* dst, Eigen::Index n) {
            for (Eigen::Index k = 0; k < n; ++k) {
                const std::size_t at = r.offset();
                const float v = r.f32();
                if (!std::isfinite(v)) throw FormatError("non-finite parameter", at);
                dst[k] = v;
            }
        };
        read_into(m.params.weights[l].data(), m.params.weights[l].size());
        read_into(m.params.biases[l].data(), m.params.biases[l].size());
    }
    detail::expect_end(r);
    return m;
}

inline void save_model(const std::filesystem::path& path, const ModelFile& model) {
    detail::write_file(path, encode_model(model));
}

inline void save_model(const std::filesystem::path& path, const NetworkParams& params, std::uint32_t train_height = 0,
                       std::uint32_t train_width = 0) {
    save_model(path, ModelFile{params, train_height, train_width});
}

inline ModelFile load_model(const std::filesystem::path& path) { return decode_model(detail::read_file(path)); }

inline std::vector<std::uint8_t> encode_key(const StegoKey& key) {
    detail::ByteWriter w;
    w.raw("SKEY");
    w.u32(kKeyVersion);
    w.u16(static_cast<std::uint16_t>(key.prng_id.size()));
    w.raw(key.prng_id);
    w.u64(key.seed);
    w.u64(key.sparse_mask.fingerprint);
    w.raw(encode_sparse(key.sparse_mask, key.arch));
    return w.take();
}

/// Decodes a key for a model of architecture `arch`; KeyError when the
/// fingerprint belongs to another architecture.
inline StegoKey decode_key(const std::vector<std::uint8_t>& bytes, const ArchSpec& arch) {
    detail::ByteReader r(bytes);
    detail::expect_magic(r, "SKEY");
    detail::expect_version(r, kKeyVersion);
    StegoKey key;
    key.arch = arch;
    const std::uint16_t id_len = r.u16();
    key.prng_id = r.str(id_len);
    key.seed = r.u64();
    const std::uint64_t fp = r.u64();
    if (fp != arch_fingerprint(arch))
        throw KeyError("key fingerprint does not match model architecture " + arch.to_string());
    key.sparse_mask = decode_sparse(r, arch, fp);
    detail::expect_end(r);
    return key;
}

inline void save_key(const std::filesystem::path& path, const StegoKey& key) { detail::write_file(path, encode_key(key)); }

inline StegoKey load_key(const std::filesystem::path& path, const ArchSpec& arch) {
    return decode_key(detail::read_file(path), arch);
}

inline std::vector<std::uint8_t> encode_mask_file(const SparseMask& mask, const ArchSpec& arch) {
    detail::ByteWriter w;
    w.raw("SMSK");
    w.u32(kMaskVersion);
    w.u64(mask.fingerprint);
    w.raw(encode_sparse(mask, arch));
    return w.take();
}

inline SparseMask decode_mask_file(const std::vector<std::uint8_t>& bytes, const ArchSpec& arch) {
    detail::ByteReader r(bytes);
    detail::expect_magic(r, "SMSK");
    detail::expect_version(r, kMaskVersion);
    const std::size_t fp_at = r.offset();
    const std::uint64_t fp = r.u64();
    if (fp != arch_fingerprint(arch)) throw FormatError("mask fingerprint does not match model architecture", fp_at);
    SparseMask m = decode_sparse(r, arch, fp);
    detail::expect_end(r);
    return m;
}

inline void save_mask(const std::filesystem::path& path, const SparseMask& mask, const ArchSpec& arch) {
    detail::write_file(path, encode_mask_file(mask, arch));
}

inline SparseMask load_mask(const std::filesystem::path& path, const ArchSpec& arch) {
    return decode_mask_file(detail::read_file(path), arch);
}

} // namespace stegainr
