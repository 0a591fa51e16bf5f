#pragma once

// Vectorized sin/cos over contiguous buffers.
//
// When STEGAINR_USE_LIBMVEC is defined (glibc on x86-64), sin/cos are
// redeclared with their libmvec SIMD variants so `omp simd` loops call the
// vector ABI without enabling -ffast-math. Every element goes through a
// fixed-width block, so an element's result never depends on its position
// in the buffer.

#include <algorithm>
#include <cmath>
#include <cstddef>

#if defined(STEGAINR_USE_LIBMVEC) && defined(__x86_64__) && defined(__GLIBC__)
extern "C" {
__attribute__((simd("notinbranch"))) double sin(double) noexcept;
__attribute__((simd("notinbranch"))) double cos(double) noexcept;
}
#endif

namespace stegainr::detail {

inline constexpr std::size_t kSineBlock = 16;

inline void sine_block(const double* z, double omega, double* out) {
#pragma omp simd
    for (std::size_t k = 0; k < kSineBlock; ++k) out[k] = ::sin(omega * z[k]);
}

// Separate loops keep GCC from fusing the pair into a scalar sincos call.
inline void sine_cos_block(const double* z, double omega, double* out, double* deriv) {
    double arg[kSineBlock];
#pragma omp simd
    for (std::size_t k = 0; k < kSineBlock; ++k) arg[k] = omega * z[k];
#pragma omp simd
    for (std::size_t k = 0; k < kSineBlock; ++k) deriv[k] = omega * ::cos(arg[k]);
#pragma omp simd
    for (std::size_t k = 0; k < kSineBlock; ++k) out[k] = ::sin(arg[k]);
}

/// out[k] = sin(omega * z[k]); z and out may alias.
inline void apply_sine(const double* z, double* out, std::size_t n, double omega) {
    std::size_t k = 0;
    for (; k + kSineBlock <= n; k += kSineBlock) sine_block(z + k, omega, out + k);
    if (k < n) {
        double zin[kSineBlock] = {};
        double zout[kSineBlock];
        std::copy(z + k, z + n, zin);
        sine_block(zin, omega, zout);
        std::copy(zout, zout + (n - k), out + k);
    }
}

/// out[k] = sin(omega * z[k]) and deriv[k] = omega * cos(omega * z[k]).
inline void apply_sine_with_derivative(const double* z, double* out, double* deriv,
                                       std::size_t n, double omega) {
    std::size_t k = 0;
    for (; k + kSineBlock <= n; k += kSineBlock)
        sine_cos_block(z + k, omega, out + k, deriv + k);
    if (k < n) {
        double zin[kSineBlock] = {};
        double zout[kSineBlock];
        double dout[kSineBlock];
        std::copy(z + k, z + n, zin);
        sine_cos_block(zin, omega, zout, dout);
        std::copy(zout, zout + (n - k), out + k);
        std::copy(dout, dout + (n - k), deriv + k);
    }
}

} // namespace stegainr::detail
