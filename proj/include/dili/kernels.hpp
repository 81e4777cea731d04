#pragma once

#include <cmath>
#include <cstddef>
#include <string_view>

// Inner kernel of the embedding-set distance: the sum over all ordered atom
// pairs (i, j) of ||x_i - y_j||^p. A scalar reference implementation is always
// built; AVX2 (x86-64) and NEON (aarch64) variants are selected at runtime and
// equivalence-tested against the reference. Per-pair squared distances and all
// running sums accumulate in double precision; per-row partial sums are
// combined with pairwise (tree) summation to bound drift on large inputs.

namespace dili::retrieval::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

/// True when the ISA's kernel is compiled in and supported by this CPU.
bool isa_available(Isa isa);

/// Best available ISA on this machine (honours DILI_KERNEL_ISA=scalar|avx2|neon).
Isa preferred_isa();

Isa active_isa();

/// Forces the dispatched kernel; throws std::invalid_argument when the ISA is
/// unavailable. Intended for equivalence tests and benchmarking.
void set_active_isa(Isa isa);

/// Dispatched kernel: x is mx*d row-major, y is my*d row-major; returns
/// sum_{i<mx, j<my} ||x_i - y_j||^p.
double pair_pow_sum(const float* x, std::size_t mx, const float* y, std::size_t my,
                    std::size_t d, double p);

namespace scalar {
double pair_pow_sum(const float* x, std::size_t mx, const float* y, std::size_t my,
                    std::size_t d, double p);
}

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double pair_pow_sum(const float* x, std::size_t mx, const float* y, std::size_t my,
                    std::size_t d, double p);
}
#endif

#if defined(__aarch64__)
namespace neon {
double pair_pow_sum(const float* x, std::size_t mx, const float* y, std::size_t my,
                    std::size_t d, double p);
}
#endif

namespace detail {

/// (sq)^(p/2) for sq = squared Euclidean distance; the p in {2, 1, 0.5} cases
/// avoid the generic pow.
inline double pow_from_squared(double sq, double p) {
    if (p == 2.0) return sq;
    if (p == 1.0) return std::sqrt(sq);
    if (p == 0.5) return std::sqrt(std::sqrt(sq));
    return std::pow(sq, 0.5 * p);
}

/// Pairwise (tree) summation.
inline double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

}  // namespace detail

}  // namespace dili::retrieval::kernels
