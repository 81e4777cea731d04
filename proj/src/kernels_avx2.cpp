#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <vector>

#include "dili/kernels.hpp"

namespace dili::retrieval::kernels::avx2 {

namespace {

// Squared distance between two d-dim float rows, widened to double before the
// FMA so the result carries double-precision rounding only.
inline double squared_distance(const float* a, const float* b, std::size_t d) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 8 <= d; k += 8) {
        const __m256 av = _mm256_loadu_ps(a + k);
        const __m256 bv = _mm256_loadu_ps(b + k);
        const __m256d alo = _mm256_cvtps_pd(_mm256_castps256_ps128(av));
        const __m256d blo = _mm256_cvtps_pd(_mm256_castps256_ps128(bv));
        const __m256d dlo = _mm256_sub_pd(alo, blo);
        acc0 = _mm256_fmadd_pd(dlo, dlo, acc0);
        const __m256d ahi = _mm256_cvtps_pd(_mm256_extractf128_ps(av, 1));
        const __m256d bhi = _mm256_cvtps_pd(_mm256_extractf128_ps(bv, 1));
        const __m256d dhi = _mm256_sub_pd(ahi, bhi);
        acc1 = _mm256_fmadd_pd(dhi, dhi, acc1);
    }
    const __m256d acc = _mm256_add_pd(acc0, acc1);
    alignas(32) double buf[4];
    _mm256_store_pd(buf, acc);
    double sq = (buf[0] + buf[2]) + (buf[1] + buf[3]);
    for (; k < d; ++k) {
        const double diff = static_cast<double>(a[k]) - static_cast<double>(b[k]);
        sq += diff * diff;
    }
    return sq;
}

}  // namespace

double pair_pow_sum(const float* x, std::size_t mx, const float* y, std::size_t my,
                    std::size_t d, double p) {
    std::vector<double> row_sums(mx, 0.0);
    for (std::size_t i = 0; i < mx; ++i) {
        const float* xi = x + i * d;
        double acc = 0.0;
        for (std::size_t j = 0; j < my; ++j)
            acc += detail::pow_from_squared(squared_distance(xi, y + j * d, d), p);
        row_sums[i] = acc;
    }
    return detail::pairwise_sum(row_sums.data(), row_sums.size());
}

}  // namespace dili::retrieval::kernels::avx2

#endif  // x86-64
