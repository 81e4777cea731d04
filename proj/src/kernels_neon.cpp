#if defined(__aarch64__)

#include <arm_neon.h>

#include <vector>

#include "dili/kernels.hpp"

namespace dili::retrieval::kernels::neon {

namespace {

inline double squared_distance(const float* a, const float* b, std::size_t d) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t k = 0;
    for (; k + 4 <= d; k += 4) {
        const float32x4_t av = vld1q_f32(a + k);
        const float32x4_t bv = vld1q_f32(b + k);
        const float64x2_t dlo =
            vsubq_f64(vcvt_f64_f32(vget_low_f32(av)), vcvt_f64_f32(vget_low_f32(bv)));
        acc0 = vfmaq_f64(acc0, dlo, dlo);
        const float64x2_t dhi = vsubq_f64(vcvt_high_f64_f32(av), vcvt_high_f64_f32(bv));
        acc1 = vfmaq_f64(acc1, dhi, dhi);
    }
    double sq = vaddvq_f64(acc0) + vaddvq_f64(acc1);
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

}  // namespace dili::retrieval::kernels::neon

#endif  // aarch64
