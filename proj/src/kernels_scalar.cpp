#include <vector>

#include "dili/kernels.hpp"

namespace dili::retrieval::kernels::scalar {

double pair_pow_sum(const float* x, std::size_t mx, const float* y, std::size_t my,
                    std::size_t d, double p) {
    std::vector<double> row_sums(mx, 0.0);
    for (std::size_t i = 0; i < mx; ++i) {
        const float* xi = x + i * d;
        double acc = 0.0;
        for (std::size_t j = 0; j < my; ++j) {
            const float* yj = y + j * d;
            double sq = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = static_cast<double>(xi[k]) - static_cast<double>(yj[k]);
                sq += diff * diff;
            }
            acc += detail::pow_from_squared(sq, p);
        }
        row_sums[i] = acc;
    }
    return detail::pairwise_sum(row_sums.data(), row_sums.size());
}

}  // namespace dili::retrieval::kernels::scalar
