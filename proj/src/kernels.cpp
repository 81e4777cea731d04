#include "dili/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace dili::retrieval::kernels {

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
    }
    return "?";
}

bool isa_available(Isa isa) {
    switch (isa) {
        case Isa::Scalar:
            return true;
        case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Isa::Neon:
#if defined(__aarch64__)
            return true;  // NEON is baseline on aarch64
#else
            return false;
#endif
    }
    return false;
}

namespace {

Isa detect_preferred() {
    if (const char* env = std::getenv("DILI_KERNEL_ISA")) {
        const std::string want = env;
        for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon})
            if (want == isa_name(isa) && isa_available(isa)) return isa;
        // Unknown or unavailable request falls through to auto-detection.
    }
    if (isa_available(Isa::Avx2)) return Isa::Avx2;
    if (isa_available(Isa::Neon)) return Isa::Neon;
    return Isa::Scalar;
}

std::atomic<Isa>& active_slot() {
    static std::atomic<Isa> active{detect_preferred()};
    return active;
}

}  // namespace

Isa preferred_isa() {
    static const Isa preferred = detect_preferred();
    return preferred;
}

Isa active_isa() { return active_slot().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
    if (!isa_available(isa))
        throw std::invalid_argument("kernel ISA '" + std::string(isa_name(isa)) +
                                    "' is not available on this machine");
    active_slot().store(isa, std::memory_order_relaxed);
}

double pair_pow_sum(const float* x, std::size_t mx, const float* y, std::size_t my,
                    std::size_t d, double p) {
    switch (active_isa()) {
#if defined(__x86_64__) || defined(_M_X64)
        case Isa::Avx2:
            return avx2::pair_pow_sum(x, mx, y, my, d, p);
#endif
#if defined(__aarch64__)
        case Isa::Neon:
            return neon::pair_pow_sum(x, mx, y, my, d, p);
#endif
        default:
            return scalar::pair_pow_sum(x, mx, y, my, d, p);
    }
}

}  // namespace dili::retrieval::kernels
