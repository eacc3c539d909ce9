#include <atomic>
#include <string>

#include "ltr/core/errors.hpp"
#include "ltr/kernels/kernels.hpp"

namespace ltr::kernels {

namespace {

Isa probe() noexcept {
#if defined(LTR_HAVE_AVX2)
    __builtin_cpu_init();
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
        return Isa::Avx2;
    }
#endif
    return Isa::Scalar;
}

std::atomic<Isa>& active() noexcept {
    static std::atomic<Isa> isa{detected_isa()};
    return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar:
            return "scalar";
        case Isa::Avx2:
            return "avx2";
    }
    return "unknown";
}

Isa detected_isa() noexcept {
    static const Isa isa = probe();
    return isa;
}

Isa active_isa() noexcept { return active().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
    if (isa == Isa::Avx2 && detected_isa() != Isa::Avx2) {
        throw DomainError("AVX2 kernels are not available on this CPU/build");
    }
    active().store(isa, std::memory_order_relaxed);
}

void reset_isa() noexcept { active().store(detected_isa(), std::memory_order_relaxed); }

#if defined(LTR_HAVE_AVX2)
#define LTR_DISPATCH(fn, ...)                    \
    if (active_isa() == Isa::Avx2) {             \
        return avx2::fn(__VA_ARGS__);            \
    }                                            \
    return scalar::fn(__VA_ARGS__)
#else
#define LTR_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

double dot(std::span<const double> a, std::span<const double> b) { LTR_DISPATCH(dot, a, b); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) { LTR_DISPATCH(axpy, alpha, x, y); }

void relu_inplace(std::span<double> v) { LTR_DISPATCH(relu_inplace, v); }

double max_value(std::span<const double> v) { LTR_DISPATCH(max_value, v); }

Interval interval_dot(std::span<const double> w, std::span<const double> lo, std::span<const double> hi) {
    LTR_DISPATCH(interval_dot, w, lo, hi);
}

#undef LTR_DISPATCH

}  // namespace ltr::kernels
