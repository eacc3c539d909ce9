#pragma once

// Arithmetic inner loops shared by forward inference, interval bound
// propagation and the simplex dictionary updates.
//
// Every kernel has a scalar reference implementation (namespace scalar) and,
// on x86-64, an AVX2+FMA variant (namespace avx2). The public entry points
// dispatch at runtime to the best variant the CPU supports. Variants agree up
// to floating-point reassociation; the kernel tests pin the tolerance.

#include <span>
#include <string_view>

namespace ltr::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa) noexcept;

/// Best instruction set supported by this CPU and build.
Isa detected_isa() noexcept;

/// The variant the dispatching entry points currently use.
Isa active_isa() noexcept;

/// Overrides dispatch (tests, reproducibility runs). Throws DomainError if the
/// requested variant is not available on this CPU.
void force_isa(Isa isa);

/// Restores dispatch to detected_isa().
void reset_isa() noexcept;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

double dot(std::span<const double> a, std::span<const double> b);

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// v[i] = max(0, v[i])
void relu_inplace(std::span<double> v);

/// Largest element; the span must be non-empty.
double max_value(std::span<const double> v);

/// Range of sum_i w[i] * x[i] over the box x[i] in [lo[i], hi[i]].
Interval interval_dot(std::span<const double> w, std::span<const double> lo, std::span<const double> hi);

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void relu_inplace(std::span<double> v);
double max_value(std::span<const double> v);
Interval interval_dot(std::span<const double> w, std::span<const double> lo, std::span<const double> hi);
}  // namespace scalar

#if defined(LTR_HAVE_AVX2)
namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void relu_inplace(std::span<double> v);
double max_value(std::span<const double> v);
Interval interval_dot(std::span<const double> w, std::span<const double> lo, std::span<const double> hi);
}  // namespace avx2
#endif

}  // namespace ltr::kernels
