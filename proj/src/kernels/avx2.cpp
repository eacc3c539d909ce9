// Compiled with -mavx2 -mfma; only called after runtime detection.
#include <immintrin.h>

#include <algorithm>
#include <cassert>

#include "ltr/kernels/kernels.hpp"

namespace ltr::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double hmax(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d m = _mm_max_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_max_sd(m, _mm_unpackhi_pd(m, m)));
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    const std::size_t n = a.size();
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(&a[i]), _mm256_loadu_pd(&b[i]), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(&a[i + 4]), _mm256_loadu_pd(&b[i + 4]), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(&a[i]), _mm256_loadu_pd(&b[i]), acc0);
    }
    double sum = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        sum += a[i] * b[i];
    }
    return sum;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    const std::size_t n = x.size();
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d r = _mm256_fmadd_pd(va, _mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i]));
        _mm256_storeu_pd(&y[i], r);
    }
    for (; i < n; ++i) {
        y[i] += alpha * x[i];
    }
}

void relu_inplace(std::span<double> v) {
    const std::size_t n = v.size();
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(&v[i], _mm256_max_pd(_mm256_loadu_pd(&v[i]), zero));
    }
    for (; i < n; ++i) {
        v[i] = v[i] > 0.0 ? v[i] : 0.0;
    }
}

double max_value(std::span<const double> v) {
    assert(!v.empty());
    const std::size_t n = v.size();
    std::size_t i = 0;
    double best = v[0];
    if (n >= 4) {
        __m256d acc = _mm256_loadu_pd(&v[0]);
        for (i = 4; i + 4 <= n; i += 4) {
            acc = _mm256_max_pd(acc, _mm256_loadu_pd(&v[i]));
        }
        best = hmax(acc);
    }
    for (; i < n; ++i) {
        best = v[i] > best ? v[i] : best;
    }
    return best;
}

Interval interval_dot(std::span<const double> w, std::span<const double> lo, std::span<const double> hi) {
    assert(w.size() == lo.size() && w.size() == hi.size());
    const std::size_t n = w.size();
    __m256d acc_lo = _mm256_setzero_pd();
    __m256d acc_hi = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vw = _mm256_loadu_pd(&w[i]);
        const __m256d a = _mm256_mul_pd(vw, _mm256_loadu_pd(&lo[i]));
        const __m256d b = _mm256_mul_pd(vw, _mm256_loadu_pd(&hi[i]));
        acc_lo = _mm256_add_pd(acc_lo, _mm256_min_pd(a, b));
        acc_hi = _mm256_add_pd(acc_hi, _mm256_max_pd(a, b));
    }
    Interval out{hsum(acc_lo), hsum(acc_hi)};
    for (; i < n; ++i) {
        const double a = w[i] * lo[i];
        const double b = w[i] * hi[i];
        out.lo += std::min(a, b);
        out.hi += std::max(a, b);
    }
    return out;
}

}  // namespace ltr::kernels::avx2
