#include <algorithm>
#include <cassert>

#include "ltr/kernels/kernels.hpp"

namespace ltr::kernels::scalar {

double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sum += a[i] * b[i];
    }
    return sum;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] += alpha * x[i];
    }
}

void relu_inplace(std::span<double> v) {
    for (double& x : v) {
        x = x > 0.0 ? x : 0.0;
    }
}

double max_value(std::span<const double> v) {
    assert(!v.empty());
    double best = v[0];
    for (std::size_t i = 1; i < v.size(); ++i) {
        best = v[i] > best ? v[i] : best;
    }
    return best;
}

Interval interval_dot(std::span<const double> w, std::span<const double> lo, std::span<const double> hi) {
    assert(w.size() == lo.size() && w.size() == hi.size());
    Interval out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double a = w[i] * lo[i];
        const double b = w[i] * hi[i];
        out.lo += std::min(a, b);
        out.hi += std::max(a, b);
    }
    return out;
}

}  // namespace ltr::kernels::scalar
