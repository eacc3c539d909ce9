#pragma once

// Independent reference implementations used only by the tests.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "ltr/milp/model.hpp"

namespace oracle {

/// a . x <= b
struct Halfspace {
    std::vector<double> a;
    double b = 0.0;
};

/// Fourier-Motzkin feasibility of a small system; `tol` absorbs rounding.
bool fourier_motzkin_feasible(std::vector<Halfspace> system, std::size_t dims, double tol = 1e-9);

/// Decides a MILP by enumerating every binary assignment and running
/// Fourier-Motzkin on the remaining continuous system. Practical only for a
/// handful of continuous variables.
bool milp_feasible_by_enumeration(const ltr::milp::MilpModel& model);

/// Random model with `binaries` binaries, `continuous` variables in [-5, 5]
/// and `rows` constraints around a random anchor point.
ltr::milp::MilpModel random_milp(std::mt19937_64& rng, std::size_t binaries, std::size_t continuous, std::size_t rows);

}  // namespace oracle

#include "ltr/network/network.hpp"

namespace oracle {

/// conv (kernels x k x k, pool x pool) -> ReLU FC(hidden) -> argmax FC(classes).
ltr::Network random_cnn(std::mt19937_64& rng, std::size_t side, std::size_t kernels, std::size_t k,
                        std::size_t pool, std::size_t hidden, std::size_t classes);

/// The acceptance-harness shape: 6x6x1, 2 kernels 3x3, 2x2 pool, FC 8, 3 classes.
ltr::Network random_tiny_cnn(std::mt19937_64& rng);

/// Pixels uniform in [0, 1] with a few exact zeros, p_max = 1.
ltr::Image random_image(std::mt19937_64& rng, std::size_t h, std::size_t w, std::size_t c);

/// Straight-loop inference written independently of the library's kernels.
std::vector<double> naive_logits(const ltr::Network& net, const ltr::Tensor3& input);

}  // namespace oracle
