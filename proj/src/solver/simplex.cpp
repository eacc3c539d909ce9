#include "simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include "ltr/kernels/kernels.hpp"

namespace ltr::milp::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kReducedCostTolerance = 1e-9;
constexpr std::size_t kRefreshInterval = 100;

// Dictionary form: every basic variable is written as a linear combination of
// the nonbasic ones, x_basic[i] = sum_j T[i][j] * x_nonbasic[j]. Variables
// 0..n-1 are structural columns, n..n+m-1 are row activities.
class Dictionary {
public:
    Dictionary(const LpProblem& problem, const LpOptions& options)
        : problem_(problem), options_(options), m_(problem.rows.size()), n_(problem.cols()) {
        table_.assign(m_ * n_, 0.0);
        lo_.resize(n_ + m_);
        hi_.resize(n_ + m_);
        x_.resize(n_ + m_);
        basic_.resize(m_);
        nonbasic_.resize(n_);
        for (std::size_t j = 0; j < n_; ++j) {
            lo_[j] = problem.col_lo[j];
            hi_[j] = problem.col_hi[j];
            nonbasic_[j] = j;
            // Start each column at the bound closest to zero.
            x_[j] = std::abs(lo_[j]) <= std::abs(hi_[j]) ? lo_[j] : hi_[j];
        }
        for (std::size_t i = 0; i < m_; ++i) {
            const LpRow& row = problem.rows[i];
            for (std::size_t e = 0; e < row.cols.size(); ++e) {
                table_[i * n_ + row.cols[e]] += row.coeffs[e];
            }
            lo_[n_ + i] = row.lo;
            hi_[n_ + i] = row.hi;
            basic_[i] = n_ + i;
        }
        refresh_basics();
    }

    LpResult run() {
        LpResult result;
        const std::size_t cap =
            options_.max_iterations != 0 ? options_.max_iterations : 20 * (m_ + n_) + 1000;
        std::vector<double> reduced(n_);
        std::vector<double> grad(m_);
        std::size_t degenerate_streak = 0;
        bool certificate_retry = false;

        for (std::size_t iter = 0;; ++iter) {
            result.iterations = iter;
            if (iter >= cap) {
                result.status = LpStatus::IterationLimit;
                return result;
            }
            if (options_.deadline && iter % 64 == 0 && std::chrono::steady_clock::now() > *options_.deadline) {
                result.status = LpStatus::TimeLimit;
                return result;
            }
            if (iter > 0 && iter % kRefreshInterval == 0) {
                refresh_basics();
            }

            double infeasibility = 0.0;
            double worst = 0.0;  // largest violation relative to the residual tolerance
            bool any = false;
            for (std::size_t i = 0; i < m_; ++i) {
                const std::size_t k = basic_[i];
                const double tol = options_.primal_tolerance * (1.0 + std::abs(x_[k]));
                const double rtol = options_.residual_tolerance * (1.0 + std::abs(x_[k]));
                if (x_[k] < lo_[k] - tol) {
                    grad[i] = -1.0;
                    infeasibility += lo_[k] - x_[k];
                    worst = std::max(worst, (lo_[k] - x_[k]) / rtol);
                    any = true;
                } else if (x_[k] > hi_[k] + tol) {
                    grad[i] = 1.0;
                    infeasibility += x_[k] - hi_[k];
                    worst = std::max(worst, (x_[k] - hi_[k]) / rtol);
                    any = true;
                } else {
                    grad[i] = 0.0;
                }
            }
            result.infeasibility = infeasibility;
            if (!any) {
                return finish_feasible(result);
            }

            std::fill(reduced.begin(), reduced.end(), 0.0);
            for (std::size_t i = 0; i < m_; ++i) {
                if (grad[i] != 0.0) {
                    kernels::axpy(grad[i], row(i), reduced);
                }
            }

            const bool bland = degenerate_streak >= options_.degenerate_before_bland;
            std::size_t entering = n_;
            double best_score = 0.0;
            for (std::size_t j = 0; j < n_; ++j) {
                const std::size_t k = nonbasic_[j];
                if (hi_[k] - lo_[k] <= 0.0) {
                    continue;
                }
                double score = 0.0;
                if (x_[k] <= lo_[k] && reduced[j] < -kReducedCostTolerance) {
                    score = -reduced[j];
                } else if (x_[k] >= hi_[k] && reduced[j] > kReducedCostTolerance) {
                    score = reduced[j];
                } else {
                    continue;
                }
                if (bland) {
                    if (entering == n_ || k < nonbasic_[entering]) {
                        entering = j;
                    }
                } else if (score > best_score) {
                    best_score = score;
                    entering = j;
                }
            }

            if (entering == n_) {
                if (certificate_holds(grad, reduced)) {
                    result.status = LpStatus::Infeasible;
                    return result;
                }
                if (certificate_retry) {
                    // Stalled on violations below the residual tolerance: the
                    // substitution check in finish_feasible has the last word.
                    if (worst <= 1.0) {
                        return finish_feasible(result);
                    }
                    result.status = LpStatus::NumericalFailure;
                    return result;
                }
                certificate_retry = true;
                refresh_basics();
                continue;
            }
            certificate_retry = false;

            const std::size_t q = entering;
            const std::size_t qvar = nonbasic_[q];
            const double dir = x_[qvar] <= lo_[qvar] ? 1.0 : -1.0;

            double step = hi_[qvar] - lo_[qvar];
            std::size_t leave = m_;
            double leave_bound = 0.0;
            double leave_rate = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                const double rate = dir * table_[i * n_ + q];
                if (std::abs(rate) <= options_.pivot_tolerance) {
                    continue;
                }
                const std::size_t k = basic_[i];
                const double v = x_[k];
                const double tol = options_.primal_tolerance * (1.0 + std::abs(v));
                double limit = kInf;
                double target = 0.0;
                if (rate > 0.0) {
                    if (v < lo_[k] - tol) {
                        limit = (lo_[k] - v) / rate;
                        target = lo_[k];
                    } else if (v <= hi_[k] + tol && hi_[k] < kInf) {
                        limit = std::max(0.0, (hi_[k] - v) / rate);
                        target = hi_[k];
                    }
                } else {
                    if (v > hi_[k] + tol) {
                        limit = (hi_[k] - v) / rate;
                        target = hi_[k];
                    } else if (v >= lo_[k] - tol && lo_[k] > -kInf) {
                        limit = std::max(0.0, (lo_[k] - v) / rate);
                        target = lo_[k];
                    }
                }
                if (limit == kInf) {
                    continue;
                }
                bool take = false;
                if (limit < step - 1e-12) {
                    take = true;
                } else if (leave != m_ && limit <= step + 1e-12) {
                    take = bland ? basic_[i] < basic_[leave] : std::abs(rate) > std::abs(leave_rate);
                } else if (leave == m_ && limit < step) {
                    take = true;
                }
                if (take) {
                    step = std::min(step, limit);
                    leave = i;
                    leave_bound = target;
                    leave_rate = rate;
                }
            }

            if (step == kInf) {
                // Unbounded ray cannot occur with finite column bounds.
                result.status = LpStatus::NumericalFailure;
                return result;
            }
            degenerate_streak = step <= 1e-12 ? degenerate_streak + 1 : 0;

            // Move along the ray.
            x_[qvar] += dir * step;
            if (step > 0.0) {
                for (std::size_t i = 0; i < m_; ++i) {
                    const double a = table_[i * n_ + q];
                    if (a != 0.0) {
                        x_[basic_[i]] += dir * a * step;
                    }
                }
            }
            if (leave == m_) {
                // Bound flip of the entering column.
                x_[qvar] = dir > 0.0 ? hi_[qvar] : lo_[qvar];
                continue;
            }
            const std::size_t lvar = basic_[leave];
            x_[lvar] = leave_bound;
            pivot(leave, q);
        }
    }

private:
    std::span<double> row(std::size_t i) { return {table_.data() + i * n_, n_}; }

    void refresh_basics() {
        std::vector<double> xn(n_);
        for (std::size_t j = 0; j < n_; ++j) {
            xn[j] = x_[nonbasic_[j]];
        }
        for (std::size_t i = 0; i < m_; ++i) {
            x_[basic_[i]] = kernels::dot(row(i), xn);
        }
    }

    void pivot(std::size_t p, std::size_t q) {
        auto prow = row(p);
        const double inv = 1.0 / prow[q];
        for (double& v : prow) {
            v *= -inv;
        }
        prow[q] = inv;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == p) {
                continue;
            }
            auto r = row(i);
            const double f = r[q];
            if (f == 0.0) {
                continue;
            }
            r[q] = 0.0;
            kernels::axpy(f, prow, r);
        }
        std::swap(basic_[p], nonbasic_[q]);
    }

    // Farkas check against the original rows: the multipliers implied by the
    // phase-1 optimum must separate the column box from the row bounds.
    bool certificate_holds(const std::vector<double>& grad, const std::vector<double>& reduced) const {
        std::vector<double> y(m_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            if (basic_[i] >= n_) {
                y[basic_[i] - n_] = -grad[i];
            }
        }
        for (std::size_t j = 0; j < n_; ++j) {
            // Priced-out noise of the wrong sign would pair with an infinite bound.
            if (nonbasic_[j] >= n_ && std::abs(reduced[j]) > kReducedCostTolerance) {
                y[nonbasic_[j] - n_] = reduced[j];
            }
        }
        std::vector<double> c(n_, 0.0);
        double scale = 0.0;
        double s_lo = 0.0;
        double s_hi = 0.0;
        for (std::size_t r = 0; r < m_; ++r) {
            if (y[r] == 0.0) {
                continue;
            }
            const LpRow& row = problem_.rows[r];
            for (std::size_t e = 0; e < row.cols.size(); ++e) {
                c[row.cols[e]] += y[r] * row.coeffs[e];
            }
            const double a = y[r] > 0.0 ? row.lo : row.hi;
            const double b = y[r] > 0.0 ? row.hi : row.lo;
            s_lo += y[r] * a;
            s_hi += y[r] * b;
            scale += std::abs(y[r]) * std::max(std::abs(row.lo) < kInf ? std::abs(row.lo) : 0.0,
                                               std::abs(row.hi) < kInf ? std::abs(row.hi) : 0.0);
        }
        double c_lo = 0.0;
        double c_hi = 0.0;
        for (std::size_t j = 0; j < n_; ++j) {
            if (c[j] == 0.0) {
                continue;
            }
            const double a = c[j] * problem_.col_lo[j];
            const double b = c[j] * problem_.col_hi[j];
            c_lo += std::min(a, b);
            c_hi += std::max(a, b);
            scale += std::abs(c[j]) * std::max(std::abs(problem_.col_lo[j]), std::abs(problem_.col_hi[j]));
        }
        // Every feasible point satisfies c.x == y.s.
        const double margin = 1e-9 * (1.0 + scale);
        return c_lo - s_hi > margin || s_lo - c_hi > margin;
    }

    LpResult& finish_feasible(LpResult& result) {
        refresh_basics();
        result.x.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
        for (std::size_t j = 0; j < n_; ++j) {
            result.x[j] = std::clamp(result.x[j], problem_.col_lo[j], problem_.col_hi[j]);
        }
        for (const LpRow& row : problem_.rows) {
            double activity = 0.0;
            double magnitude = 0.0;
            for (std::size_t e = 0; e < row.cols.size(); ++e) {
                activity += row.coeffs[e] * result.x[row.cols[e]];
                magnitude = std::max(magnitude, std::abs(row.coeffs[e] * result.x[row.cols[e]]));
            }
            const double tol = options_.residual_tolerance * (1.0 + magnitude);
            if (activity < row.lo - tol || activity > row.hi + tol) {
                result.status = LpStatus::NumericalFailure;
                return result;
            }
        }
        result.status = LpStatus::Feasible;
        return result;
    }

    const LpProblem& problem_;
    const LpOptions& options_;
    std::size_t m_;
    std::size_t n_;
    std::vector<double> table_;
    std::vector<double> lo_;
    std::vector<double> hi_;
    std::vector<double> x_;
    std::vector<std::size_t> basic_;
    std::vector<std::size_t> nonbasic_;
};

}  // namespace

LpResult solve_feasibility(const LpProblem& problem, const LpOptions& options) {
    for (std::size_t j = 0; j < problem.cols(); ++j) {
        if (!(problem.col_lo[j] <= problem.col_hi[j]) || !std::isfinite(problem.col_lo[j]) ||
            !std::isfinite(problem.col_hi[j])) {
            return {LpStatus::Infeasible, {}, 0, 0.0};
        }
    }
    for (const LpRow& row : problem.rows) {
        if (row.lo > row.hi) {
            return {LpStatus::Infeasible, {}, 0, 0.0};
        }
    }
    if (problem.rows.empty()) {
        LpResult r;
        r.status = LpStatus::Feasible;
        r.x.resize(problem.cols());
        for (std::size_t j = 0; j < problem.cols(); ++j) {
            r.x[j] = std::abs(problem.col_lo[j]) <= std::abs(problem.col_hi[j]) ? problem.col_lo[j] : problem.col_hi[j];
        }
        return r;
    }
    if (problem.rows.size() * std::max<std::size_t>(problem.cols(), 1) > options.max_dense_entries) {
        return {LpStatus::TooLarge, {}, 0, 0.0};
    }
    Dictionary dict(problem, options);
    return dict.run();
}

}  // namespace ltr::milp::detail
