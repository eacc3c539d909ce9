#include "propagation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace ltr::milp::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTinyCoeff = 1e-12;
constexpr std::size_t kProbeRounds = 4;
constexpr std::size_t kOuterRounds = 30;

// A new bound must improve on the old one by this much to be recorded;
// keeps slowly converging row cycles from spinning.
double min_improvement(double lo, double hi) { return 1e-9 + 1e-6 * (hi - lo); }

// Slack added to every derived bound to absorb rounding in the activity sums.
double derived_slack(double magnitude, double coeff, double bound) {
    return 1e-12 * magnitude / std::abs(coeff) + 1e-10 * (1.0 + std::abs(bound));
}

template <class OnChange>
bool tighten_row(const CompiledRow& row, std::span<double> lo, std::span<double> hi, std::span<const char> binary,
                 double int_tol, OnChange&& on_change) {
    double min_act = 0.0;
    double max_act = 0.0;
    double magnitude = 0.0;
    for (std::size_t e = 0; e < row.cols.size(); ++e) {
        const double a = row.coeffs[e];
        const auto k = row.cols[e];
        const double p = a * lo[k];
        const double q = a * hi[k];
        min_act += std::min(p, q);
        max_act += std::max(p, q);
        magnitude += std::max(std::abs(p), std::abs(q));
    }
    if (row.hi < kInf) {
        magnitude += std::abs(row.hi);
    }
    if (row.lo > -kInf) {
        magnitude += std::abs(row.lo);
    }
    const double row_tol = 1e-9 * (1.0 + magnitude);
    if (min_act > row.hi + row_tol || max_act < row.lo - row_tol) {
        return false;
    }
    // Nothing to derive when the row cannot become binding.
    if (min_act >= row.lo && max_act <= row.hi) {
        return true;
    }

    for (std::size_t e = 0; e < row.cols.size(); ++e) {
        const double a = row.coeffs[e];
        if (std::abs(a) < kTinyCoeff) {
            continue;
        }
        const auto k = row.cols[e];
        const double p = a * lo[k];
        const double q = a * hi[k];
        double new_lo = -kInf;
        double new_hi = kInf;
        if (row.hi < kInf) {
            const double rest = min_act - std::min(p, q);
            const double b = (row.hi - rest) / a;
            if (a > 0) {
                new_hi = b + derived_slack(magnitude, a, b);
            } else {
                new_lo = b - derived_slack(magnitude, a, b);
            }
        }
        if (row.lo > -kInf) {
            const double rest = max_act - std::max(p, q);
            const double b = (row.lo - rest) / a;
            if (a > 0) {
                new_lo = std::max(new_lo, b - derived_slack(magnitude, a, b));
            } else {
                new_hi = std::min(new_hi, b + derived_slack(magnitude, a, b));
            }
        }
        if (binary[k]) {
            if (new_lo > -kInf) {
                new_lo = std::ceil(new_lo - int_tol);
            }
            if (new_hi < kInf) {
                new_hi = std::floor(new_hi + int_tol);
            }
        }
        const double width = hi[k] - lo[k];
        bool changed = false;
        if (new_lo > lo[k] + min_improvement(lo[k], hi[k]) || (binary[k] && new_lo > lo[k])) {
            lo[k] = new_lo;
            changed = true;
        }
        if (new_hi < hi[k] - min_improvement(lo[k], hi[k]) || (binary[k] && new_hi < hi[k])) {
            hi[k] = new_hi;
            changed = true;
        }
        if (lo[k] > hi[k]) {
            const double gap = lo[k] - hi[k];
            if (binary[k] || gap > 1e-9 * (1.0 + std::abs(hi[k]) + width)) {
                return false;
            }
            const double mid = 0.5 * (lo[k] + hi[k]);
            lo[k] = mid;
            hi[k] = mid;
        }
        if (changed) {
            on_change(k);
            // Activities are stale now; recompute lazily on the next visit.
            min_act = 0.0;
            max_act = 0.0;
            for (std::size_t f = 0; f < row.cols.size(); ++f) {
                const double c = row.coeffs[f];
                const double pp = c * lo[row.cols[f]];
                const double qq = c * hi[row.cols[f]];
                min_act += std::min(pp, qq);
                max_act += std::max(pp, qq);
            }
            if (min_act > row.hi + row_tol || max_act < row.lo - row_tol) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace

CompiledModel CompiledModel::compile(const MilpModel& model, std::size_t group_bits) {
    CompiledModel cm;
    cm.n = model.variable_count();
    cm.lo.resize(cm.n);
    cm.hi.resize(cm.n);
    cm.binary.resize(cm.n);
    cm.priority.resize(cm.n);
    cm.col_rows.resize(cm.n);
    cm.var_groups.resize(cm.n);
    for (std::size_t k = 0; k < cm.n; ++k) {
        const Variable& v = model.variables()[k];
        cm.lo[k] = v.lo;
        cm.hi[k] = v.hi;
        cm.binary[k] = v.kind == VarKind::Binary ? 1 : 0;
        cm.priority[k] = v.branch_priority;
    }
    std::map<std::vector<std::uint32_t>, std::vector<std::uint32_t>> by_support;
    for (const Constraint& c : model.constraints()) {
        CompiledRow row;
        for (const Term& t : c.expr.terms()) {
            row.cols.push_back(t.var.index);
            row.coeffs.push_back(t.coeff);
        }
        row.lo = c.sense == Sense::LessEqual ? -kInf : c.rhs;
        row.hi = c.sense == Sense::GreaterEqual ? kInf : c.rhs;
        const auto r = static_cast<std::uint32_t>(cm.rows.size());
        std::vector<std::uint32_t> support;
        for (auto k : row.cols) {
            cm.col_rows[k].push_back(r);
            if (cm.binary[k]) {
                support.push_back(k);
            }
        }
        std::sort(support.begin(), support.end());
        if (!support.empty() && support.size() <= group_bits) {
            by_support[support].push_back(r);
        }
        cm.rows.push_back(std::move(row));
    }
    for (auto& [support, rows] : by_support) {
        ProbeGroup g;
        g.binaries = support;
        std::map<std::uint32_t, std::uint32_t> local;
        for (auto r : rows) {
            CompiledRow lr = cm.rows[r];
            for (auto& col : lr.cols) {
                auto [it, inserted] = local.emplace(col, static_cast<std::uint32_t>(g.vars.size()));
                if (inserted) {
                    g.vars.push_back(col);
                    g.local_binary.push_back(cm.binary[col]);
                }
                col = it->second;
            }
            g.rows.push_back(std::move(lr));
        }
        const auto gi = static_cast<std::uint32_t>(cm.groups.size());
        for (auto k : g.vars) {
            cm.var_groups[k].push_back(gi);
        }
        cm.groups.push_back(std::move(g));
    }
    return cm;
}

Propagator::Propagator(const CompiledModel& model, double integrality_tolerance)
    : model_(model),
      int_tol_(integrality_tolerance),
      queued_(model.rows.size(), 0),
      group_dirty_(model.groups.size(), 0) {}

void Propagator::mark_changed(std::uint32_t var) {
    for (auto r : model_.col_rows[var]) {
        if (!queued_[r]) {
            queued_[r] = 1;
            queue_.push_back(r);
        }
    }
    for (auto g : model_.var_groups[var]) {
        if (!group_dirty_[g]) {
            group_dirty_[g] = 1;
            dirty_list_.push_back(g);
        }
    }
}

bool Propagator::propagate_rows(std::vector<double>& lo, std::vector<double>& hi) {
    std::size_t budget = 60 * model_.rows.size() + 10000;
    std::size_t head = 0;
    bool ok = true;
    while (head < queue_.size()) {
        const auto r = queue_[head++];
        queued_[r] = 0;
        if (budget-- == 0) {
            break;
        }
        if (!tighten_row(model_.rows[r], lo, hi, model_.binary, int_tol_,
                         [this](std::uint32_t k) { mark_changed(k); })) {
            ok = false;
            break;
        }
        // Compact the queue once the consumed prefix dominates.
        if (head > 4096 && head * 2 > queue_.size()) {
            queue_.erase(queue_.begin(), queue_.begin() + static_cast<std::ptrdiff_t>(head));
            head = 0;
        }
    }
    for (std::size_t i = head; i < queue_.size(); ++i) {
        queued_[queue_[i]] = 0;
    }
    queue_.clear();
    return ok;
}

bool Propagator::probe(std::vector<double>& lo, std::vector<double>& hi) {
    std::vector<std::uint32_t> groups;
    groups.swap(dirty_list_);
    for (auto g : groups) {
        group_dirty_[g] = 0;
    }
    std::sort(groups.begin(), groups.end());

    std::vector<double> llo;
    std::vector<double> lhi;
    std::vector<double> hull_lo;
    std::vector<double> hull_hi;
    for (auto gi : groups) {
        const ProbeGroup& g = model_.groups[gi];
        std::vector<std::size_t> free_local;
        for (std::size_t l = 0; l < g.vars.size(); ++l) {
            const auto k = g.vars[l];
            if (model_.binary[k] && lo[k] < hi[k]) {
                free_local.push_back(l);
            }
        }
        if (free_local.empty()) {
            continue;
        }
        const std::size_t nl = g.vars.size();
        hull_lo.assign(nl, kInf);
        hull_hi.assign(nl, -kInf);
        bool any = false;
        for (std::size_t mask = 0; mask < (std::size_t{1} << free_local.size()); ++mask) {
            llo.resize(nl);
            lhi.resize(nl);
            for (std::size_t l = 0; l < nl; ++l) {
                llo[l] = lo[g.vars[l]];
                lhi[l] = hi[g.vars[l]];
            }
            for (std::size_t b = 0; b < free_local.size(); ++b) {
                const double v = (mask >> b) & 1U ? 1.0 : 0.0;
                llo[free_local[b]] = v;
                lhi[free_local[b]] = v;
            }
            bool feasible = true;
            for (std::size_t round = 0; round < kProbeRounds && feasible; ++round) {
                bool moved = false;
                for (const CompiledRow& row : g.rows) {
                    if (!tighten_row(row, llo, lhi, g.local_binary, int_tol_, [&](std::uint32_t) { moved = true; })) {
                        feasible = false;
                        break;
                    }
                }
                if (!moved) {
                    break;
                }
            }
            if (!feasible) {
                continue;
            }
            any = true;
            for (std::size_t l = 0; l < nl; ++l) {
                hull_lo[l] = std::min(hull_lo[l], llo[l]);
                hull_hi[l] = std::max(hull_hi[l], lhi[l]);
            }
        }
        if (!any) {
            return false;
        }
        for (std::size_t l = 0; l < nl; ++l) {
            const auto k = g.vars[l];
            bool changed = false;
            const double eps = model_.binary[k] ? 0.0 : min_improvement(lo[k], hi[k]);
            if (hull_lo[l] > lo[k] + eps) {
                lo[k] = hull_lo[l];
                changed = true;
            }
            if (hull_hi[l] < hi[k] - eps) {
                hi[k] = hull_hi[l];
                changed = true;
            }
            if (changed) {
                mark_changed(k);
            }
        }
    }
    return true;
}

bool Propagator::run(std::vector<double>& lo, std::vector<double>& hi, std::span<const std::uint32_t> changed,
                     bool everything) {
    if (everything) {
        for (std::uint32_t r = 0; r < model_.rows.size(); ++r) {
            if (!queued_[r]) {
                queued_[r] = 1;
                queue_.push_back(r);
            }
        }
        for (std::uint32_t g = 0; g < model_.groups.size(); ++g) {
            if (!group_dirty_[g]) {
                group_dirty_[g] = 1;
                dirty_list_.push_back(g);
            }
        }
    }
    for (auto k : changed) {
        mark_changed(k);
    }
    auto reset = [this] {
        for (auto g : dirty_list_) {
            group_dirty_[g] = 0;
        }
        dirty_list_.clear();
        for (auto r : queue_) {
            queued_[r] = 0;
        }
        queue_.clear();
    };
    for (std::size_t round = 0; round < kOuterRounds; ++round) {
        if (!propagate_rows(lo, hi)) {
            reset();
            return false;
        }
        if (dirty_list_.empty()) {
            break;
        }
        if (!probe(lo, hi)) {
            reset();
            return false;
        }
        if (queue_.empty() && dirty_list_.empty()) {
            break;
        }
    }
    reset();
    return true;
}

}  // namespace ltr::milp::detail
