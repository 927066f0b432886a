#include "selrisk/fdr_curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "selrisk/normal.hpp"

namespace selrisk {

PValueFunction gaussian_shift_family() {
    PValueFunction pf;
    pf.eval = [](double x, double c) { return normal_cdf(x - c); };
    pf.increasing_in_x = true;
    pf.decreasing_in_c = true;
    pf.gaussian_shift = true;
    pf.mlr = true;
    return pf;
}

bool validate_monotone_flags(const PValueFunction& pf, const std::vector<double>& xs,
                             const std::vector<double>& cs) {
    for (double c : cs) {
        for (std::size_t i = 1; i < xs.size(); ++i) {
            const double lo = pf.eval(xs[i - 1], c);
            const double hi = pf.eval(xs[i], c);
            if (pf.increasing_in_x ? (hi < lo) : (hi > lo)) return false;
        }
    }
    for (double x : xs) {
        for (std::size_t i = 1; i < cs.size(); ++i) {
            const double lo = pf.eval(x, cs[i - 1]);
            const double hi = pf.eval(x, cs[i]);
            if (pf.decreasing_in_c ? (hi > lo) : (hi < lo)) return false;
        }
    }
    return true;
}

FdrCurve::FdrCurve(std::vector<CurveAnchor> anchors, std::vector<double> grid)
    : anchors_(std::move(anchors)), grid_(std::move(grid)) {
    if (anchors_.empty()) {
        throw std::invalid_argument("FdrCurve: at least one anchor required");
    }
    for (const auto& a : anchors_) {
        if (!std::isfinite(a.location)) {
            throw std::invalid_argument("FdrCurve: anchor location must be finite");
        }
        if (!(a.level > 0.0 && a.level <= 1.0)) {
            throw std::invalid_argument("FdrCurve: anchor level must lie in (0, 1]");
        }
    }
    for (std::size_t i = 1; i < grid_.size(); ++i) {
        if (!(grid_[i] > grid_[i - 1])) {
            throw std::invalid_argument("FdrCurve: grid must be sorted strictly increasing");
        }
    }
    // The anchor locations are part of the evaluation grid.
    for (const auto& a : anchors_) {
        auto it = std::lower_bound(grid_.begin(), grid_.end(), a.location);
        if (it == grid_.end() || *it != a.location) {
            grid_.insert(it, a.location);
        }
    }
}

double p_sup(double x, const PValueFunction& pf, const FdrCurve& curve) {
    double sup = 0.0;
    for (const auto& a : curve.anchors()) {
        sup = std::max(sup, pf.eval(x, a.location) / a.level);
    }
    return sup;
}

SelectionMask run_fdr_curve(const ZScoreVector& x, const PValueFunction& pf,
                            const FdrCurve& curve) {
    const std::size_t m = x.size();
    if (m == 0) {
        throw std::invalid_argument("run_fdr_curve: empty statistic vector");
    }
    std::vector<double> psup(m);
    for (std::size_t i = 0; i < m; ++i) psup[i] = p_sup(x[i], pf, curve);

    SelectionMask current = SelectionMask::full(m);
    for (;;) {
        const double threshold = static_cast<double>(current.count()) / static_cast<double>(m);
        SelectionMask next = SelectionMask::where(
            m, [&](std::size_t i) { return current[i] && psup[i] <= threshold; });
        if (next == current || next.empty()) return next;
        current = next;
    }
}

double anchor_step_level(const std::vector<CurveAnchor>& anchors, double c) {
    double level = 1.0;
    for (const auto& a : anchors) {
        if (c >= a.location) level = std::min(level, a.level);
    }
    return level;
}

namespace {

// Candidate level contributed by one anchor at location offset dc = c - c',
// Gaussian shift family: the ratio supremum over
// { x : q/m <= Phi(x - c') <= q } sits at the interval endpoints.
double gaussian_anchor_candidate(double q, double m, double dc) {
    if (dc == 0.0) return q;  // both endpoint ratios are exactly 1
    const double lo_level = q / m;
    if (!(lo_level > 0.0)) {
        throw std::domain_error("improved_curve_gaussian: q(c')/m underflows the quantile domain");
    }
    // q(c') = 1 pins the upper endpoint at +inf where the ratio tends to 1.
    const double hi = (q >= 1.0) ? 1.0 : normal_cdf(normal_quantile(q) - dc);
    const double lo = m * normal_cdf(normal_quantile(lo_level) - dc);
    return std::max(hi, lo);
}

}  // namespace

std::vector<double> improved_curve_gaussian(const std::vector<CurveAnchor>& anchors, TaskCount m,
                                            const std::vector<double>& eval_grid) {
    if (anchors.empty()) {
        throw std::invalid_argument("improved_curve_gaussian: at least one anchor required");
    }
    for (const auto& a : anchors) {
        if (!(a.level > 0.0 && a.level <= 1.0)) {
            throw std::invalid_argument("improved_curve_gaussian: anchor level outside (0, 1]");
        }
    }
    const double md = static_cast<double>(m.value());
    std::vector<double> out;
    out.reserve(eval_grid.size());
    for (double c : eval_grid) {
        double best = 1.0;
        for (const auto& a : anchors) {
            best = std::min(best, gaussian_anchor_candidate(a.level, md, c - a.location));
        }
        out.push_back(best);
    }
    return out;
}

namespace {

// Solve p(x; c') = target for x by bisection, expanding the initial
// bracket outward when needed.  Tolerance is 1e-12 in p-space.
double invert_pvalue(const PValueFunction& pf, double cprime, double target, double lo,
                     double hi) {
    const bool inc = pf.increasing_in_x;
    auto value = [&](double x) { return inc ? pf.eval(x, cprime) : -pf.eval(x, cprime); };
    const double goal = inc ? target : -target;

    double width = hi - lo;
    int expansions = 0;
    while (value(lo) > goal && expansions < 200) {
        lo -= width;
        width *= 2.0;
        ++expansions;
    }
    width = hi - lo;
    while (value(hi) < goal && expansions < 200) {
        hi += width;
        width *= 2.0;
        ++expansions;
    }
    if (value(lo) > goal || value(hi) < goal) {
        throw std::runtime_error("improved_curve_general: cannot bracket p(x; c') = " +
                                 std::to_string(target));
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double v = value(mid);
        if (std::fabs(v - goal) <= 1e-12) return mid;
        (v < goal ? lo : hi) = mid;
        if (hi - lo <= 1e-15 * std::max(1.0, std::fabs(mid))) return mid;
    }
    return 0.5 * (lo + hi);
}

double general_anchor_candidate(const PValueFunction& pf, const CurveAnchor& a, double md,
                                double c) {
    const double q = a.level;
    const double cprime = a.location;
    if (c == cprime) return q;
    const double lo_target = q / md;
    if (!(lo_target > 0.0)) {
        throw std::domain_error("improved_curve_general: q(c')/m underflows");
    }

    const double x_lo = invert_pvalue(pf, cprime, lo_target, pf.x_search_lo, pf.x_search_hi);
    const double ratio_lo = pf.eval(x_lo, c) / pf.eval(x_lo, cprime);
    double ratio_hi;
    if (q >= 1.0) {
        ratio_hi = 1.0;  // upper endpoint at the p <= 1 limit
    } else {
        const double x_hi = invert_pvalue(pf, cprime, q, pf.x_search_lo, pf.x_search_hi);
        ratio_hi = pf.eval(x_hi, c) / pf.eval(x_hi, cprime);
    }
    double best = q * std::max(ratio_lo, ratio_hi);
    if (pf.mlr) return best;

    // No boundary guarantee: the interior can beat the endpoints, so add a
    // dense grid search over the declared x-range.
    const std::size_t n = std::max<std::size_t>(pf.x_search_points, 2);
    const double step = (pf.x_search_hi - pf.x_search_lo) / static_cast<double>(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = pf.x_search_lo + static_cast<double>(j) * step;
        const double denom = pf.eval(x, cprime);
        if (denom < lo_target || denom > q) continue;
        best = std::max(best, q * pf.eval(x, c) / denom);
    }
    return best;
}

}  // namespace

std::vector<CurveAnchor> active_improved_anchors(const std::vector<CurveAnchor>& anchors,
                                                 TaskCount m, const std::vector<double>& grid) {
    const std::vector<double> q_star = improved_curve_gaussian(anchors, m, grid);
    std::vector<CurveAnchor> active;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        if (q_star[g] < 1.0) active.push_back(CurveAnchor{grid[g], q_star[g]});
    }
    if (active.empty()) {
        throw std::invalid_argument("active_improved_anchors: no grid point has level below 1");
    }
    return active;
}

std::vector<double> improved_curve_general(const PValueFunction& pf,
                                           const std::vector<CurveAnchor>& anchors, TaskCount m,
                                           const std::vector<double>& eval_grid) {
    if (anchors.empty()) {
        throw std::invalid_argument("improved_curve_general: at least one anchor required");
    }
    const double md = static_cast<double>(m.value());
    std::vector<double> out;
    out.reserve(eval_grid.size());
    for (double c : eval_grid) {
        double best = 1.0;
        for (const auto& a : anchors) {
            best = std::min(best, general_anchor_candidate(pf, a, md, c));
        }
        out.push_back(best);
    }
    return out;
}

}  // namespace selrisk
