#pragma once

#include <functional>
#include <vector>

#include "selrisk/types.hpp"

namespace selrisk {

/// Location-indexed p-value family p(x; c): for each location c, p(.; c)
/// is a valid p-value for the shifted null "theta >= c".
///
/// The declared monotonicity flags (checkable with
/// validate_monotone_flags) and the MLR declaration drive how the inner
/// supremum of the improved level curve is evaluated: at the boundary
/// statistics for MLR families, by dense grid search otherwise.
struct PValueFunction {
    std::function<double(double x, double c)> eval;
    bool increasing_in_x = true;
    bool decreasing_in_c = true;

    /// Analytic tag: p(x; c) = Phi(x - c).
    bool gaussian_shift = false;

    /// Monotone likelihood ratio family: the supremum of
    /// p(x; c)/p(x; c') over an x-interval sits at an endpoint.
    bool mlr = true;

    /// Statistic search range and resolution for non-MLR families.
    double x_search_lo = -10.0;
    double x_search_hi = 10.0;
    std::size_t x_search_points = 4096;
};

/// The Gaussian shift family Phi(x - c).
PValueFunction gaussian_shift_family();

/// Verify the declared monotonicity flags on a grid of (x, c) pairs.
bool validate_monotone_flags(const PValueFunction& pf, const std::vector<double>& xs,
                             const std::vector<double>& cs);

/// A location with its target level q(c) in (0, 1].
struct CurveAnchor {
    double location;
    double level;
};

/// Target level curve: finitely many anchors (the constraints that drive
/// rejections) plus a sorted evaluation grid used for reporting.  Anchor
/// locations are merged into the grid at construction.
class FdrCurve {
public:
    FdrCurve(std::vector<CurveAnchor> anchors, std::vector<double> grid);

    const std::vector<CurveAnchor>& anchors() const { return anchors_; }
    const std::vector<double>& grid() const { return grid_; }

private:
    std::vector<CurveAnchor> anchors_;
    std::vector<double> grid_;
};

/// Adjusted supremum p-value sup over the anchors of p(x; c')/q(c').
/// May exceed 1.
double p_sup(double x, const PValueFunction& pf, const FdrCurve& curve);

/// Modified step-up procedure: iterate
/// S^{t+1} = { i in S^t : P_{i,sup} <= |S^t|/m } from the full set to its
/// fixed point.  Equals the step-up rule applied to P_{i,sup} at nominal
/// level 1.
SelectionMask run_fdr_curve(const ZScoreVector& x, const PValueFunction& pf,
                            const FdrCurve& curve);

/// Step-function level implied by the anchors alone:
/// q_step(c) = 1 ^ min{ q(c') : c' <= c }, taken as 1 below every anchor.
double anchor_step_level(const std::vector<CurveAnchor>& anchors, double c);

/// Improved level curve for the Gaussian shift family, evaluated on
/// `eval_grid`: the level the anchored procedure already attains at every
/// location, always below the anchor step function.
std::vector<double> improved_curve_gaussian(const std::vector<CurveAnchor>& anchors, TaskCount m,
                                            const std::vector<double>& eval_grid);

/// Improved level curve for a general p-value family.  For MLR families
/// the inner supremum is taken at the two statistics solving
/// p(x; c') = q(c')/m and p(x; c') = q(c') (bisection to 1e-12 in
/// p-space); otherwise a dense grid search over x is used.
std::vector<double> improved_curve_general(const PValueFunction& pf,
                                           const std::vector<CurveAnchor>& anchors, TaskCount m,
                                           const std::vector<double>& eval_grid);

/// Anchors for re-running the procedure at its own improved curve
/// (Gaussian family): the grid points whose improved level stays below 1.
/// Where the uncapped level reaches 1 the constraint is vacuous and must
/// not be enforced, or it would cut into the original rejection set.
std::vector<CurveAnchor> active_improved_anchors(const std::vector<CurveAnchor>& anchors,
                                                 TaskCount m, const std::vector<double>& grid);

}  // namespace selrisk
