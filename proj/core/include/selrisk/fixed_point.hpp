#pragma once

#include <cstddef>
#include <vector>

#include "selrisk/types.hpp"

namespace selrisk {

/// One recorded step of the confidence-interval iteration: the set the
/// bounds were computed on and the bound for each selected task (aligned
/// with selected.indices()).
struct ByIterationStep {
    SelectionMask selected;
    std::vector<double> upper_bounds;
};

/// Full record of the iterated confidence-step procedure.  steps[t-1]
/// holds iteration t; the terminal index T equals steps.size().  The
/// selected sets shrink strictly until the final step, whose recomputed
/// bounds confirm the fixed point (or the mask reached empty).
struct ByIterationTrace {
    std::vector<ByIterationStep> steps;

    std::size_t terminal_index() const { return steps.size(); }
};

struct ByIterationResult {
    SelectionMask mask;
    ByIterationTrace trace;
};

/// One-sided upper confidence bounds U_i = x_i + Phi^{-1}(1 - q*|S|/m)
/// for the selected tasks, aligned with selected.indices().
///
/// Throws std::invalid_argument when the selection is empty or when
/// q*|S|/m >= 1 (no valid confidence level).
std::vector<double> by_upper_bounds(const ZScoreVector& x, const SelectionMask& selected,
                                    RiskLevel q, TaskCount m);

/// Fixed-point iteration of the one-sided confidence step, starting from
/// the full task set: S^{t+1} = {i in S^t : U_i^t <= 0}, stopping when the
/// set repeats (confirming step recorded) or becomes empty.
ByIterationResult by_iterate(const ZScoreVector& x, RiskLevel q);

/// Classical step-up rule: reject all p-values <= P_(I*) where
/// I* = max{ i : P_(i) <= (i/m) q }; empty when no index qualifies.
SelectionMask bh_step_up(const PValueVector& p, RiskLevel q);

/// One-sided p-values p_i = Phi(x_i).
PValueVector one_sided_pvalues(const ZScoreVector& x);

}  // namespace selrisk
