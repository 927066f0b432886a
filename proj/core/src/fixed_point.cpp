#include "selrisk/fixed_point.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "selrisk/normal.hpp"

namespace selrisk {

std::vector<double> by_upper_bounds(const ZScoreVector& x, const SelectionMask& selected,
                                    RiskLevel q, TaskCount m) {
    if (x.size() != m.value() || selected.size() != m.value()) {
        throw std::invalid_argument("by_upper_bounds: size mismatch");
    }
    if (selected.empty()) {
        throw std::invalid_argument("by_upper_bounds: selection is empty");
    }
    const double level = q.value() * static_cast<double>(selected.count()) /
                         static_cast<double>(m.value());
    if (level >= 1.0) {
        throw std::invalid_argument("by_upper_bounds: adjusted level q*|S|/m >= 1");
    }
    const double offset = normal_quantile(1.0 - level);
    std::vector<double> bounds;
    bounds.reserve(selected.count());
    for (std::size_t i = 0; i < m.value(); ++i) {
        if (selected[i]) bounds.push_back(x[i] + offset);
    }
    return bounds;
}

ByIterationResult by_iterate(const ZScoreVector& x, RiskLevel q) {
    if (x.size() == 0) {
        throw std::invalid_argument("by_iterate: empty statistic vector");
    }
    if (!(q.value() > 0.0 && q.value() < 1.0)) {
        throw std::invalid_argument("by_iterate: q must lie in (0, 1)");
    }
    const TaskCount m(x.size());

    ByIterationTrace trace;
    SelectionMask current = SelectionMask::full(m.value());
    for (;;) {
        std::vector<double> bounds = by_upper_bounds(x, current, q, m);

        const auto idx = current.indices();
        SelectionMask next = SelectionMask::where(m.value(), [&](std::size_t i) {
            if (!current[i]) return false;
            const std::size_t pos = static_cast<std::size_t>(
                std::lower_bound(idx.begin(), idx.end(), i) - idx.begin());
            return bounds[pos] <= 0.0;
        });

        trace.steps.push_back(ByIterationStep{current, std::move(bounds)});

        // An empty set is a fixed point of the contraction; the confidence
        // step itself is undefined on it, so stop without a confirming pass.
        if (next == current || next.empty()) {
            return ByIterationResult{next, std::move(trace)};
        }
        current = next;
    }
}

SelectionMask bh_step_up(const PValueVector& p, RiskLevel q) {
    const std::size_t m = p.size();
    if (m == 0) {
        throw std::invalid_argument("bh_step_up: empty p-value vector");
    }
    std::vector<double> sorted = p.values();
    std::sort(sorted.begin(), sorted.end());

    double threshold = -1.0;
    for (std::size_t i = m; i >= 1; --i) {
        if (sorted[i - 1] <= q.value() * static_cast<double>(i) / static_cast<double>(m)) {
            threshold = sorted[i - 1];
            break;
        }
    }
    if (threshold < 0.0) {
        return SelectionMask::none(m);
    }
    return SelectionMask::where(m, [&](std::size_t i) { return p[i] <= threshold; });
}

PValueVector one_sided_pvalues(const ZScoreVector& x) {
    std::vector<double> p(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) p[i] = normal_cdf(x[i]);
    return PValueVector(std::move(p));
}

}  // namespace selrisk
