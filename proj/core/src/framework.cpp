#include "selrisk/framework.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "selrisk/rng.hpp"

namespace selrisk {

double adjusted_level(RiskLevel q, std::size_t selected_count, AdjustmentRule rule, TaskCount m) {
    if (selected_count > m.value()) {
        throw std::invalid_argument("adjusted_level: selected_count exceeds m");
    }
    return q.value() * static_cast<double>(selected_count) / adjustment_value(rule, m);
}

GameTrace run_extra_selection(const StrategyPair& pair, const SelectionMask& initial,
                              const EngineOptions& options) {
    const std::size_t m = initial.size();
    const TaskCount tasks(m);

    std::vector<GameStep> steps;
    SelectionMask current = initial;
    for (;;) {
        DecisionVector decisions = pair.decision.eval(current);
        SelectionMask next = pair.selection.eval(decisions);
        if (options.check_purity) {
            if (!(pair.decision.eval(current) == decisions) ||
                !(pair.selection.eval(decisions) == next)) {
                throw std::runtime_error(
                    "run_extra_selection: strategy returned different outputs for identical "
                    "inputs (purity contract broken)");
            }
        }
        if (!next.is_subset_of(current)) {
            throw ContractingViolation(
                "run_extra_selection: selection re-added a deselected task at iteration " +
                std::to_string(steps.size() + 1));
        }

        steps.push_back(GameStep{current, std::move(decisions),
                                 adjusted_level(pair.q, current.count(), pair.rule, tasks)});
        if (next == current) {
            return GameTrace{std::move(steps), std::move(next)};
        }
        if (steps.size() > m + 1) {
            throw NonTermination("run_extra_selection: exceeded m + 1 iterations");
        }
        current = next;
    }
}

DecisionVector threshold_decision(const SelectionMask& mask, const PValueVector& p, RiskLevel q,
                                  AdjustmentRule rule) {
    const TaskCount m(p.size());
    const double level = adjusted_level(q, mask.count(), rule, m);
    DecisionVector::Binary d(p.size(), 0);
    for (std::size_t i = 0; i < p.size(); ++i) d[i] = (p[i] <= level) ? 1 : 0;
    return DecisionVector::binary(std::move(d));
}

SelectionMask identity_selection(const DecisionVector& d) {
    const auto& bits = d.as_binary();
    return SelectionMask::from_bits(bits);
}

SelectionMask balance_selection(const DecisionVector& d, const std::vector<int>& categories,
                                const PValueVector& p, double gamma) {
    if (!(gamma > 1.0)) {
        throw std::invalid_argument("balance_selection: gamma must exceed 1");
    }
    const auto& bits = d.as_binary();
    const std::size_t m = bits.size();
    if (categories.size() != m || p.size() != m) {
        throw std::invalid_argument("balance_selection: size mismatch");
    }
    for (int c : categories) {
        if (c != 1 && c != 2) {
            throw std::invalid_argument("balance_selection: categories must be 1 or 2");
        }
    }

    std::size_t n1 = 0, n2 = 0;
    for (std::size_t i = 0; i < m; ++i) {
        if (bits[i]) (categories[i] == 1 ? n1 : n2) += 1;
    }
    const double cap = gamma * static_cast<double>(std::min(n1, n2));

    // Rank of a rejected task within its own category: number of rejected
    // same-category p-values strictly smaller, plus equal ones at lower index.
    return SelectionMask::where(m, [&](std::size_t i) {
        if (!bits[i]) return false;
        std::size_t rank = 1;
        for (std::size_t j = 0; j < m; ++j) {
            if (j == i || !bits[j] || categories[j] != categories[i]) continue;
            if (p[j] < p[i] || (p[j] == p[i] && j < i)) ++rank;
        }
        return static_cast<double>(rank) <= cap;
    });
}

// Built-in pairs make non-trivial decisions only for tasks inside the
// current mask.  The composed selection is then contracting on every mask
// (not just along the run's own trajectory), which the multi-risk
// procedures rely on; runs started from the full set are unaffected.

StrategyPair threshold_identity_pair(PValueVector p, RiskLevel q, AdjustmentRule rule) {
    DecisionStrategy decision{
        [p, q, rule](const SelectionMask& mask) {
            DecisionVector d = threshold_decision(mask, p, q, rule);
            DecisionVector::Binary gated = d.as_binary();
            for (std::size_t i = 0; i < gated.size(); ++i) {
                if (!mask[i]) gated[i] = 0;
            }
            return DecisionVector::binary(std::move(gated));
        },
        true};
    SelectionStrategy selection{[](const DecisionVector& d) { return identity_selection(d); },
                                true, true};
    return StrategyPair{std::move(decision), std::move(selection), q, rule};
}

StrategyPair balance_pair(PValueVector p, std::vector<int> categories, double gamma, RiskLevel q,
                          AdjustmentRule rule) {
    if (!(gamma > 1.0)) {
        throw std::invalid_argument("balance_pair: gamma must exceed 1");
    }
    DecisionStrategy decision{
        [p, q, rule](const SelectionMask& mask) {
            DecisionVector d = threshold_decision(mask, p, q, rule);
            DecisionVector::Binary gated = d.as_binary();
            for (std::size_t i = 0; i < gated.size(); ++i) {
                if (!mask[i]) gated[i] = 0;
            }
            return DecisionVector::binary(std::move(gated));
        },
        true};
    // Increasing along the engine's own threshold-shaped trajectories, not
    // on arbitrary nested masks: new rejections there can outrank old ones.
    SelectionStrategy selection{[p, categories, gamma](const DecisionVector& d) {
                                    return balance_selection(d, categories, p, gamma);
                                },
                                true, false};
    return StrategyPair{std::move(decision), std::move(selection), q, rule};
}

std::vector<std::uint8_t> fwe_reject(const std::vector<double>& pvalues, double alpha,
                                     FweMethod method) {
    const std::size_t n = pvalues.size();
    std::vector<std::uint8_t> rejected(n, 0);
    if (n == 0) return rejected;

    if (method == FweMethod::bonferroni) {
        const double cut = alpha / static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j) rejected[j] = (pvalues[j] <= cut) ? 1 : 0;
        return rejected;
    }

    // Holm step-down: walk the sorted p-values, stop at the first failure.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });
    for (std::size_t k = 0; k < n; ++k) {
        const double cut = alpha / static_cast<double>(n - k);
        if (pvalues[order[k]] <= cut) {
            rejected[order[k]] = 1;
        } else {
            break;
        }
    }
    return rejected;
}

StrategyPair group_fwe_pair(std::vector<std::vector<double>> group_pvalues, FweMethod method,
                            RiskLevel q, AdjustmentRule rule) {
    const std::size_t m = group_pvalues.size();
    if (m == 0) {
        throw std::invalid_argument("group_fwe_pair: no groups");
    }
    for (const auto& g : group_pvalues) {
        if (g.empty()) {
            throw std::invalid_argument("group_fwe_pair: every group needs at least one p-value");
        }
    }
    const TaskCount tasks(m);

    DecisionStrategy decision{
        [group_pvalues, method, q, rule, tasks](const SelectionMask& mask) {
            const double level = adjusted_level(q, mask.count(), rule, tasks);
            DecisionVector::GroupFlags flags(group_pvalues.size());
            for (std::size_t i = 0; i < group_pvalues.size(); ++i) {
                flags[i] = mask[i] ? fwe_reject(group_pvalues[i], level, method)
                                   : std::vector<std::uint8_t>(group_pvalues[i].size(), 0);
            }
            return DecisionVector::group_flags(std::move(flags));
        },
        true};
    SelectionStrategy selection{
        [](const DecisionVector& d) {
            const auto& flags = d.as_group_flags();
            return SelectionMask::where(flags.size(), [&](std::size_t i) {
                return std::any_of(flags[i].begin(), flags[i].end(),
                                   [](std::uint8_t r) { return r != 0; });
            });
        },
        true, true};
    return StrategyPair{std::move(decision), std::move(selection), q, rule};
}

StrategyPair directional_pair(PValueVector p_minus, RiskLevel q, AdjustmentRule rule) {
    if (q.value() >= 0.5) {
        throw std::invalid_argument("directional_pair: q must be below 0.5");
    }
    const TaskCount tasks(p_minus.size());

    DecisionStrategy decision{
        [p_minus, q, rule, tasks](const SelectionMask& mask) {
            const double level = adjusted_level(q, mask.count(), rule, tasks);
            DecisionVector::Signs d(p_minus.size(), Sign::nil);
            for (std::size_t i = 0; i < p_minus.size(); ++i) {
                if (!mask[i]) continue;
                if (p_minus[i] <= level) {
                    d[i] = Sign::negative;
                } else if (1.0 - p_minus[i] <= level) {
                    d[i] = Sign::positive;
                }
            }
            return DecisionVector::signs(std::move(d));
        },
        true};
    SelectionStrategy selection{
        [](const DecisionVector& d) {
            const auto& signs = d.as_signs();
            return SelectionMask::where(signs.size(),
                                        [&](std::size_t i) { return signs[i] != Sign::nil; });
        },
        true, true};
    return StrategyPair{std::move(decision), std::move(selection), q, rule};
}

StrategyPair partial_conjunction_pair(std::vector<std::vector<double>> pc_pvalues, RiskLevel q,
                                      AdjustmentRule rule) {
    const std::size_t m = pc_pvalues.size();
    if (m == 0) {
        throw std::invalid_argument("partial_conjunction_pair: no tasks");
    }
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 1; k < pc_pvalues[i].size(); ++k) {
            if (pc_pvalues[i][k] < pc_pvalues[i][k - 1]) {
                throw std::invalid_argument(
                    "partial_conjunction_pair: p-values of task " + std::to_string(i) +
                    " decrease in k; they must be nondecreasing");
            }
        }
    }
    const TaskCount tasks(m);

    DecisionStrategy decision{
        [pc_pvalues, q, rule, tasks](const SelectionMask& mask) {
            const double level = adjusted_level(q, mask.count(), rule, tasks);
            DecisionVector::Bounds d(pc_pvalues.size(), 0);
            for (std::size_t i = 0; i < pc_pvalues.size(); ++i) {
                if (!mask[i]) continue;
                // Entry k of the row is P_i^(k+1); P_i^(0) = 0 always passes.
                int best = 0;
                for (std::size_t k = 0; k < pc_pvalues[i].size(); ++k) {
                    if (pc_pvalues[i][k] <= level) {
                        best = static_cast<int>(k) + 1;
                    } else {
                        break;
                    }
                }
                d[i] = best;
            }
            return DecisionVector::bounds(std::move(d));
        },
        true};
    SelectionStrategy selection{
        [](const DecisionVector& d) {
            const auto& bounds = d.as_bounds();
            return SelectionMask::where(bounds.size(),
                                        [&](std::size_t i) { return bounds[i] >= 1; });
        },
        true, true};
    return StrategyPair{std::move(decision), std::move(selection), q, rule};
}

bool check_increasing(const StrategyPair& pair, std::size_t m, std::size_t trials,
                      std::uint64_t seed) {
    CounterRng rng(derive_stream(seed, 0x696e6372));
    for (std::size_t t = 0; t < trials; ++t) {
        // Draw S' uniformly, then thin it to get a nested S.
        std::vector<std::uint8_t> hi(m), lo(m);
        for (std::size_t i = 0; i < m; ++i) {
            hi[i] = (rng.next_u64() & 1) ? 1 : 0;
            lo[i] = hi[i] && (rng.next_u64() & 1);
        }
        const SelectionMask big = SelectionMask::from_bits(hi);
        const SelectionMask small = SelectionMask::from_bits(lo);
        const SelectionMask out_small = pair.selection.eval(pair.decision.eval(small));
        const SelectionMask out_big = pair.selection.eval(pair.decision.eval(big));
        if (!out_small.is_subset_of(out_big)) return false;
    }
    return true;
}

}  // namespace selrisk
