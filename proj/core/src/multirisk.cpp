#include "selrisk/multirisk.hpp"

namespace selrisk {

namespace {

void validate_suite(const StrategySuite& suite, const SelectionMask& initial) {
    if (suite.pairs.empty()) {
        throw std::invalid_argument("multirisk: suite must contain at least one strategy pair");
    }
    if (initial.size() == 0) {
        throw std::invalid_argument("multirisk: empty task range");
    }
}

}  // namespace

MultiRiskTrace run_parallel_intersection(const StrategySuite& suite, const SelectionMask& initial,
                                         const EngineOptions& options) {
    validate_suite(suite, initial);
    const std::size_t m = initial.size();
    const TaskCount tasks(m);
    const std::size_t k = suite.risk_count();

    std::vector<MultiRiskStep> steps;
    SelectionMask current = initial;
    for (;;) {
        MultiRiskStep step{current, {}, {}, {}};
        SelectionMask next = SelectionMask::full(m);
        for (std::size_t c = 0; c < k; ++c) {
            const StrategyPair& pair = suite.pairs[c];
            DecisionVector decisions = pair.decision.eval(current);
            SelectionMask chosen = pair.selection.eval(decisions);
            if (options.check_purity && !(pair.decision.eval(current) == decisions)) {
                throw std::runtime_error("run_parallel_intersection: impure decision strategy");
            }
            if (!chosen.is_subset_of(current)) {
                throw ContractingViolation(
                    "run_parallel_intersection: risk " + std::to_string(c) +
                    " re-added a deselected task at iteration " + std::to_string(steps.size() + 1));
            }
            step.adjusted_levels.push_back(
                adjusted_level(pair.q, current.count(), pair.rule, tasks));
            step.inner_masks.push_back(current);
            step.decisions.push_back(std::move(decisions));
            next = next.intersect(chosen);
        }

        steps.push_back(std::move(step));
        if (next == current) {
            return MultiRiskTrace{std::move(steps), std::move(next)};
        }
        if (steps.size() > m + 1) {
            throw NonTermination("run_parallel_intersection: exceeded m + 1 iterations");
        }
        current = next;
    }
}

MultiRiskTrace run_sequential_composition(const StrategySuite& suite, const SelectionMask& initial,
                                          const EngineOptions& options) {
    validate_suite(suite, initial);
    const std::size_t m = initial.size();
    const TaskCount tasks(m);
    const std::size_t k = suite.risk_count();

    std::vector<MultiRiskStep> steps;
    SelectionMask current = initial;
    for (;;) {
        MultiRiskStep step{current, {}, {}, {}};
        SelectionMask inner = current;
        for (std::size_t c = 0; c < k; ++c) {
            const StrategyPair& pair = suite.pairs[c];
            DecisionVector decisions = pair.decision.eval(inner);
            SelectionMask chosen = pair.selection.eval(decisions);
            if (options.check_purity && !(pair.decision.eval(inner) == decisions)) {
                throw std::runtime_error("run_sequential_composition: impure decision strategy");
            }
            if (!chosen.is_subset_of(inner)) {
                throw ContractingViolation(
                    "run_sequential_composition: risk " + std::to_string(c) +
                    " re-added a deselected task at iteration " + std::to_string(steps.size() + 1));
            }
            step.adjusted_levels.push_back(adjusted_level(pair.q, inner.count(), pair.rule, tasks));
            step.inner_masks.push_back(inner);
            step.decisions.push_back(std::move(decisions));
            inner = std::move(chosen);
        }

        steps.push_back(std::move(step));
        if (inner == current) {
            return MultiRiskTrace{std::move(steps), std::move(inner)};
        }
        if (steps.size() > m + 1) {
            throw NonTermination("run_sequential_composition: exceeded m + 1 iterations");
        }
        current = std::move(inner);
    }
}

}  // namespace selrisk
