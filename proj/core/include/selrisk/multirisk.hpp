#pragma once

#include <vector>

#include "selrisk/framework.hpp"

namespace selrisk {

/// Ordered collection of k strategy pairs sharing one task range; each
/// pair keeps its own risk level and decision space.
struct StrategySuite {
    std::vector<StrategyPair> pairs;

    std::size_t risk_count() const { return pairs.size(); }
};

/// One multi-risk step: the common set, plus per-risk decisions and the
/// per-risk nominal levels those decisions were computed at.  Under
/// sequential composition the c-th decision is computed on the set left
/// by risk c-1, recorded in `inner_masks`.
struct MultiRiskStep {
    SelectionMask selected;
    std::vector<DecisionVector> decisions;
    std::vector<double> adjusted_levels;
    std::vector<SelectionMask> inner_masks;
};

struct MultiRiskTrace {
    std::vector<MultiRiskStep> steps;
    SelectionMask terminal;

    std::size_t terminal_index() const { return steps.size(); }
    const std::vector<DecisionVector>& terminal_decisions() const {
        return steps.back().decisions;
    }
};

/// Every risk's decisions are computed from the common set, then the set
/// updates to the intersection of the per-risk selections.  All terminal
/// decisions are reported against the single converged set.
MultiRiskTrace run_parallel_intersection(const StrategySuite& suite, const SelectionMask& initial,
                                         const EngineOptions& options = {});

/// Within each outer iteration the pairs run in order, each consuming the
/// previous pair's selection; the outer set repeats at convergence.
MultiRiskTrace run_sequential_composition(const StrategySuite& suite, const SelectionMask& initial,
                                          const EngineOptions& options = {});

}  // namespace selrisk
