#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "selrisk/decisions.hpp"
#include "selrisk/types.hpp"

namespace selrisk {

/// Decision strategy: maps the current selected set to one decision per
/// task.  The task data is captured at construction time, so evaluation
/// must be a pure function of the mask (same mask, same decisions).
struct DecisionStrategy {
    std::function<DecisionVector(const SelectionMask&)> eval;

    /// Declared: task i's decision reads only task i's data.  Purely
    /// informational; enables per-task parallel evaluation.
    bool uses_only_own_task_data = true;
};

/// Selection strategy: maps a decision vector to a new selected set.
struct SelectionStrategy {
    std::function<SelectionMask(const DecisionVector&)> eval;

    /// Declared: composed with its decision strategy, never re-adds a
    /// deselected task.  The engine verifies this at every step.
    bool contracting_expected = true;

    /// Declared: larger input sets produce weakly larger output sets.
    /// Not enforced at runtime; see check_increasing for a test-mode probe.
    bool increasing_expected = true;
};

/// A decision/selection strategy pair with its target risk level and the
/// adjustment rule its decision strategy applies.
struct StrategyPair {
    DecisionStrategy decision;
    SelectionStrategy selection;
    RiskLevel q;
    AdjustmentRule rule = AdjustmentRule::independent;
};

/// One engine step: the set decisions were computed on, those decisions,
/// and the nominal level they were computed at.
struct GameStep {
    SelectionMask selected;
    DecisionVector decisions;
    double adjusted_level;
};

/// Full record of one run of the iterative engine.  steps[t-1] holds
/// iteration t; terminal equals the last step's selected set.
struct GameTrace {
    std::vector<GameStep> steps;
    SelectionMask terminal;

    std::size_t terminal_index() const { return steps.size(); }
    const DecisionVector& terminal_decisions() const { return steps.back().decisions; }
};

struct EngineOptions {
    /// Re-evaluate each strategy twice per step and fail on any mismatch.
    bool check_purity = false;
};

/// Raised when a step would re-select a deselected task; the risk
/// guarantee of the iterated procedure does not hold past this point.
struct ContractingViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when the iteration count exceeds m + 1, which a pure
/// contracting strategy pair cannot reach.
struct NonTermination : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Level handed to per-task decision rules when `selected_count` of m
/// tasks are selected: q * selected_count / f(m).
double adjusted_level(RiskLevel q, std::size_t selected_count, AdjustmentRule rule, TaskCount m);

/// Iterate D^t = d(S^t), S^{t+1} = s(D^t) from `initial` until the
/// selected set repeats.  Every step is checked to be contracting.
GameTrace run_extra_selection(const StrategyPair& pair, const SelectionMask& initial,
                              const EngineOptions& options = {});

// ---------------------------------------------------------------------------
// Built-in strategies
// ---------------------------------------------------------------------------

/// Binary decisions D_i = 1{ p_i <= q |mask| / f(m) }.
DecisionVector threshold_decision(const SelectionMask& mask, const PValueVector& p, RiskLevel q,
                                  AdjustmentRule rule = AdjustmentRule::independent);

/// S_i = D_i for binary decisions.
SelectionMask identity_selection(const DecisionVector& d);

/// Keeps rejected task i only while the rank of p_i among rejected
/// p-values of its own category stays within gamma * min(n_1, n_2).
/// Categories are labelled 1 and 2; exact p-value ties within a category
/// break by task index (lower index ranks first).
SelectionMask balance_selection(const DecisionVector& d, const std::vector<int>& categories,
                                const PValueVector& p, double gamma);

/// Threshold decisions with identity selection: iterated from the full
/// set this reproduces the step-up procedure.
StrategyPair threshold_identity_pair(PValueVector p, RiskLevel q,
                                     AdjustmentRule rule = AdjustmentRule::independent);

/// Threshold decisions with the category-balance selection.
StrategyPair balance_pair(PValueVector p, std::vector<int> categories, double gamma, RiskLevel q,
                          AdjustmentRule rule = AdjustmentRule::independent);

enum class FweMethod {
    bonferroni,
    holm,
};

/// Familywise-error rejections within one group at level `alpha`.
std::vector<std::uint8_t> fwe_reject(const std::vector<double>& pvalues, double alpha,
                                     FweMethod method);

/// Group-level pair: the decision strategy runs the familywise method
/// inside every group at the adjusted level, and the selection strategy
/// keeps a group while it has at least one within-group rejection.
StrategyPair group_fwe_pair(std::vector<std::vector<double>> group_pvalues, FweMethod method,
                            RiskLevel q, AdjustmentRule rule = AdjustmentRule::independent);

/// Sign declarations from p-values p_minus: negative when p <= level,
/// positive when 1 - p <= level, nil otherwise; selection keeps declared
/// signs.  Requires q < 0.5 so the two conditions stay exclusive.
StrategyPair directional_pair(PValueVector p_minus, RiskLevel q,
                              AdjustmentRule rule = AdjustmentRule::independent);

/// Confidence lower bounds for the number of non-nulls per group:
/// d_i = max{ k >= 0 : P_i^(k) <= level } with the k = 0 entry pinned to
/// zero; selection keeps groups with d_i >= 1.  Rows must be
/// nondecreasing in k (validated at construction).
StrategyPair partial_conjunction_pair(std::vector<std::vector<double>> pc_pvalues, RiskLevel q,
                                      AdjustmentRule rule = AdjustmentRule::independent);

/// Test-mode probe: samples random nested mask pairs S <= S' and checks
/// s(d(S)) <= s(d(S')).  Returns false on the first violation.
bool check_increasing(const StrategyPair& pair, std::size_t m, std::size_t trials,
                      std::uint64_t seed);

}  // namespace selrisk
