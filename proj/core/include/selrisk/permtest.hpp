#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "selrisk/types.hpp"

namespace selrisk {

/// Statistic contract for two-sample tasks: a real summary of the two
/// groups, evaluated on relabelled data during resampling.
using TwoSampleStatistic =
    std::function<double(std::span<const double>, std::span<const double>)>;

/// mean(a) - mean(b); throws std::invalid_argument on an empty group.
double two_sample_meandiff(std::span<const double> a, std::span<const double> b);

/// One resampling task: the observed statistic, the two-sample payload,
/// and the incrementally grown pool of permuted statistics.  The pool only
/// ever grows; consumed() always equals the pool length.
struct PermutationTask {
    std::vector<double> group_a;
    std::vector<double> group_b;
    double observed = 0.0;
    std::vector<double> pool;

    std::size_t consumed() const { return pool.size(); }
};

/// Build a task and evaluate its observed statistic.
PermutationTask make_two_sample_task(std::vector<double> group_a, std::vector<double> group_b,
                                     const TwoSampleStatistic& stat);

/// Monte Carlo permutation p-value (1 + #{ t_obs <= pool_j }) / (1 + M);
/// ties count as exceedances.  Returns 1 for an empty pool.
double perm_pvalue(double t_obs, std::span<const double> pool);

/// Permutation budget per remaining-task count r:
/// M_r = ceil(C * m / (r q)) with C = 2 (ln(1/eps) + ln m)(1 + 4 delta/3 +
/// delta^2/3) / delta^2.  M_r decreases in r and r * M_r is constant
/// before rounding.
class BudgetSchedule {
public:
    BudgetSchedule(RiskLevel q, double epsilon, double delta, TaskCount m);

    std::size_t budget(std::size_t remaining) const;

    double constant() const { return constant_; }
    double q() const { return q_; }
    double epsilon() const { return epsilon_; }
    double delta() const { return delta_; }
    std::size_t task_count() const { return m_; }

    /// Worst-case total budget (C/q) * m * (ln m + 1) + m, covering the
    /// per-level rounding slack.
    double total_budget_bound() const;

private:
    double q_;
    double epsilon_;
    double delta_;
    std::size_t m_;
    double constant_;
};

struct PermIterationRecord {
    std::size_t selected_count;
    double threshold;
};

/// Result of a permutation run: the final selection, per-task permutation
/// consumption, and the per-iteration (|S^t|, threshold) trace.
struct PermRunReport {
    SelectionMask mask;
    std::vector<std::size_t> consumed;
    std::size_t total_permutations = 0;
    std::vector<PermIterationRecord> trace;
};

/// Budget-scheduled iterative procedure: each round tops the pools of the
/// still-selected tasks up to M_{|S^t|}, recomputes their p-values and
/// keeps i while P_i <= q |S^t| / m.  Deselected tasks draw nothing
/// further and never re-enter.  Bit-identical output for identical
/// (tasks, q, schedule, seed).
PermRunReport run_accelerated_bh(std::vector<PermutationTask>& tasks,
                                 const TwoSampleStatistic& stat, RiskLevel q,
                                 const BudgetSchedule& schedule, std::uint64_t seed);

/// Baseline: every task draws exactly M permutations, then the step-up
/// rule is applied to the resulting p-values.
PermRunReport run_fixed_m_bh(std::vector<PermutationTask>& tasks, const TwoSampleStatistic& stat,
                             RiskLevel q, std::size_t fixed_m, std::uint64_t seed);

/// Exact permutation p-value over all distinct two-sample relabelings
/// (group assignments, not raw orderings): #{ T_obs <= T_j } / count.
/// Throws when the assignment count exceeds `cap`.
double exhaustive_perm_pvalue(const PermutationTask& task, const TwoSampleStatistic& stat,
                              std::size_t cap = 1000000);

/// Number of distinct group-A assignments, C(nA + nB, nA), or cap + 1 if
/// it exceeds the cap.
std::size_t count_assignments(std::size_t n_a, std::size_t n_b, std::size_t cap);

}  // namespace selrisk
