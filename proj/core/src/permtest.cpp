#include "selrisk/permtest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "selrisk/fixed_point.hpp"
#include "selrisk/rng.hpp"

namespace selrisk {

double two_sample_meandiff(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("two_sample_meandiff: both groups must be nonempty");
    }
    const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
    const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(b.size());
    return mean_a - mean_b;
}

PermutationTask make_two_sample_task(std::vector<double> group_a, std::vector<double> group_b,
                                     const TwoSampleStatistic& stat) {
    if (group_a.empty() || group_b.empty()) {
        throw std::invalid_argument("make_two_sample_task: both groups must be nonempty");
    }
    PermutationTask task;
    task.observed = stat(group_a, group_b);
    task.group_a = std::move(group_a);
    task.group_b = std::move(group_b);
    return task;
}

double perm_pvalue(double t_obs, std::span<const double> pool) {
    std::size_t exceed = 0;
    for (double t : pool) exceed += (t_obs <= t);
    return static_cast<double>(1 + exceed) / static_cast<double>(1 + pool.size());
}

BudgetSchedule::BudgetSchedule(RiskLevel q, double epsilon, double delta, TaskCount m)
    : q_(q.value()), epsilon_(epsilon), delta_(delta), m_(m.value()) {
    if (m_ < 2) {
        throw std::invalid_argument("BudgetSchedule: m must be at least 2");
    }
    if (!(epsilon_ > 0.0 && epsilon_ <= 0.5)) {
        throw std::invalid_argument("BudgetSchedule: epsilon must lie in (0, 0.5]");
    }
    if (!(delta_ > 0.0 && delta_ <= 1.0)) {
        throw std::invalid_argument("BudgetSchedule: delta must lie in (0, 1]");
    }
    if (!(q_ > 0.0 && q_ < 1.0)) {
        throw std::invalid_argument("BudgetSchedule: q must lie in (0, 1)");
    }
    // Natural logarithms: the concentration bound behind the schedule is
    // stated in nats.
    constant_ = 2.0 * (std::log(1.0 / epsilon_) + std::log(static_cast<double>(m_))) *
                (1.0 + 4.0 * delta_ / 3.0 + delta_ * delta_ / 3.0) / (delta_ * delta_);
}

std::size_t BudgetSchedule::budget(std::size_t remaining) const {
    if (remaining == 0 || remaining > m_) {
        throw std::invalid_argument("BudgetSchedule: remaining count outside [1, m]");
    }
    const double raw =
        constant_ * static_cast<double>(m_) / (static_cast<double>(remaining) * q_);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(raw)));
}

double BudgetSchedule::total_budget_bound() const {
    const double md = static_cast<double>(m_);
    return constant_ / q_ * md * (std::log(md) + 1.0) + md;
}

namespace {

// Draw one permuted statistic for (task, draw index).  The stream is a
// pure function of (seed, task, index), so pools are identical no matter
// how or where the draws are scheduled.
double permuted_statistic(const PermutationTask& task, const TwoSampleStatistic& stat,
                          std::vector<double>& scratch, std::uint64_t seed, std::size_t task_index,
                          std::size_t draw_index) {
    const std::size_t n_a = task.group_a.size();
    const std::size_t n = n_a + task.group_b.size();
    scratch.clear();
    scratch.insert(scratch.end(), task.group_a.begin(), task.group_a.end());
    scratch.insert(scratch.end(), task.group_b.begin(), task.group_b.end());

    CounterRng rng(derive_stream(seed, task_index, draw_index));
    // Partial Fisher-Yates: the first n_a slots become the relabelled group A.
    for (std::size_t i = 0; i < n_a; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
        std::swap(scratch[i], scratch[j]);
    }
    return stat(std::span<const double>(scratch.data(), n_a),
                std::span<const double>(scratch.data() + n_a, n - n_a));
}

void grow_pool(PermutationTask& task, const TwoSampleStatistic& stat,
               std::vector<double>& scratch, std::uint64_t seed, std::size_t task_index,
               std::size_t target) {
    while (task.pool.size() < target) {
        task.pool.push_back(
            permuted_statistic(task, stat, scratch, seed, task_index, task.pool.size() + 1));
    }
}

}  // namespace

PermRunReport run_accelerated_bh(std::vector<PermutationTask>& tasks,
                                 const TwoSampleStatistic& stat, RiskLevel q,
                                 const BudgetSchedule& schedule, std::uint64_t seed) {
    const std::size_t m = tasks.size();
    if (schedule.task_count() != m) {
        throw std::invalid_argument("run_accelerated_bh: schedule built for a different m");
    }

    PermRunReport report{SelectionMask::full(m), std::vector<std::size_t>(m, 0), 0, {}};
    std::vector<double> scratch;
    std::vector<double> pvals(m, 1.0);

    SelectionMask current = SelectionMask::full(m);
    for (;;) {
        const std::size_t r = current.count();
        const std::size_t target = schedule.budget(r);
        const double threshold =
            q.value() * static_cast<double>(r) / static_cast<double>(m);

        for (std::size_t i = 0; i < m; ++i) {
            if (!current[i]) continue;
            grow_pool(tasks[i], stat, scratch, seed, i, target);
            pvals[i] = perm_pvalue(tasks[i].observed, tasks[i].pool);
        }
        report.trace.push_back(PermIterationRecord{r, threshold});

        SelectionMask next = SelectionMask::where(
            m, [&](std::size_t i) { return current[i] && pvals[i] <= threshold; });
        if (!next.is_subset_of(current)) {
            throw std::logic_error("run_accelerated_bh: selected set grew");
        }
        if (next == current || next.empty()) {
            report.mask = std::move(next);
            break;
        }
        current = std::move(next);
    }

    for (std::size_t i = 0; i < m; ++i) {
        report.consumed[i] = tasks[i].consumed();
        report.total_permutations += report.consumed[i];
    }
    return report;
}

PermRunReport run_fixed_m_bh(std::vector<PermutationTask>& tasks, const TwoSampleStatistic& stat,
                             RiskLevel q, std::size_t fixed_m, std::uint64_t seed) {
    if (fixed_m == 0) {
        throw std::invalid_argument("run_fixed_m_bh: permutation count must be at least 1");
    }
    const std::size_t m = tasks.size();
    if (m == 0) {
        throw std::invalid_argument("run_fixed_m_bh: no tasks");
    }

    PermRunReport report{SelectionMask::full(m), std::vector<std::size_t>(m, 0), 0, {}};
    std::vector<double> scratch;
    std::vector<double> pvals(m);
    for (std::size_t i = 0; i < m; ++i) {
        grow_pool(tasks[i], stat, scratch, seed, i, fixed_m);
        pvals[i] = perm_pvalue(tasks[i].observed, tasks[i].pool);
        report.consumed[i] = tasks[i].consumed();
        report.total_permutations += report.consumed[i];
    }

    report.mask = bh_step_up(PValueVector(pvals), q);

    // Trace in the same shape as the scheduled run: the fixed-point view of
    // the step-up rule on the final p-values.
    SelectionMask current = SelectionMask::full(m);
    for (;;) {
        const double threshold =
            q.value() * static_cast<double>(current.count()) / static_cast<double>(m);
        report.trace.push_back(PermIterationRecord{current.count(), threshold});
        SelectionMask next = SelectionMask::where(
            m, [&](std::size_t i) { return current[i] && pvals[i] <= threshold; });
        if (next == current || next.empty()) break;
        current = std::move(next);
    }
    return report;
}

std::size_t count_assignments(std::size_t n_a, std::size_t n_b, std::size_t cap) {
    // C(n_a + n_b, n_a) with early exit once the cap is passed.
    const std::size_t n = n_a + n_b;
    const std::size_t k = std::min(n_a, n_b);
    double c = 1.0;
    for (std::size_t i = 1; i <= k; ++i) {
        c *= static_cast<double>(n - k + i) / static_cast<double>(i);
        if (c > static_cast<double>(cap)) return cap + 1;
    }
    return static_cast<std::size_t>(std::llround(c));
}

double exhaustive_perm_pvalue(const PermutationTask& task, const TwoSampleStatistic& stat,
                              std::size_t cap) {
    const std::size_t n_a = task.group_a.size();
    const std::size_t n_b = task.group_b.size();
    const std::size_t n = n_a + n_b;
    const std::size_t total = count_assignments(n_a, n_b, cap);
    if (total > cap) {
        throw std::invalid_argument("exhaustive_perm_pvalue: assignment count exceeds cap");
    }

    std::vector<double> pooled;
    pooled.reserve(n);
    pooled.insert(pooled.end(), task.group_a.begin(), task.group_a.end());
    pooled.insert(pooled.end(), task.group_b.begin(), task.group_b.end());

    // Lexicographic walk over all group-A index subsets of size n_a.
    std::vector<std::size_t> pick(n_a);
    std::iota(pick.begin(), pick.end(), 0);
    std::vector<double> a(n_a), b(n_b);
    std::vector<std::uint8_t> in_a(n);

    std::size_t exceed = 0;
    std::size_t seen = 0;
    for (;;) {
        std::fill(in_a.begin(), in_a.end(), 0);
        for (std::size_t i = 0; i < n_a; ++i) {
            a[i] = pooled[pick[i]];
            in_a[pick[i]] = 1;
        }
        std::size_t bi = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!in_a[i]) b[bi++] = pooled[i];
        }
        exceed += (task.observed <= stat(a, b));
        ++seen;

        // Advance to the next combination.
        std::size_t pos = n_a;
        while (pos > 0 && pick[pos - 1] == n - n_a + pos - 1) --pos;
        if (pos == 0) break;
        ++pick[pos - 1];
        for (std::size_t i = pos; i < n_a; ++i) pick[i] = pick[i - 1] + 1;
    }
    if (seen != total) {
        throw std::logic_error("exhaustive_perm_pvalue: combination walk miscounted");
    }
    return static_cast<double>(exceed) / static_cast<double>(total);
}

}  // namespace selrisk
