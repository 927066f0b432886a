#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "selrisk/framework.hpp"
#include "selrisk/types.hpp"

namespace selrisk {

/// True location parameters with the null family "theta_i >= cutoff".
struct GroundTruth {
    std::vector<double> theta;
    double null_cutoff = 0.0;

    std::size_t size() const { return theta.size(); }
    bool is_null(std::size_t i) const { return theta[i] >= null_cutoff; }
    bool is_null_at(std::size_t i, double c) const { return theta[i] >= c; }
};

/// Monte Carlo estimate with its standard error (sample sd / sqrt(reps)).
struct RiskEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::size_t replications = 0;
};

/// Mean and standard error of a per-replication statistic in [0, 1].
/// Replication r sees the derived seed stream(seed, r); evaluation order
/// never affects the result.
RiskEstimate monte_carlo_mean(std::size_t reps, std::uint64_t seed,
                              const std::function<double(std::uint64_t rep_seed)>& sample);

/// Independent draws x_i ~ N(theta_i, 1), deterministic per seed.
ZScoreVector simulate_gaussian(const std::vector<double>& theta, std::uint64_t seed);

/// Equicorrelated draws: x = theta + sqrt(rho) z0 + sqrt(1 - rho) z_i
/// with a shared z0, pairwise correlation rho.
ZScoreVector simulate_equicorrelated(const std::vector<double>& theta, double rho,
                                     std::uint64_t seed);

/// A selection with the per-task losses of the decisions made on it.
struct SelectedLosses {
    SelectionMask mask;
    std::vector<double> losses;
};

/// Average of sum_{i in S} loss_i / (1 v |S|) over `reps` replications of
/// x ~ N(theta, I), with standard error.  Requires reps >= 100.
RiskEstimate estimate_fdp_risk(
    const std::function<SelectedLosses(const ZScoreVector&)>& procedure, const GroundTruth& truth,
    std::size_t reps, std::uint64_t seed);

/// Empirical rate of non-covering one-sided intervals
/// U_i = x_i + Phi^{-1}(1 - q |S| / m) among the selected tasks, using
/// the supplied selection rule on each simulated draw.
RiskEstimate estimate_fcr(const GroundTruth& truth, RiskLevel q,
                          const std::function<SelectionMask(const ZScoreVector&)>& select,
                          std::size_t reps, std::uint64_t seed);

/// Per-location empirical error rates of a fixed rejection procedure: at
/// each grid value c, the average fraction of selected tasks with
/// theta_i >= c.
std::vector<RiskEstimate> estimate_fdr_curve(
    const std::function<SelectionMask(const ZScoreVector&)>& procedure, const GroundTruth& truth,
    const std::vector<double>& grid, std::size_t reps, std::uint64_t seed);

/// Independent oracle for the iterative engine on small instances
/// (m <= 12): scans all 2^m masks for self-consistency under one
/// decision-then-selection step, then walks the composed map down from
/// the full set and returns the self-consistent mask it lands on.
SelectionMask enumerate_fixed_points(const StrategyPair& pair, TaskCount m);

/// Same oracle for an arbitrary composed one-step map.
SelectionMask enumerate_fixed_points_map(
    const std::function<SelectionMask(const SelectionMask&)>& step, TaskCount m);

}  // namespace selrisk
