#include "selrisk/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "selrisk/fixed_point.hpp"
#include "selrisk/normal.hpp"
#include "selrisk/rng.hpp"

namespace selrisk {

RiskEstimate monte_carlo_mean(std::size_t reps, std::uint64_t seed,
                              const std::function<double(std::uint64_t rep_seed)>& sample) {
    if (reps == 0) {
        throw std::invalid_argument("monte_carlo_mean: reps must be positive");
    }
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
        const double v = sample(derive_stream(seed, 0x7265706cULL, r));
        sum += v;
        sum_sq += v * v;
    }
    const double n = static_cast<double>(reps);
    const double mean = sum / n;
    double variance = 0.0;
    if (reps > 1) {
        variance = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    }
    return RiskEstimate{mean, std::sqrt(variance / n), reps};
}

ZScoreVector simulate_gaussian(const std::vector<double>& theta, std::uint64_t seed) {
    std::vector<double> x(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        CounterRng rng(derive_stream(seed, 0x6761757373ULL, i));
        x[i] = theta[i] + rng.next_normal();
    }
    return ZScoreVector(std::move(x));
}

ZScoreVector simulate_equicorrelated(const std::vector<double>& theta, double rho,
                                     std::uint64_t seed) {
    if (!(rho >= 0.0 && rho < 1.0)) {
        throw std::invalid_argument("simulate_equicorrelated: rho must lie in [0, 1)");
    }
    CounterRng shared(derive_stream(seed, 0x636f6d6dULL, 0));
    const double z0 = shared.next_normal();
    const double w_shared = std::sqrt(rho);
    const double w_own = std::sqrt(1.0 - rho);
    std::vector<double> x(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        CounterRng rng(derive_stream(seed, 0x65716369ULL, i));
        x[i] = theta[i] + w_shared * z0 + w_own * rng.next_normal();
    }
    return ZScoreVector(std::move(x));
}

RiskEstimate estimate_fdp_risk(
    const std::function<SelectedLosses(const ZScoreVector&)>& procedure, const GroundTruth& truth,
    std::size_t reps, std::uint64_t seed) {
    if (reps < 100) {
        throw std::invalid_argument("estimate_fdp_risk: reps must be at least 100");
    }
    return monte_carlo_mean(reps, seed, [&](std::uint64_t rep_seed) {
        const ZScoreVector x = simulate_gaussian(truth.theta, rep_seed);
        const SelectedLosses out = procedure(x);
        if (out.losses.size() != out.mask.size()) {
            throw std::invalid_argument("estimate_fdp_risk: loss vector size mismatch");
        }
        double loss_sum = 0.0;
        for (std::size_t i = 0; i < out.mask.size(); ++i) {
            if (out.mask[i]) loss_sum += out.losses[i];
        }
        return loss_sum / std::max<double>(1.0, static_cast<double>(out.mask.count()));
    });
}

RiskEstimate estimate_fcr(const GroundTruth& truth, RiskLevel q,
                          const std::function<SelectionMask(const ZScoreVector&)>& select,
                          std::size_t reps, std::uint64_t seed) {
    const TaskCount m(truth.size());
    return monte_carlo_mean(reps, seed, [&](std::uint64_t rep_seed) {
        const ZScoreVector x = simulate_gaussian(truth.theta, rep_seed);
        const SelectionMask mask = select(x);
        if (mask.empty()) return 0.0;
        const std::vector<double> bounds = by_upper_bounds(x, mask, q, m);
        const auto idx = mask.indices();
        double miss = 0.0;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            miss += (truth.theta[idx[k]] >= bounds[k]) ? 1.0 : 0.0;
        }
        return miss / static_cast<double>(idx.size());
    });
}

std::vector<RiskEstimate> estimate_fdr_curve(
    const std::function<SelectionMask(const ZScoreVector&)>& procedure, const GroundTruth& truth,
    const std::vector<double>& grid, std::size_t reps, std::uint64_t seed) {
    if (reps == 0) {
        throw std::invalid_argument("estimate_fdr_curve: reps must be positive");
    }
    std::vector<double> sum(grid.size(), 0.0);
    std::vector<double> sum_sq(grid.size(), 0.0);
    for (std::size_t r = 0; r < reps; ++r) {
        const std::uint64_t rep_seed = derive_stream(seed, 0x7265706cULL, r);
        const ZScoreVector x = simulate_gaussian(truth.theta, rep_seed);
        const SelectionMask mask = procedure(x);
        const auto idx = mask.indices();
        const double denom = std::max<double>(1.0, static_cast<double>(idx.size()));
        for (std::size_t g = 0; g < grid.size(); ++g) {
            double false_count = 0.0;
            for (auto i : idx) {
                false_count += truth.is_null_at(i, grid[g]) ? 1.0 : 0.0;
            }
            const double fdp = false_count / denom;
            sum[g] += fdp;
            sum_sq[g] += fdp * fdp;
        }
    }
    std::vector<RiskEstimate> out(grid.size());
    const double n = static_cast<double>(reps);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double mean = sum[g] / n;
        double variance = 0.0;
        if (reps > 1) {
            variance = std::max(0.0, (sum_sq[g] - n * mean * mean) / (n - 1.0));
        }
        out[g] = RiskEstimate{mean, std::sqrt(variance / n), reps};
    }
    return out;
}

SelectionMask enumerate_fixed_points_map(
    const std::function<SelectionMask(const SelectionMask&)>& step, TaskCount m) {
    const std::size_t n = m.value();
    if (n > 12) {
        throw std::invalid_argument("enumerate_fixed_points: m must be at most 12");
    }

    // Direct scan: a mask is self-consistent when one more step returns it.
    std::vector<std::uint64_t> fixed_codes;
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << n); ++code) {
        std::vector<std::uint8_t> bits(n);
        for (std::size_t i = 0; i < n; ++i) bits[i] = (code >> i) & 1;
        const SelectionMask mask = SelectionMask::from_bits(bits);
        if (step(mask) == mask) fixed_codes.push_back(code);
    }
    if (fixed_codes.empty()) {
        throw std::logic_error("enumerate_fixed_points: no self-consistent mask exists");
    }

    // Reachability: walk the map down from the full set; the landing mask
    // must be one of the scanned fixed points.
    SelectionMask current = SelectionMask::full(n);
    for (std::size_t guard = 0; guard <= n + 1; ++guard) {
        const SelectionMask next = step(current);
        if (next == current) break;
        current = next;
    }
    std::uint64_t landed = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (current[i]) landed |= (std::uint64_t{1} << i);
    }
    if (std::find(fixed_codes.begin(), fixed_codes.end(), landed) == fixed_codes.end()) {
        throw std::logic_error("enumerate_fixed_points: walk did not land on a fixed point");
    }
    return current;
}

SelectionMask enumerate_fixed_points(const StrategyPair& pair, TaskCount m) {
    return enumerate_fixed_points_map(
        [&](const SelectionMask& mask) { return pair.selection.eval(pair.decision.eval(mask)); },
        m);
}

}  // namespace selrisk
