#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "selrisk/fixed_point.hpp"
#include "selrisk/normal.hpp"
#include "selrisk/rng.hpp"
#include "selrisk/simlab.hpp"
#include "test_util.hpp"

using namespace selrisk;

TEST_CASE("gaussian simulation is seed deterministic") {
    const std::vector<double> theta = {0.0, -1.0, 2.0};
    const ZScoreVector a = simulate_gaussian(theta, 42);
    const ZScoreVector b = simulate_gaussian(theta, 42);
    const ZScoreVector c = simulate_gaussian(theta, 43);
    CHECK(a.values() == b.values());
    CHECK(a.values() != c.values());
}

TEST_CASE("null p-values are empirically uniform (KS)") {
    const std::size_t n = 100000;
    const ZScoreVector x = simulate_gaussian(std::vector<double>(n, 0.0), 7);
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = normal_cdf(x[i]);
    std::sort(p.begin(), p.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
        const double lo = static_cast<double>(i) / static_cast<double>(n);
        ks = std::max(ks, std::max(std::fabs(hi - p[i]), std::fabs(p[i] - lo)));
    }
    // alpha = 0.01 critical value 1.628 / sqrt(n).
    CHECK(ks < 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("strong negative shifts produce vanishing p-values") {
    const std::size_t n = 2000;
    const ZScoreVector x = simulate_gaussian(std::vector<double>(n, -10.0), 11);
    std::size_t tiny = 0;
    for (std::size_t i = 0; i < n; ++i) tiny += (normal_cdf(x[i]) < 1e-15);
    CHECK(static_cast<double>(tiny) / static_cast<double>(n) > 0.9);
}

TEST_CASE("equicorrelated draws have the requested correlation") {
    const std::size_t reps = 4000;
    double sum_xy = 0.0, sum_x = 0.0, sum_y = 0.0, sum_x2 = 0.0, sum_y2 = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
        const ZScoreVector x = simulate_equicorrelated({0.0, 0.0}, 0.8, derive_stream(3, r));
        sum_x += x[0];
        sum_y += x[1];
        sum_xy += x[0] * x[1];
        sum_x2 += x[0] * x[0];
        sum_y2 += x[1] * x[1];
    }
    const double n = static_cast<double>(reps);
    const double cov = sum_xy / n - (sum_x / n) * (sum_y / n);
    const double vx = sum_x2 / n - (sum_x / n) * (sum_x / n);
    const double vy = sum_y2 / n - (sum_y / n) * (sum_y / n);
    CHECK(cov / std::sqrt(vx * vy) == doctest::Approx(0.8).epsilon(0.08));
    CHECK_THROWS_AS(simulate_equicorrelated({0.0}, 1.0, 5), std::invalid_argument);
}

TEST_CASE("monte_carlo_mean computes the sample standard error") {
    const RiskEstimate est = monte_carlo_mean(
        100, 1, [](std::uint64_t s) { return static_cast<double>(s % 2); });
    double mean = 0.0;
    std::vector<double> vals(100);
    for (std::size_t r = 0; r < 100; ++r) {
        vals[r] = static_cast<double>(derive_stream(1, 0x7265706cULL, r) % 2);
        mean += vals[r];
    }
    mean /= 100.0;
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= 99.0;
    CHECK(est.estimate == doctest::Approx(mean).epsilon(1e-15));
    CHECK(est.std_error == doctest::Approx(std::sqrt(var / 100.0)).epsilon(1e-12));
    CHECK(est.replications == 100);
}

TEST_CASE("fdp estimator edge cases") {
    GroundTruth truth{std::vector<double>(10, 0.0), 0.0};
    const RiskEstimate none = estimate_fdp_risk(
        [](const ZScoreVector& x) {
            return SelectedLosses{SelectionMask::none(x.size()),
                                  std::vector<double>(x.size(), 1.0)};
        },
        truth, 100, 5);
    CHECK(none.estimate == 0.0);
    CHECK(none.std_error == 0.0);

    const RiskEstimate all = estimate_fdp_risk(
        [](const ZScoreVector& x) {
            return SelectedLosses{SelectionMask::full(x.size()),
                                  std::vector<double>(x.size(), 1.0)};
        },
        truth, 100, 5);
    CHECK(all.estimate == 1.0);

    CHECK_THROWS_AS(estimate_fdp_risk(
                        [](const ZScoreVector& x) {
                            return SelectedLosses{SelectionMask::none(x.size()),
                                                  std::vector<double>(x.size(), 0.0)};
                        },
                        truth, 50, 5),
                    std::invalid_argument);
}

TEST_CASE("step-up rejection keeps the false discovery proportion near nominal") {
    // Quick check; the acceptance suite runs the full-sized version.
    std::vector<double> theta(40, 0.0);
    for (std::size_t i = 20; i < 40; ++i) theta[i] = -2.0;
    GroundTruth truth{theta, 0.0};
    const RiskLevel q(0.1);
    const RiskEstimate est = estimate_fdp_risk(
        [&](const ZScoreVector& x) {
            const SelectionMask mask = bh_step_up(one_sided_pvalues(x), q);
            std::vector<double> losses(theta.size());
            for (std::size_t i = 0; i < theta.size(); ++i) losses[i] = truth.is_null(i);
            return SelectedLosses{mask, std::move(losses)};
        },
        truth, 500, 99);
    CHECK(est.estimate <= q.value() + 3.0 * est.std_error);
}

TEST_CASE("coverage estimator honors selection rules") {
    GroundTruth truth{std::vector<double>(30, -1.0), 0.0};
    // Select-all reduces to marginal one-sided coverage at the nominal level.
    const RiskEstimate select_all = estimate_fcr(
        truth, RiskLevel(0.1),
        [](const ZScoreVector& x) { return SelectionMask::full(x.size()); }, 600, 21);
    CHECK(select_all.estimate <= 0.1 + 3.0 * select_all.std_error);
    CHECK(select_all.estimate >= 0.1 - 4.0 * select_all.std_error);

    const RiskEstimate never = estimate_fcr(
        truth, RiskLevel(0.1),
        [](const ZScoreVector& x) { return SelectionMask::none(x.size()); }, 200, 22);
    CHECK(never.estimate == 0.0);
}

TEST_CASE("per-location error rates at extreme grid points") {
    GroundTruth truth{std::vector<double>(5, -3.0), 0.0};
    const RiskLevel q(0.3);
    const auto estimates = estimate_fdr_curve(
        [&](const ZScoreVector& x) { return bh_step_up(one_sided_pvalues(x), q); }, truth,
        {-10.0, 10.0}, 400, 17);
    // Below every theta each rejection is false; the rate is P(any rejection).
    CHECK(estimates[0].estimate > 0.9);
    // Above every theta there are no nulls at all.
    CHECK(estimates[1].estimate == 0.0);
}

TEST_CASE("enumeration oracle agrees with the engine and the step-up rule") {
    CounterRng rng(derive_stream(71, 0));
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = 1 + rng.next_u64() % 10;
        const auto p = test_util::uniform_pvalues(m, rng.next_u64());
        const RiskLevel q(0.05 + 0.4 * rng.next_uniform());
        StrategyPair pair = threshold_identity_pair(PValueVector(p), q);
        const SelectionMask oracle = enumerate_fixed_points(pair, TaskCount(m));
        CHECK(oracle == run_extra_selection(pair, SelectionMask::full(m)).terminal);
        CHECK(oracle == bh_step_up(PValueVector(p), q));
    }
    StrategyPair pair = threshold_identity_pair(PValueVector({0.5}), RiskLevel(0.1));
    CHECK_THROWS_AS(enumerate_fixed_points(pair, TaskCount(13)), std::invalid_argument);
}

TEST_CASE("harmonic adjustment controls the post-selection rate under dependence") {
    // Equicorrelated nulls, aggressive selection, harmonically adjusted
    // rejection threshold: quick version of the full acceptance run.
    const std::size_t m = 20;
    GroundTruth truth{std::vector<double>(m, 0.0), 0.0};
    const RiskLevel q(0.1);
    const RiskEstimate est = monte_carlo_mean(400, 23, [&](std::uint64_t rep_seed) {
        const ZScoreVector x = simulate_equicorrelated(truth.theta, 0.8, rep_seed);
        const SelectionMask selected = SelectionMask::where(
            m, [&](std::size_t i) { return normal_cdf(x[i]) <= 0.3; });
        if (selected.empty()) return 0.0;
        const double level =
            adjusted_level(q, selected.count(), AdjustmentRule::harmonic, TaskCount(m));
        double loss = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (selected[i] && normal_cdf(x[i]) <= level) loss += 1.0;
        }
        return loss / static_cast<double>(selected.count());
    });
    CHECK(est.estimate <= q.value() + 3.0 * est.std_error);
}

TEST_CASE("directional declarations control the wrong-sign rate") {
    const std::size_t m = 24;
    std::vector<double> theta(m);
    for (std::size_t i = 0; i < m; ++i) {
        theta[i] = (i % 4 == 0) ? 2.0 : (i % 4 == 1 ? -2.0 : (i % 4 == 2 ? 0.5 : -0.5));
    }
    const RiskLevel q(0.2);
    const RiskEstimate est = monte_carlo_mean(500, 29, [&](std::uint64_t rep_seed) {
        const ZScoreVector x = simulate_gaussian(theta, rep_seed);
        std::vector<double> p_minus(m);
        for (std::size_t i = 0; i < m; ++i) p_minus[i] = normal_cdf(x[i]);
        StrategyPair pair = directional_pair(PValueVector(p_minus), q);
        const GameTrace trace = run_extra_selection(pair, SelectionMask::full(m));
        if (trace.terminal.empty()) return 0.0;
        const auto& signs = trace.terminal_decisions().as_signs();
        double loss = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (!trace.terminal[i]) continue;
            if (signs[i] == Sign::positive && theta[i] <= 0.0) loss += 1.0;
            if (signs[i] == Sign::negative && theta[i] >= 0.0) loss += 1.0;
        }
        return loss / static_cast<double>(trace.terminal.count());
    });
    CHECK(est.estimate <= q.value() + 3.0 * est.std_error);
}

TEST_CASE("groupwise familywise errors stay below the level on selected groups") {
    const std::size_t groups = 15;
    const std::size_t per_group = 3;
    const RiskLevel q(0.2);
    const RiskEstimate est = monte_carlo_mean(500, 37, [&](std::uint64_t rep_seed) {
        // Odd groups carry one real signal; remaining hypotheses are null.
        std::vector<std::vector<double>> pvals(groups);
        std::vector<std::vector<bool>> is_null(groups);
        for (std::size_t g = 0; g < groups; ++g) {
            CounterRng rng(derive_stream(rep_seed, 0x677270, g));
            pvals[g].resize(per_group);
            is_null[g].assign(per_group, true);
            for (std::size_t j = 0; j < per_group; ++j) {
                pvals[g][j] = rng.next_uniform();
            }
            if (g % 2 == 1) {
                pvals[g][0] = normal_cdf(rng.next_normal() - 3.0);
                is_null[g][0] = false;
            }
        }
        StrategyPair pair = group_fwe_pair(pvals, FweMethod::holm, q);
        const GameTrace trace = run_extra_selection(pair, SelectionMask::full(groups));
        if (trace.terminal.empty()) return 0.0;
        const auto& flags = trace.terminal_decisions().as_group_flags();
        double loss = 0.0;
        for (std::size_t g = 0; g < groups; ++g) {
            if (!trace.terminal[g]) continue;
            for (std::size_t j = 0; j < per_group; ++j) {
                if (flags[g][j] && is_null[g][j]) {
                    loss += 1.0;
                    break;
                }
            }
        }
        return loss / static_cast<double>(trace.terminal.count());
    });
    CHECK(est.estimate <= q.value() + 3.0 * est.std_error);
}
