#pragma once

#include <cmath>
#include <vector>

#include "selrisk/rng.hpp"
#include "selrisk/types.hpp"

namespace test_util {

/// Uniform p-values in (0, 1).
inline std::vector<double> uniform_pvalues(std::size_t m, std::uint64_t seed) {
    selrisk::CounterRng rng(selrisk::derive_stream(seed, 0x756e6966, 0));
    std::vector<double> p(m);
    for (auto& v : p) v = rng.next_uniform();
    return p;
}

/// Spiked p-values: a fraction of small signal-like values among uniforms.
inline std::vector<double> spiked_pvalues(std::size_t m, std::uint64_t seed) {
    selrisk::CounterRng rng(selrisk::derive_stream(seed, 0x7370696b, 0));
    std::vector<double> p(m);
    for (auto& v : p) {
        const double u = rng.next_uniform();
        v = (rng.next_u64() % 4 == 0) ? u * u * u * 1e-2 : u;
        if (v <= 0.0) v = 1e-300;
    }
    return p;
}

/// |x - stated| within half a unit of the last displayed decimal digit.
inline bool matches_displayed(double x, double stated, int decimals) {
    const double tol = 0.5 * std::pow(10.0, -decimals);
    return std::fabs(x - stated) <= tol;
}

}  // namespace test_util
