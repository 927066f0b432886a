#pragma once

namespace selrisk {

/// Standard normal density.
double normal_pdf(double z);

/// Standard normal CDF, accurate to about 1e-16 relative in both tails.
/// Total on finite inputs; monotone nondecreasing.
double normal_cdf(double z);

/// Inverse of the standard normal CDF on (0, 1).
///
/// Throws std::domain_error for u <= 0 or u >= 1 (and for non-finite u).
/// Satisfies |normal_cdf(normal_quantile(u)) - u| <= 1e-12 over the full
/// representable range of u.
double normal_quantile(double u);

}  // namespace selrisk
