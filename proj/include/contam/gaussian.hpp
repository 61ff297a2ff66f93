#pragma once

#include <cmath>

namespace contam {

inline constexpr double kInvSqrt2Pi = 0.3989422804014326779;  // 1/sqrt(2*pi)

/// Standard normal pdf.
inline double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

/// Standard normal cdf, accurate in both tails via erfc.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

/// Standard normal quantile (inverse cdf).
double norm_quantile(double p);

/// Raw Gaussian moment E[z^k] = (k-1)!! for even k, 0 for odd.
/// Guarded for k <= 64; accumulated in extended precision.
double gaussian_raw_moment(int k);

/// E[(z+delta)^k] for z ~ N(0,1), by the binomial expansion over even
/// central moments.
double shifted_gaussian_moment(double delta, int k);

}  // namespace contam
