#include "contam/gaussian.hpp"

#include <stdexcept>

#include "contam/errors.hpp"

namespace contam {

// Acklam's rational approximation refined with one Halley step against erfc,
// giving ~1e-15 relative accuracy over (0,1).
double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ParameterDomainError("norm_quantile: p must lie in (0,1)");
  }
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= phigh) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  const double e = norm_cdf(x) - p;
  const double u = e / norm_pdf(x);
  x = x - u / (1 + 0.5 * x * u);
  return x;
}

double gaussian_raw_moment(int k) {
  if (k < 0 || k > 64) {
    throw ParameterDomainError("gaussian_raw_moment: order must be in [0, 64]");
  }
  if (k % 2 == 1) return 0.0;
  long double acc = 1.0L;
  for (int j = k - 1; j >= 1; j -= 2) acc *= j;
  return static_cast<double>(acc);
}

double shifted_gaussian_moment(double delta, int k) {
  if (k < 0 || k > 64) {
    throw ParameterDomainError("shifted_gaussian_moment: order must be in [0, 64]");
  }
  // sum over j with k-j even of C(k,j) delta^j (k-j-1)!!
  long double sum = 0.0L;
  long double binom = 1.0L;  // C(k, j)
  long double dpow = 1.0L;   // delta^j
  for (int j = 0; j <= k; ++j) {
    if ((k - j) % 2 == 0) {
      long double dfact = 1.0L;
      for (int t = k - j - 1; t >= 1; t -= 2) dfact *= t;
      sum += binom * dpow * dfact;
    }
    binom = binom * (k - j) / (j + 1);
    dpow *= delta;
  }
  return static_cast<double>(sum);
}

}  // namespace contam
