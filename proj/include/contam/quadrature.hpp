#pragma once

#include <functional>
#include <vector>

namespace contam {

/// Gauss-Legendre nodes/weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const GaussRule& gauss_legendre_rule(int n);

/// Gauss-Hermite rule for integrals of the form  int exp(-u^2) g(u) du,
/// computed by Golub-Welsch. Exact for polynomial g of degree <= 2n-1.
const GaussRule& gauss_hermite_rule(int n);

/// Adaptive Gauss-Legendre quadrature on a bounded interval. The local rule
/// is compared against its two-halves refinement; subdivision continues until
/// the discrepancy is below tol (absolute, with a small relative floor).
/// Throws QuadratureError with the achieved tolerance if the depth budget is
/// exhausted.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, int max_depth = 48);

/// int_{-inf}^{inf} x^k * phi(x - mu) dx evaluated with shifted Gauss-Hermite
/// nodes; exact (up to rounding) since the integrand's polynomial factor has
/// degree k.
double gauss_hermite_poly_moment(int k, double mu);

/// Truncated-moment tail scheme: int over the unbounded piece of
/// x^k * scale * phi(x - mu). The full-line part comes from Gauss-Hermite,
/// the bounded complement from adaptive quadrature.
double tail_poly_moment(int k, double lo, double hi, double scale, double mu, double abs_tol);

}  // namespace contam
