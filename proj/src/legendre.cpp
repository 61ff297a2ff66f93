#include "contam/legendre.hpp"

#include "contam/quadrature.hpp"

namespace contam {

double legendre_eval(int k, double x) {
  if (k == 0) return 1.0;
  double p0 = 1.0, p1 = x;
  for (int j = 2; j <= k; ++j) {
    const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

std::vector<double> legendre_all(int m, double x) {
  std::vector<double> vals(m + 1);
  vals[0] = 1.0;
  if (m >= 1) vals[1] = x;
  for (int j = 2; j <= m; ++j) {
    vals[j] = ((2 * j - 1) * x * vals[j - 1] - (j - 1) * vals[j - 2]) / j;
  }
  return vals;
}

Eigen::MatrixXd legendre_moment_matrix(int m) {
  // 64-node Gauss-Legendre is exact for polynomial degree <= 127, far above
  // the degree i + k <= 2m <= 64 reachable here.
  const GaussRule& rule = gauss_legendre_rule(64);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double x = rule.nodes[q], w = rule.weights[q];
    const std::vector<double> P = legendre_all(m, x);
    double xi = 1.0;
    for (int i = 1; i <= m; ++i) {
      xi *= x;
      for (int k = 1; k <= i; ++k) {
        if ((i - k) % 2 == 0) G(i - 1, k - 1) += w * xi * P[k];
      }
    }
  }
  return G;
}

}  // namespace contam
