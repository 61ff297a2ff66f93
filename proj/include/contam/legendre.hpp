#pragma once

#include <Eigen/Dense>
#include <vector>

namespace contam {

/// Legendre polynomial P_k(x) by the three-term recurrence.
double legendre_eval(int k, double x);

/// P_0(x) .. P_m(x).
std::vector<double> legendre_all(int m, double x);

/// Moment matrix G with G(i-1, k-1) = int_{-1}^{1} x^i P_k(x) dx for
/// i, k = 1..m. Zero whenever i < k or i - k is odd.
Eigen::MatrixXd legendre_moment_matrix(int m);

}  // namespace contam
