#pragma once

#include <functional>
#include <string>
#include <vector>

#include "contam/adversary.hpp"
#include "contam/gaussian.hpp"
#include "contam/params.hpp"

namespace contam {

/// Targets, achieved values, and residuals for a set of moment orders.
struct MomentReport {
  std::vector<int> orders;
  std::vector<double> target;
  std::vector<double> achieved;
  std::vector<double> residuals;  // achieved - target
  std::string method;             // "quadrature" | "monte-carlo"

  std::string to_json() const;
  std::string to_csv() const;
};

/// k-th raw moment of the normalized visible distribution f/int f, by
/// piecewise quadrature: adaptive on bounded pieces, Gauss-Hermite with shift
/// on unbounded tails.
double adversary_moment(const Adversary1D& adv, int k, double abs_tol = 1e-10);

/// E over the visible conditional of h_t; same piecewise scheme (the
/// full-line Gauss part of a tail is mu^t/sqrt(t!) in closed form).
double adversary_hermite_moment(const Adversary1D& adv, int t, double abs_tol = 1e-10);

/// Moment report against N(0,1) raw moments by quadrature.
MomentReport moment_report_quadrature(const Adversary1D& adv, const std::vector<int>& orders,
                                      double abs_tol = 1e-10);
/// Same by Monte Carlo over n censored draws (visible conditional).
MomentReport moment_report_monte_carlo(const Adversary1D& adv, const std::vector<int>& orders,
                                       std::size_t n, RandomStream& rng,
                                       std::vector<double>* standard_errors = nullptr);

struct GapResult {
  double gap = 0.0;
  bool pass = false;
};

/// Prop-4.1-style check: the k-th visible moment of a corruption of
/// N(delta, 1) must exceed the standard Gaussian moment by more than eps once
/// k >= C gamma'^2 with gamma' = ln(1+2eps/(1-eps))/delta.
GapResult verify_moment_gap(const ContaminationParams& params, const Adversary1D& adv, int k);

/// eps / (k+1)^{k/2}.
double hermite_gap_threshold(double epsilon, int k);

/// TV distance between two normalized densities given as evaluators; the
/// masses must agree to 1e-9. Breakpoints mark kinks/piece boundaries.
double tv_distance_1d(const std::function<double(double)>& f1,
                      const std::function<double(double)>& f2,
                      const std::vector<double>& breakpoints, double lo, double hi,
                      double abs_tol = 1e-8);
/// Convenience overload for two adversaries' visible conditionals.
double tv_distance_1d(const Adversary1D& a1, const Adversary1D& a2, double abs_tol = 1e-8);

struct NormCertificate {
  double bound = 0.0;
  bool pass = false;
};

/// Calibration certificate for the visible Hermite-tensor norm:
/// bound = (c1 ln(1/(1-eps)))^{t/2}/(1-eps) + exp(c2 t ln(1/(1-eps)))/(1-eps).
NormCertificate tensor_norm_certificate(const ContaminationParams& params, int t,
                                        double empirical_norm, double c1 = 4.0,
                                        double c2 = 4.0);

}  // namespace contam
