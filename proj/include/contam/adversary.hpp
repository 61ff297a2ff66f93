#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "contam/dataset.hpp"
#include "contam/params.hpp"
#include "contam/rng.hpp"

namespace contam {

/// One interval of a piecewise censoring density. The formula on [lo, hi] is
///   scale * phi(x - shift) + sum_k legendre[k] * P_k(x - center)
/// where center = (lo + hi)/2 and the Legendre part is present only on the
/// bounded moment-correction window.
struct AdversaryPiece {
  double lo = 0.0;
  double hi = 0.0;
  double scale = 1.0;
  double shift = 0.0;
  std::vector<double> legendre;  // empty for plain pieces; legendre[k] multiplies P_k

  bool has_legendre() const { return !legendre.empty(); }
  double center() const { return 0.5 * (lo + hi); }
  double eval(double x) const;
  /// Analytic integral of the formula over [lo, hi] (Legendre part is
  /// mass-free by construction since coefficient 0 is never used).
  double mass() const;
};

/// A realizable censoring adversary against the clean Gaussian
/// N(base_mean, 1): a density f with (1-eps) phi(x-base_mean) <= f <=
/// phi(x-base_mean), stored in closed form piece by piece.
/// Immutable after construction; shareable across threads.
class Adversary1D {
 public:
  Adversary1D(double base_mean, double epsilon, std::vector<AdversaryPiece> pieces,
              double total_mass);

  double base_mean() const { return base_mean_; }
  double epsilon() const { return epsilon_; }
  double total_mass() const { return total_mass_; }
  const std::vector<AdversaryPiece>& pieces() const { return pieces_; }

  /// f(x).
  double density(double x) const;
  /// pdf of the clean Gaussian, phi(x - base_mean).
  double clean_pdf(double x) const;
  /// Retention probability f(x)/p(x), evaluated piecewise in closed form and
  /// clamped to [0,1] against rounding spill.
  double retention(double x) const;

  /// Translate the whole construction by `offset`.
  Adversary1D shifted(double offset) const;

  std::string to_json() const;
  static Adversary1D from_json(const std::string& text);

 private:
  double base_mean_;
  double epsilon_;
  double total_mass_;
  std::vector<AdversaryPiece> pieces_;
};

/// f = (1 - deletion) * p pointwise: every point censored at the same rate.
Adversary1D uniform_deletion_adversary(double epsilon, double deletion, double base_mean);
/// f == p: the adversary spends no budget.
Adversary1D null_adversary(double epsilon, double base_mean);

/// The tail-matching construction: uses half the budget so the visible
/// conditional equals N(base_mean - delta, 1) on a central window of
/// half-width B, keeps the clean density on the far-left tail, and scales the
/// far-right tail by a closed-form lambda in [1-eps, 1] so the total mass is
/// exactly 1 - eps/2.
Adversary1D build_tail_adversary(const ContaminationParams& params, double base_mean);

/// Tail construction plus a Legendre polynomial correction on the unit window
/// about base_mean - delta, solved so the first m moments of the normalized
/// visible distribution match N(0,1) (in the frame centered at
/// base_mean - delta). Throws MomentBudgetExceededError carrying the largest
/// feasible order when the correction would violate |p| <= slack*eps or the
/// sandwich.
Adversary1D build_moment_matched_adversary(const ContaminationParams& params, int m,
                                           double base_mean = 0.0 /* defaults to delta */,
                                           bool base_mean_is_delta = true,
                                           double slack = 0.5);

/// The indistinguishable corruption pair around N(-delta/2,1), N(+delta/2,1).
struct CouplingPair {
  Adversary1D q1;
  Adversary1D q2;
  double threshold_t = 0.0;
  double alpha = 0.0;  // common visible mass
};

CouplingPair build_coupling_pair(const ContaminationParams& params);

/// Exact TV distance between the two normalized visible distributions of the
/// pair, from the piecewise definition:
///   ((1-eps) Phi(-t+delta/2) - Phi(-t-delta/2)) / alpha.
double coupling_tv_closed_form(const CouplingPair& pair, double epsilon, double delta);

/// Draw-then-retain censoring of a caller-provided clean draw.
ObservedSample censor_sample(const Adversary1D& adv, double x, RandomStream& rng);

/// Hidden-direction instance: the visible law matches the adversary's visible
/// conditional along v and is standard Gaussian orthogonally. Per sample the
/// stream is consumed in the fixed order (z_1..z_d, g1, uniform).
Dataset sample_hidden_direction(const Adversary1D& adv, const Eigen::VectorXd& v,
                                std::size_t n, RandomStream& rng);

/// Largest violation of (1-eps) p <= f <= p on an n-point grid over
/// [lo, hi]; the admissibility certificate. Returns max(0, violation).
double sandwich_violation(const Adversary1D& adv, double lo, double hi, int n_points);
/// Same with the default grid: base_mean +- (span + 10) where span covers all
/// finite piece boundaries.
double sandwich_violation(const Adversary1D& adv, int n_points = 10000);

/// Total mass recomputed by piecewise quadrature (cache cross-check).
double mass_by_quadrature(const Adversary1D& adv, double abs_tol = 1e-12);

}  // namespace contam
