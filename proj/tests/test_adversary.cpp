#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "contam/adversary.hpp"
#include "contam/errors.hpp"
#include "contam/estimators.hpp"
#include "contam/gaussian.hpp"
#include "contam/legendre.hpp"
#include "contam/moments.hpp"
#include "contam/params.hpp"
#include "contam/quadrature.hpp"

using namespace contam;

namespace {

// Independent truncated-moment oracle: int_a^b t^j phi(t) dt by the
// integration-by-parts recurrence, then binomially shifted.
double trunc_central(int j, double a, double b) {
  auto term = [](double t, int p) {
    if (std::isinf(t)) return 0.0;
    double v = norm_pdf(t);
    for (int i = 0; i < p; ++i) v *= t;
    return v;
  };
  std::vector<double> J(j + 1);
  J[0] = norm_cdf(b) - norm_cdf(a);
  if (j >= 1) J[1] = term(a, 0) - term(b, 0);
  for (int i = 2; i <= j; ++i) J[i] = (i - 1) * J[i - 2] + term(a, i - 1) - term(b, i - 1);
  return J[j];
}

double oracle_piece_moment(int k, double lo, double hi, double scale, double mu) {
  double s = 0.0, binom = 1.0, mupow = 1.0;
  std::vector<double> mup(k + 1);
  mup[0] = 1.0;
  for (int i = 1; i <= k; ++i) mup[i] = mup[i - 1] * mu;
  for (int j = 0; j <= k; ++j) {
    s += binom * mup[k - j] * trunc_central(j, lo - mu, hi - mu);
    binom = binom * (k - j) / (j + 1);
  }
  (void)mupow;
  return scale * s;
}

// Oracle route independent of the library's piecewise scheme: the
// closed-form recurrence for the Gaussian parts plus clipped brute
// quadrature for the polynomial corrections.
double oracle_adversary_moment(const Adversary1D& adv, int k) {
  double num = 0.0, den = 0.0;
  for (const AdversaryPiece& p : adv.pieces()) {
    num += oracle_piece_moment(k, p.lo, p.hi, p.scale, p.shift);
    den += oracle_piece_moment(0, p.lo, p.hi, p.scale, p.shift);
    if (p.has_legendre()) {
      auto corr = [&p](double x) { return p.eval(x) - p.scale * norm_pdf(x - p.shift); };
      num += integrate_adaptive(
          [&corr, k](double x) {
            double xk = 1.0;
            for (int j = 0; j < k; ++j) xk *= x;
            return xk * corr(x);
          },
          p.lo, p.hi, 1e-13);
      den += integrate_adaptive(corr, p.lo, p.hi, 1e-13);
    }
  }
  return num / den;
}

}  // namespace

TEST_CASE("tail adversary construction at eps=0.5, delta=0.1") {
  const ContaminationParams p = derive_params(0.5, 0.1);
  const Adversary1D adv = build_tail_adversary(p, p.delta);  // construction frame
  REQUIRE(adv.pieces().size() == 3);
  // boundary points: a = -B + delta/2 (= -x_- shifted), b = B + delta/2; the
  // closed-forms x_+ = 10 ln 1.5 and x_- = -B are verified in the symmetric
  // frame: construction-frame bounds are those plus delta/2.
  const double B = 2.8768207245178093;
  CHECK(adv.pieces()[0].hi == doctest::Approx(-B + 0.05).epsilon(1e-13));
  CHECK(adv.pieces()[1].hi == doctest::Approx(B + 0.05).epsilon(1e-13));
  // x_+ = (1/delta) ln((1-eps/2)/(1-eps)) = 4.05465... lies beyond the
  // central window: the sandwich lower bound still has slack at b.
  const double x_plus = 4.0546510810816438;
  CHECK(B + 0.05 < x_plus);
  // total mass 1 - eps/2, exactly, and the quadrature recomputation agrees
  CHECK(adv.total_mass() == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(mass_by_quadrature(adv) == doctest::Approx(0.75).epsilon(1e-10));
  // lambda within [1-eps, 1]
  CHECK(adv.pieces()[2].scale >= 0.5);
  CHECK(adv.pieces()[2].scale <= 1.0);
}

TEST_CASE("tail adversary sandwich and central identity") {
  const ContaminationParams p = derive_params(0.5, 0.1);
  const Adversary1D adv = build_tail_adversary(p, p.delta);
  CHECK(sandwich_violation(adv) <= 1e-9);
  // symmetric-frame x=0 corresponds to construction-frame x = delta/2; there
  // g = (1-eps/2) phi(delta/2) which lies strictly inside the sandwich
  const double x = p.delta / 2;
  const double g0 = adv.density(x);
  CHECK(g0 == doctest::Approx(0.75 * norm_pdf(x)).epsilon(1e-12));
  CHECK(g0 < adv.clean_pdf(x));
  CHECK(g0 > 0.5 * adv.clean_pdf(x));
}

TEST_CASE("tail adversary shifts to arbitrary base means") {
  const ContaminationParams p = derive_params(0.6, 0.3);
  const Adversary1D adv = build_tail_adversary(p, 2.5);
  CHECK(adv.base_mean() == doctest::Approx(2.5));
  CHECK(sandwich_violation(adv) <= 1e-9);
  CHECK(adv.total_mass() == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(mass_by_quadrature(adv) == doctest::Approx(0.7).epsilon(1e-10));
}

TEST_CASE("adversary JSON round trip") {
  const ContaminationParams p = derive_params(0.8, 0.3);
  const Adversary1D adv = build_moment_matched_adversary(p, 2);
  const Adversary1D back = Adversary1D::from_json(adv.to_json());
  CHECK(back.base_mean() == adv.base_mean());
  CHECK(back.total_mass() == adv.total_mass());
  REQUIRE(back.pieces().size() == adv.pieces().size());
  for (std::size_t i = 0; i < adv.pieces().size(); ++i) {
    CHECK(back.pieces()[i].lo == adv.pieces()[i].lo);
    CHECK(back.pieces()[i].hi == adv.pieces()[i].hi);
    CHECK(back.pieces()[i].scale == adv.pieces()[i].scale);
    CHECK(back.pieces()[i].legendre == adv.pieces()[i].legendre);
  }
  for (double x : {-3.0, -1.0, -0.5, 0.0, 0.7, 1.0, 2.0}) {
    CHECK(back.density(x) == adv.density(x));
  }
}

TEST_CASE("moment-matched adversary: first moment vanishes for m=1") {
  for (auto [eps, dlt] : {std::pair{0.5, 0.1}, {0.9, 0.2}}) {
    const ContaminationParams p = derive_params(eps, dlt);
    const Adversary1D adv = build_moment_matched_adversary(p, 1);
    CHECK(std::abs(adversary_moment(adv, 1)) <= 1e-8);
    CHECK(sandwich_violation(adv) <= 1e-9);
  }
  // Feasibility is not monotone in m: at (0.8, 0.3) the odd-only m=1
  // correction overshoots the upper sandwich at x=-1 while m=2 fits.
  const ContaminationParams p = derive_params(0.8, 0.3);
  CHECK_THROWS_AS(build_moment_matched_adversary(p, 1), MomentBudgetExceededError);
  const Adversary1D adv2 = build_moment_matched_adversary(p, 2);
  CHECK(std::abs(adversary_moment(adv2, 1)) <= 1e-8);
  CHECK(std::abs(adversary_moment(adv2, 2) - 1.0) <= 1e-8);
}

TEST_CASE("moment-matched adversary matches N(0,1) up to m=4 at eps=0.9, delta=0.2") {
  const ContaminationParams p = derive_params(0.9, 0.2);
  const Adversary1D adv = build_moment_matched_adversary(p, 4);
  const double targets[] = {0.0, 1.0, 0.0, 3.0};
  for (int k = 1; k <= 4; ++k) {
    CHECK(std::abs(adversary_moment(adv, k) - targets[k - 1]) <= 1e-8);
    // independent oracle route
    CHECK(std::abs(oracle_adversary_moment(adv, k) - targets[k - 1]) <= 1e-7);
  }
  CHECK(sandwich_violation(adv) <= 1e-9);
  CHECK(adv.total_mass() == doctest::Approx(0.55).epsilon(1e-12));
}

TEST_CASE("moment budget: infeasible orders report the largest feasible one") {
  // At eps=0.8, delta=0.3 the order-3 residual is ~-0.128 while any
  // correction on [-1,1] is capped at ~0.03 by the sandwich: m=4 must fail
  // and the downward search must find m=2.
  const ContaminationParams p = derive_params(0.8, 0.3);
  try {
    build_moment_matched_adversary(p, 4);
    FAIL("expected MomentBudgetExceededError");
  } catch (const MomentBudgetExceededError& e) {
    CHECK(e.requested_m == 4);
    CHECK(e.feasible_m == 2);
  }
  CHECK_NOTHROW(build_moment_matched_adversary(p, 2));
}

TEST_CASE("legendre moment matrix is triangular by degree and parity") {
  const Eigen::MatrixXd G = legendre_moment_matrix(8);
  for (int i = 1; i <= 8; ++i) {
    for (int k = 1; k <= 8; ++k) {
      if (i < k || (i - k) % 2 != 0) {
        CHECK(std::abs(G(i - 1, k - 1)) <= 1e-15);
      }
    }
  }
  // diagonal entries 2^{k+1} (k!)^2 / (2k+1)!
  CHECK(G(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(G(1, 1) == doctest::Approx(4.0 / 15.0).epsilon(1e-14));
  CHECK(G(2, 2) == doctest::Approx(4.0 / 35.0).epsilon(1e-14));
}

TEST_CASE("coupling pair at eps=0.5, delta=0.1") {
  const ContaminationParams p = derive_params(0.5, 0.1);
  const CouplingPair pair = build_coupling_pair(p);
  CHECK(pair.threshold_t == doctest::Approx(6.9314718055994531).epsilon(1e-14));
  CHECK(std::abs(pair.q1.total_mass() - pair.q2.total_mass()) <= 1e-9);
  CHECK(sandwich_violation(pair.q1) <= 1e-9);
  CHECK(sandwich_violation(pair.q2) <= 1e-9);
  // q1 == q2 pointwise on [-t, t]
  for (int i = 0; i <= 200; ++i) {
    const double x = -pair.threshold_t + 2 * pair.threshold_t * i / 200.0;
    CHECK(pair.q1.density(x) == doctest::Approx(pair.q2.density(x)).epsilon(1e-13));
  }
  // reflection symmetry q1(x) = q2(-x)
  for (double x : {-8.0, -3.2, -1.0, 0.3, 2.0, 7.5}) {
    CHECK(pair.q1.density(x) == doctest::Approx(pair.q2.density(-x)).epsilon(1e-13));
  }
}

TEST_CASE("coupling pair TV: closed form equals quadrature") {
  for (auto [eps, dlt] : {std::pair{0.5, 0.5}, {0.7, 0.3}}) {
    const ContaminationParams p = derive_params(eps, dlt);
    const CouplingPair pair = build_coupling_pair(p);
    const double closed = coupling_tv_closed_form(pair, eps, dlt);
    const double quad = tv_distance_1d(pair.q1, pair.q2, 1e-10);
    CHECK(std::abs(closed - quad) <= 1e-6);
  }
  // frozen value (extended-precision recomputation): eps=0.5, delta=0.5
  const ContaminationParams p = derive_params(0.5, 0.5);
  const CouplingPair pair = build_coupling_pair(p);
  CHECK(coupling_tv_closed_form(pair, 0.5, 0.5) ==
        doctest::Approx(1.6023100983e-02).epsilon(1e-7));
  CHECK(pair.alpha == doctest::Approx(0.81565670).epsilon(1e-7));
}

TEST_CASE("coupling pair rejects delta^2 > ln(1+eps/(1-eps))") {
  const ContaminationParams p = derive_params(0.1, 1.2);
  CHECK_THROWS_AS(build_coupling_pair(p), ParameterDomainError);
}

TEST_CASE("censoring: null adversary never deletes, ratios stay in range") {
  const Adversary1D nul = null_adversary(0.5, 0.3);
  RandomStream rng(77);
  for (int i = 0; i < 2000; ++i) {
    const ObservedSample s = censor_sample(nul, 0.3 + rng.normal(), rng);
    CHECK_FALSE(s.missing);
  }
  const ContaminationParams p = derive_params(0.5, 0.25);
  const Adversary1D tail = build_tail_adversary(p, 0.25);
  for (int i = 0; i < 500; ++i) {
    const double x = -6.0 + i * 12.0 / 499.0;
    const double r = tail.retention(x);
    CHECK(r >= 0.5 - 1e-9);
    CHECK(r <= 1.0 + 1e-9);
    CHECK(r == doctest::Approx(tail.density(x) / tail.clean_pdf(x)).epsilon(1e-9));
  }
  // central-piece ratio in closed form: (1-eps/2) p_-(x)/p_+(x), strictly
  // inside (1-eps, 1)
  const double x = 0.25 / 2;
  CHECK(tail.retention(x) ==
        doctest::Approx(0.75 * norm_pdf(x) / norm_pdf(x - 0.25)).epsilon(1e-12));
  CHECK(tail.retention(x) > 0.5);
  CHECK(tail.retention(x) < 1.0);
}

TEST_CASE("censoring deletes at rate 1 - total_mass") {
  const ContaminationParams p = derive_params(0.6, 0.3);
  const Adversary1D adv = build_tail_adversary(p, 1.0);
  RandomStream rng(123);
  const std::size_t n = 100000;
  std::size_t missing = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (censor_sample(adv, 1.0 + rng.normal(), rng).missing) ++missing;
  }
  const double rate = static_cast<double>(missing) / n;
  const double truth = 1.0 - adv.total_mass();
  const double sigma = std::sqrt(truth * (1 - truth) / n);
  CHECK(std::abs(rate - truth) <= 4 * sigma);
}

TEST_CASE("hidden-direction sampling: clean case is N(0, I)") {
  const Adversary1D nul = null_adversary(0.3, 0.0);
  Eigen::VectorXd v(4);
  v << 0.5, -0.5, 0.5, 0.5;
  RandomStream rng(31);
  const std::size_t n = 40000;
  const Dataset data = sample_hidden_direction(nul, v, n, rng);
  CHECK(data.missing_count() == 0);
  const Eigen::VectorXd mean = data.visible_mean();
  CHECK(mean.norm() <= 3 * std::sqrt(4.0 / n));
}

TEST_CASE("hidden-direction sampling reduces to 1D censoring at d=1") {
  const ContaminationParams p = derive_params(0.5, 0.25);
  const Adversary1D adv = build_tail_adversary(p, 0.7);
  Eigen::VectorXd v(1);
  v << 1.0;
  RandomStream a(555);
  const Dataset data = sample_hidden_direction(adv, v, 2000, a);
  // replay the stream by hand: at d=1 each sample consumes (g1, uniform)
  RandomStream b(555);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double y = 0.7 + b.normal();
    const bool visible = b.uniform() <= adv.retention(y);
    REQUIRE(visible == !data.is_missing(i));
    if (visible) CHECK(data.row(i)[0] == doctest::Approx(y).epsilon(1e-15));
  }
}

TEST_CASE("hidden-direction sampling preserves the matched moments along v") {
  const ContaminationParams p = derive_params(0.9, 0.2);
  const Adversary1D adv = build_moment_matched_adversary(p, 4, 0.2, false);
  const int d = 3;
  Eigen::VectorXd v(d);
  v << 2.0, -1.0, 0.5;
  v.normalize();
  RandomStream rng(860);
  const Dataset data = sample_hidden_direction(adv, v, 1000000, rng);
  // projections onto v of visible samples, shifted back to the matched frame
  const std::vector<double> proj = data.project_visible(v);
  const double center = adv.base_mean() - p.delta;
  for (int k = 1; k <= 4; ++k) {
    long double sum = 0.0L, sumsq = 0.0L;
    for (double x : proj) {
      long double pw = 1.0L;
      for (int j = 0; j < k; ++j) pw *= (x - center);
      sum += pw;
      sumsq += pw * pw;
    }
    const double mean = static_cast<double>(sum / proj.size());
    const double var =
        std::max(1e-12, static_cast<double>(sumsq / proj.size()) - mean * mean);
    const double tol = 4.0 * std::sqrt(var / proj.size());
    CHECK(std::abs(mean - gaussian_raw_moment(k)) <= tol);
  }
}

TEST_CASE("hidden-direction sampling rejects non-unit directions") {
  const Adversary1D nul = null_adversary(0.3, 0.0);
  Eigen::VectorXd v(3);
  v << 1.0, 0.5, 0.0;
  RandomStream rng(1);
  CHECK_THROWS_AS(sample_hidden_direction(nul, v, 10, rng), ParameterDomainError);
}

TEST_CASE("hidden-direction orthogonal covariance is near identity") {
  const ContaminationParams p = derive_params(0.5, 0.25);
  const Adversary1D adv = build_tail_adversary(p, 1.0);
  const int d = 3;
  Eigen::VectorXd v(d);
  v << 1.0, 0.0, 0.0;
  RandomStream rng(99);
  const std::size_t n = 60000;
  const Dataset data = sample_hidden_direction(adv, v, n, rng);
  // empirical covariance of the orthogonal component (coordinates 1, 2)
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d - 1, d - 1);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d - 1);
  std::size_t m = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.is_missing(i)) continue;
    const Eigen::VectorXd y = data.row(i).tail(d - 1);
    mean += y;
    cov += y * y.transpose();
    ++m;
  }
  mean /= static_cast<double>(m);
  cov = cov / static_cast<double>(m) - mean * mean.transpose();
  const Eigen::MatrixXd dev = cov - Eigen::MatrixXd::Identity(d - 1, d - 1);
  CHECK(op_norm_upper_bound(dev) <= 5 * std::sqrt(static_cast<double>(d) / n) * 3);
}
