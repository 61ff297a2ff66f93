#include "contam/moments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "contam/errors.hpp"
#include "contam/hermite.hpp"
#include "contam/quadrature.hpp"

namespace contam {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTailWidth = 42.0;

double sqrt_factorial(int t) {
  double f = 1.0;
  for (int j = 2; j <= t; ++j) f *= j;
  return std::sqrt(f);
}

/// int over one piece of w(x) * f_piece(x) where w is x^k or h_t. The
/// full-line Gaussian integral of the weight (for tails) comes from `full`.
double piece_weighted_integral(const AdversaryPiece& p,
                               const std::function<double(double)>& weight, double full_gauss,
                               double abs_tol) {
  auto integrand = [&](double x) { return weight(x) * p.eval(x); };
  const bool lo_inf = p.lo == -kInf, hi_inf = p.hi == kInf;
  if (!lo_inf && !hi_inf) return integrate_adaptive(integrand, p.lo, p.hi, abs_tol);
  auto gauss_part = [&](double x) { return weight(x) * p.scale * norm_pdf(x - p.shift); };
  if (lo_inf && hi_inf) return p.scale * full_gauss;
  if (lo_inf) {
    if (p.hi >= p.shift + kTailWidth) return p.scale * full_gauss;
    if (p.hi <= p.shift - kTailWidth) return 0.0;
    return p.scale * full_gauss -
           integrate_adaptive(gauss_part, p.hi, p.shift + kTailWidth, abs_tol);
  }
  if (p.lo <= p.shift - kTailWidth) return p.scale * full_gauss;
  if (p.lo >= p.shift + kTailWidth) return 0.0;
  return p.scale * full_gauss -
         integrate_adaptive(gauss_part, p.shift - kTailWidth, p.lo, abs_tol);
}

double weighted_visible_expectation(const Adversary1D& adv,
                                    const std::function<double(double)>& weight,
                                    const std::function<double(double)>& full_gauss_of_shift,
                                    double abs_tol) {
  long double num = 0.0L, den = 0.0L;
  for (const AdversaryPiece& p : adv.pieces()) {
    num += piece_weighted_integral(p, weight, full_gauss_of_shift(p.shift), abs_tol);
    den += tail_poly_moment(0, p.lo, p.hi, p.scale, p.shift, abs_tol);
    if (p.has_legendre()) {
      // the Gaussian part is handled above; add the polynomial correction mass
      auto corr = [&p](double x) { return p.eval(x) - p.scale * norm_pdf(x - p.shift); };
      den += integrate_adaptive(corr, p.lo, p.hi, abs_tol);
    }
  }
  if (den <= 0.0) throw NumericError("adversary moment: nonpositive visible mass");
  return static_cast<double>(num / den);
}

}  // namespace

double adversary_moment(const Adversary1D& adv, int k, double abs_tol) {
  if (k < 0 || k > 64) throw ParameterDomainError("adversary_moment: order must be in [0,64]");
  auto weight = [k](double x) {
    double p = 1.0;
    for (int j = 0; j < k; ++j) p *= x;
    return p;
  };
  auto full = [k](double mu) { return gauss_hermite_poly_moment(k, mu); };
  return weighted_visible_expectation(adv, weight, full, abs_tol);
}

double adversary_hermite_moment(const Adversary1D& adv, int t, double abs_tol) {
  auto weight = [t](double x) { return hermite_poly_eval(t, x); };
  // E_{N(mu,1)}[h_t] = mu^t / sqrt(t!)
  auto full = [t](double mu) { return std::pow(mu, t) / sqrt_factorial(t); };
  return weighted_visible_expectation(adv, weight, full, abs_tol);
}

MomentReport moment_report_quadrature(const Adversary1D& adv, const std::vector<int>& orders,
                                      double abs_tol) {
  MomentReport r;
  r.method = "quadrature";
  for (int k : orders) {
    r.orders.push_back(k);
    r.target.push_back(gaussian_raw_moment(k));
    r.achieved.push_back(adversary_moment(adv, k, abs_tol));
    r.residuals.push_back(r.achieved.back() - r.target.back());
  }
  return r;
}

MomentReport moment_report_monte_carlo(const Adversary1D& adv, const std::vector<int>& orders,
                                       std::size_t n, RandomStream& rng,
                                       std::vector<double>* standard_errors) {
  const int kmax = orders.empty() ? 0 : *std::max_element(orders.begin(), orders.end());
  std::vector<long double> sum(kmax + 1, 0.0L), sumsq(kmax + 1, 0.0L);
  std::size_t visible = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = adv.base_mean() + rng.normal();
    if (rng.uniform() > adv.retention(x)) continue;
    ++visible;
    long double p = 1.0L;
    for (int k = 1; k <= kmax; ++k) {
      p *= x;
      sum[k] += p;
      sumsq[k] += p * p;
    }
  }
  if (visible == 0) throw EmptyDataError("moment_report_monte_carlo: no visible draws");
  MomentReport r;
  r.method = "monte-carlo";
  if (standard_errors) standard_errors->clear();
  for (int k : orders) {
    const double mean = static_cast<double>(sum[k] / visible);
    r.orders.push_back(k);
    r.target.push_back(gaussian_raw_moment(k));
    r.achieved.push_back(k == 0 ? 1.0 : mean);
    r.residuals.push_back(r.achieved.back() - r.target.back());
    if (standard_errors) {
      const double var =
          std::max(0.0, static_cast<double>(sumsq[k] / visible) - mean * mean);
      standard_errors->push_back(std::sqrt(var / static_cast<double>(visible)));
    }
  }
  return r;
}

GapResult verify_moment_gap(const ContaminationParams& params, const Adversary1D& adv, int k) {
  if (k % 2 != 0) throw ParameterDomainError("verify_moment_gap: k must be even");
  if (std::abs(adv.base_mean() - params.delta) > 1e-12) {
    throw ParameterDomainError("verify_moment_gap: adversary must corrupt N(delta, 1)");
  }
  const double gamma_p = std::log1p(2 * params.epsilon / (1 - params.epsilon)) / params.delta;
  if (k < params.C * gamma_p * gamma_p) {
    std::ostringstream os;
    os << "verify_moment_gap: k=" << k << " below C*gamma'^2=" << params.C * gamma_p * gamma_p;
    throw ParameterDomainError(os.str());
  }
  GapResult g;
  g.gap = adversary_moment(adv, k) - gaussian_raw_moment(k);
  g.pass = g.gap > params.epsilon;
  return g;
}

double hermite_gap_threshold(double epsilon, int k) {
  if (k < 0) throw ParameterDomainError("hermite_gap_threshold: k must be >= 0");
  return epsilon / std::pow(k + 1.0, k / 2.0);
}

double tv_distance_1d(const std::function<double(double)>& f1,
                      const std::function<double(double)>& f2,
                      const std::vector<double>& breakpoints, double lo, double hi,
                      double abs_tol) {
  std::vector<double> pts{lo, hi};
  for (double b : breakpoints) {
    if (b > lo && b < hi) pts.push_back(b);
  }
  std::sort(pts.begin(), pts.end());
  auto mass = [&](const std::function<double(double)>& f) {
    long double m = 0.0L;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      m += integrate_adaptive(f, pts[i], pts[i + 1], 0.1 * abs_tol);
    }
    return static_cast<double>(m);
  };
  const double m1 = mass(f1), m2 = mass(f2);
  if (std::abs(m1 - m2) > 1e-9) {
    throw ParameterDomainError("tv_distance_1d: masses disagree beyond 1e-9");
  }
  auto diff = [&](double x) { return std::abs(f1(x) / m1 - f2(x) / m2); };
  long double tv = 0.0L;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    tv += integrate_adaptive(diff, pts[i], pts[i + 1], 0.1 * abs_tol);
  }
  return 0.5 * static_cast<double>(tv);
}

double tv_distance_1d(const Adversary1D& a1, const Adversary1D& a2, double abs_tol) {
  std::vector<double> pts;
  double lo = a1.base_mean(), hi = a1.base_mean();
  for (const Adversary1D* a : {&a1, &a2}) {
    for (const AdversaryPiece& p : a->pieces()) {
      if (p.lo != -kInf) {
        pts.push_back(p.lo);
        lo = std::min(lo, p.lo);
        hi = std::max(hi, p.lo);
      }
      lo = std::min(lo, p.shift);
      hi = std::max(hi, p.shift);
    }
  }
  return tv_distance_1d([&a1](double x) { return a1.density(x); },
                        [&a2](double x) { return a2.density(x); }, pts, lo - kTailWidth,
                        hi + kTailWidth, abs_tol);
}

NormCertificate tensor_norm_certificate(const ContaminationParams& params, int t,
                                        double empirical_norm, double c1, double c2) {
  const double L = std::log(1.0 / (1.0 - params.epsilon));
  const double inv = 1.0 / (1.0 - params.epsilon);
  NormCertificate c;
  c.bound = inv * std::pow(c1 * L, t / 2.0) + inv * std::exp(c2 * t * L);
  c.pass = empirical_norm <= c.bound;
  return c;
}

std::string MomentReport::to_json() const {
  nlohmann::json j{{"orders", orders},
                   {"target", target},
                   {"achieved", achieved},
                   {"residuals", residuals},
                   {"method", method}};
  return j.dump(2);
}

std::string MomentReport::to_csv() const {
  std::ostringstream os;
  os << "order,target,achieved,residual,method\n";
  char buf[128];
  for (std::size_t i = 0; i < orders.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%s\n", orders[i], target[i],
                  achieved[i], residuals[i], method.c_str());
    os << buf;
  }
  return os.str();
}

}  // namespace contam
