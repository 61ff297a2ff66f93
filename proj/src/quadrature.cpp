#include "contam/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>

#include "contam/errors.hpp"
#include "contam/gaussian.hpp"

namespace contam {

namespace {

GaussRule make_gauss_legendre(int n) {
  // Newton iteration on P_n, standard initial guesses from Chebyshev angles.
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

GaussRule make_gauss_hermite(int n) {
  // Golub-Welsch on the symmetric Jacobi matrix; weight function exp(-u^2).
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double beta = std::sqrt(i / 2.0);
    J(i, i - 1) = beta;
    J(i - 1, i) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mu0 = std::sqrt(M_PI);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v0 * v0;
  }
  return rule;
}

template <typename F>
const GaussRule& cached_rule(std::map<int, GaussRule>& cache, std::mutex& mtx, int n, F make) {
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make(n)).first;
  return it->second;
}

struct AdaptiveState {
  const std::function<double(double)>* f;
  const GaussRule* rule;
  double tol;
  int max_depth;
  long double sum = 0.0L;
  long double comp = 0.0L;  // Kahan compensation
  double worst_err = 0.0;

  double segment(double a, double b) const {
    const double h = 0.5 * (b - a), c = 0.5 * (a + b);
    long double s = 0.0L;
    for (std::size_t i = 0; i < rule->nodes.size(); ++i) {
      s += rule->weights[i] * (*f)(c + h * rule->nodes[i]);
    }
    return static_cast<double>(s * h);
  }

  void add(double v) {
    const long double y = v - comp;
    const long double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }

  void recurse(double a, double b, double whole, double tol_local, int depth) {
    const double m = 0.5 * (a + b);
    const double left = segment(a, m), right = segment(m, b);
    const double err = std::abs(left + right - whole);
    if (err <= tol_local || depth >= max_depth) {
      if (depth >= max_depth && err > tol_local) worst_err = std::max(worst_err, err);
      add(left);
      add(right);
      return;
    }
    recurse(a, m, left, 0.5 * tol_local, depth + 1);
    recurse(m, b, right, 0.5 * tol_local, depth + 1);
  }
};

constexpr double kTailWidth = 42.0;  // phi underflows far before this

}  // namespace

const GaussRule& gauss_legendre_rule(int n) {
  static std::map<int, GaussRule> cache;
  static std::mutex mtx;
  return cached_rule(cache, mtx, n, make_gauss_legendre);
}

const GaussRule& gauss_hermite_rule(int n) {
  static std::map<int, GaussRule> cache;
  static std::mutex mtx;
  return cached_rule(cache, mtx, n, make_gauss_hermite);
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, int max_depth) {
  if (!(a <= b)) throw ParameterDomainError("integrate_adaptive: need a <= b");
  if (a == b) return 0.0;
  AdaptiveState st;
  st.f = &f;
  st.rule = &gauss_legendre_rule(15);
  st.max_depth = max_depth;
  const double whole = st.segment(a, b);
  // Relative floor keeps huge integrands (high moments) from demanding
  // sub-machine absolute accuracy.
  const double tol = std::max(abs_tol, 1e-14 * std::abs(whole));
  st.tol = tol;
  st.recurse(a, b, whole, tol, 0);
  if (st.worst_err > 100 * tol) {
    throw QuadratureError("integrate_adaptive: refinement budget exhausted", st.worst_err);
  }
  return static_cast<double>(st.sum);
}

double gauss_hermite_poly_moment(int k, double mu) {
  if (k < 0 || k > 64) {
    throw ParameterDomainError("gauss_hermite_poly_moment: order must be in [0, 64]");
  }
  const int n = std::max(40, k / 2 + 4);
  const GaussRule& rule = gauss_hermite_rule(n);
  // x = mu + sqrt(2) u;  int x^k phi(x-mu) dx = (1/sqrt(pi)) int e^{-u^2} (mu+sqrt2 u)^k du
  const double s2 = std::sqrt(2.0);
  long double sum = 0.0L;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = mu + s2 * rule.nodes[i];
    long double p = 1.0L;
    for (int j = 0; j < k; ++j) p *= x;
    sum += rule.weights[i] * p;
  }
  return static_cast<double>(sum / std::sqrt(M_PI));
}

double tail_poly_moment(int k, double lo, double hi, double scale, double mu, double abs_tol) {
  const bool lo_inf = std::isinf(lo), hi_inf = std::isinf(hi);
  auto integrand = [k, scale, mu](double x) {
    double p = 1.0;
    for (int j = 0; j < k; ++j) p *= x;
    return p * scale * norm_pdf(x - mu);
  };
  if (!lo_inf && !hi_inf) {
    return integrate_adaptive(integrand, lo, hi, abs_tol);
  }
  const double full = scale * gauss_hermite_poly_moment(k, mu);
  if (lo_inf && hi_inf) return full;
  if (lo_inf) {
    // int_{-inf}^{hi} = full - int_{hi}^{inf}
    if (hi >= mu + kTailWidth) return full;
    if (hi <= mu - kTailWidth) return 0.0;
    return full - integrate_adaptive(integrand, hi, mu + kTailWidth, abs_tol);
  }
  // int_{lo}^{inf} = full - int_{-inf}^{lo}
  if (lo <= mu - kTailWidth) return full;
  if (lo >= mu + kTailWidth) return 0.0;
  return full - integrate_adaptive(integrand, mu - kTailWidth, lo, abs_tol);
}

}  // namespace contam
