#include "contam/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "contam/errors.hpp"
#include "contam/gaussian.hpp"
#include "contam/legendre.hpp"
#include "contam/quadrature.hpp"

namespace contam {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

nlohmann::json bound_to_json(double b) {
  if (b == kInf) return "inf";
  if (b == -kInf) return "-inf";
  return b;
}

double bound_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw ConfigError("Adversary1D: bad interval bound '" + s + "'");
  }
  return j.get<double>();
}
}  // namespace

double AdversaryPiece::eval(double x) const {
  double v = scale * norm_pdf(x - shift);
  if (!legendre.empty()) {
    const double y = x - center();
    const std::vector<double> P = legendre_all(static_cast<int>(legendre.size()) - 1, y);
    for (std::size_t k = 1; k < legendre.size(); ++k) v += legendre[k] * P[k];
  }
  return v;
}

double AdversaryPiece::mass() const {
  return scale * (norm_cdf(hi - shift) - norm_cdf(lo - shift));
}

Adversary1D::Adversary1D(double base_mean, double epsilon, std::vector<AdversaryPiece> pieces,
                         double total_mass)
    : base_mean_(base_mean), epsilon_(epsilon), total_mass_(total_mass),
      pieces_(std::move(pieces)) {
  if (!(epsilon_ >= 0.0 && epsilon_ < 1.0)) {
    throw ParameterDomainError("Adversary1D: epsilon must lie in [0,1)");
  }
  if (pieces_.empty()) throw ParameterDomainError("Adversary1D: no pieces");
  if (pieces_.front().lo != -kInf || pieces_.back().hi != kInf) {
    throw ParameterDomainError("Adversary1D: pieces must span the real line");
  }
  for (std::size_t i = 1; i < pieces_.size(); ++i) {
    if (pieces_[i].lo != pieces_[i - 1].hi) {
      throw ParameterDomainError("Adversary1D: pieces must be contiguous");
    }
  }
  if (!(total_mass_ >= 1 - epsilon_ - 1e-9 && total_mass_ <= 1 + 1e-9)) {
    throw ParameterDomainError("Adversary1D: total mass out of [1-eps, 1]");
  }
}

double Adversary1D::density(double x) const {
  for (const AdversaryPiece& p : pieces_) {
    if (x < p.hi || p.hi == kInf) return p.eval(x);
  }
  return pieces_.back().eval(x);
}

double Adversary1D::clean_pdf(double x) const { return norm_pdf(x - base_mean_); }

double Adversary1D::retention(double x) const {
  for (const AdversaryPiece& p : pieces_) {
    if (x < p.hi || p.hi == kInf) {
      const double dx_clean = x - base_mean_;
      const double dx_piece = x - p.shift;
      double r = p.scale * std::exp(0.5 * (dx_clean * dx_clean - dx_piece * dx_piece));
      if (p.has_legendre()) {
        const double y = x - p.center();
        const std::vector<double> P =
            legendre_all(static_cast<int>(p.legendre.size()) - 1, y);
        double corr = 0.0;
        for (std::size_t k = 1; k < p.legendre.size(); ++k) corr += p.legendre[k] * P[k];
        r += corr / norm_pdf(dx_clean);
      }
      return std::clamp(r, 0.0, 1.0);
    }
  }
  return 1.0;
}

Adversary1D Adversary1D::shifted(double offset) const {
  std::vector<AdversaryPiece> ps = pieces_;
  for (AdversaryPiece& p : ps) {
    if (p.lo != -kInf) p.lo += offset;
    if (p.hi != kInf) p.hi += offset;
    p.shift += offset;
  }
  return Adversary1D(base_mean_ + offset, epsilon_, std::move(ps), total_mass_);
}

std::string Adversary1D::to_json() const {
  nlohmann::json pieces = nlohmann::json::array();
  for (const AdversaryPiece& p : pieces_) {
    nlohmann::json jp{{"lo", bound_to_json(p.lo)},
                      {"hi", bound_to_json(p.hi)},
                      {"kind", p.has_legendre() ? "gaussian_legendre" : "gaussian"},
                      {"scale", p.scale},
                      {"shift", p.shift}};
    if (p.has_legendre()) jp["coeffs"] = p.legendre;
    pieces.push_back(std::move(jp));
  }
  nlohmann::json j{{"base_mean", base_mean_},
                   {"epsilon", epsilon_},
                   {"pieces", std::move(pieces)},
                   {"total_mass", total_mass_}};
  return j.dump(2);
}

Adversary1D Adversary1D::from_json(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    std::vector<AdversaryPiece> pieces;
    for (const auto& jp : j.at("pieces")) {
      AdversaryPiece p;
      p.lo = bound_from_json(jp.at("lo"));
      p.hi = bound_from_json(jp.at("hi"));
      p.scale = jp.at("scale").get<double>();
      p.shift = jp.at("shift").get<double>();
      const std::string kind = jp.at("kind").get<std::string>();
      if (kind == "gaussian_legendre") {
        p.legendre = jp.at("coeffs").get<std::vector<double>>();
      } else if (kind != "gaussian") {
        throw ConfigError("Adversary1D: unknown piece kind '" + kind + "'");
      }
      pieces.push_back(std::move(p));
    }
    return Adversary1D(j.at("base_mean").get<double>(), j.at("epsilon").get<double>(),
                       std::move(pieces), j.at("total_mass").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("Adversary1D: bad JSON: ") + e.what());
  }
}

Adversary1D uniform_deletion_adversary(double epsilon, double deletion, double base_mean) {
  if (!(deletion >= 0.0 && deletion <= epsilon)) {
    throw ParameterDomainError("uniform_deletion_adversary: deletion must lie in [0, eps]");
  }
  AdversaryPiece p{-kInf, kInf, 1.0 - deletion, base_mean, {}};
  return Adversary1D(base_mean, epsilon, {p}, 1.0 - deletion);
}

Adversary1D null_adversary(double epsilon, double base_mean) {
  return uniform_deletion_adversary(epsilon, 0.0, base_mean);
}

Adversary1D build_tail_adversary(const ContaminationParams& params, double base_mean) {
  const double eps = params.epsilon, dlt = params.delta, B = params.B;
  // Construction frame: clean N(delta, 1), visible core N(0,1).
  const double a = -B + dlt / 2, b = B + dlt / 2;
  const double left = norm_cdf(a - dlt);
  const double central = (1 - eps / 2) * (norm_cdf(b) - norm_cdf(a));
  const double right_base = norm_cdf(-(b - dlt));
  if (right_base <= 0.0) {
    throw ConstructionInfeasibleError("tail adversary: right tail mass underflows");
  }
  const double lambda = (1 - eps / 2 - left - central) / right_base;
  if (!(lambda >= 1 - eps - 1e-12 && lambda <= 1 + 1e-12)) {
    std::ostringstream os;
    os << "tail adversary: interpolation factor " << lambda << " outside [1-eps, 1]";
    throw ConstructionInfeasibleError(os.str());
  }
  std::vector<AdversaryPiece> pieces{
      {-kInf, a, 1.0, dlt, {}},
      {a, b, 1 - eps / 2, 0.0, {}},
      {b, kInf, std::clamp(lambda, 1 - eps, 1.0), dlt, {}},
  };
  Adversary1D adv(dlt, eps, std::move(pieces), 1 - eps / 2);
  return adv.shifted(base_mean - dlt);
}

namespace {

/// Residuals R_i = (1-eps/2) E_{N(0,1)}[x^i] - int x^i g(x) dx for the
/// construction-frame tail density g, i = 1..m.
Eigen::VectorXd correction_residuals(const Adversary1D& g_frame, double eps, int m) {
  Eigen::VectorXd R(m);
  for (int i = 1; i <= m; ++i) {
    double gi = 0.0;
    for (const AdversaryPiece& p : g_frame.pieces()) {
      gi += tail_poly_moment(i, p.lo, p.hi, p.scale, p.shift, 1e-12);
    }
    R(i - 1) = (1 - eps / 2) * gaussian_raw_moment(i) - gi;
  }
  return R;
}

struct CorrectionCheck {
  bool ok = false;
  double sup_p = 0.0;
  double sandwich = 0.0;
};

CorrectionCheck check_correction(const Adversary1D& adv, double slack_bound) {
  CorrectionCheck c;
  for (const AdversaryPiece& p : adv.pieces()) {
    if (!p.has_legendre()) continue;
    const int mm = static_cast<int>(p.legendre.size()) - 1;
    for (int t = 0; t <= 2000; ++t) {
      const double y = -1.0 + t / 1000.0;
      const std::vector<double> P = legendre_all(mm, y);
      double val = 0.0;
      for (int k = 1; k <= mm; ++k) val += p.legendre[k] * P[k];
      c.sup_p = std::max(c.sup_p, std::abs(val));
    }
  }
  c.sandwich = sandwich_violation(adv);
  c.ok = c.sup_p <= slack_bound && c.sandwich <= 1e-9;
  return c;
}

Adversary1D corrected_adversary(const Adversary1D& g_frame, const ContaminationParams& params,
                                const Eigen::VectorXd& coeffs_full, int m) {
  // Split the central piece at the unit correction window about 0.
  const double eps = params.epsilon;
  std::vector<AdversaryPiece> pieces;
  for (const AdversaryPiece& p : g_frame.pieces()) {
    if (p.shift != 0.0 || p.has_legendre()) {
      pieces.push_back(p);
      continue;
    }
    if (!(p.lo <= -1.0 && p.hi >= 1.0)) {
      throw ConstructionInfeasibleError(
          "moment-matched adversary: correction window exceeds the matched core "
          "(need B - delta/2 >= 1)");
    }
    std::vector<double> legendre(m + 1, 0.0);
    for (int k = 1; k <= m; ++k) legendre[k] = coeffs_full(k - 1);
    if (p.lo < -1.0) pieces.push_back({p.lo, -1.0, p.scale, 0.0, {}});
    pieces.push_back({-1.0, 1.0, p.scale, 0.0, std::move(legendre)});
    if (p.hi > 1.0) pieces.push_back({1.0, p.hi, p.scale, 0.0, {}});
  }
  return Adversary1D(g_frame.base_mean(), eps, std::move(pieces), g_frame.total_mass());
}

}  // namespace

Adversary1D build_moment_matched_adversary(const ContaminationParams& params, int m,
                                           double base_mean, bool base_mean_is_delta,
                                           double slack) {
  if (m < 1) throw ParameterDomainError("build_moment_matched_adversary: m must be >= 1");
  if (m > 32) throw CapabilityError("build_moment_matched_adversary: m capped at 32");
  const double base = base_mean_is_delta ? params.delta : base_mean;
  // Everything is solved in the construction frame (clean mean = delta,
  // target = N(0,1)); the result is shifted to the requested base mean.
  const Adversary1D g = build_tail_adversary(params, params.delta);
  const Eigen::VectorXd R = correction_residuals(g, params.epsilon, m);
  const Eigen::MatrixXd G = legendre_moment_matrix(m);

  const double slack_bound = slack * params.epsilon;
  int feasible = 0;
  for (int mm = m; mm >= 1; --mm) {
    const Eigen::VectorXd a =
        G.topLeftCorner(mm, mm).fullPivLu().solve(R.head(mm));
    Adversary1D cand = corrected_adversary(g, params, a, mm);
    const CorrectionCheck chk = check_correction(cand, slack_bound);
    if (chk.ok) {
      if (mm == m) return cand.shifted(base - params.delta);
      feasible = mm;
      break;
    }
  }
  std::ostringstream os;
  os << "moment budget exceeded: order " << m << " violates the correction bounds; "
     << "largest feasible order is " << feasible;
  throw MomentBudgetExceededError(os.str(), m, feasible);
}

CouplingPair build_coupling_pair(const ContaminationParams& params) {
  const double eps = params.epsilon, dlt = params.delta;
  if (!(dlt * dlt <= std::log1p(eps / (1 - eps)))) {
    throw ParameterDomainError(
        "build_coupling_pair: requires delta^2 <= ln(1 + eps/(1-eps))");
  }
  const double t = params.gamma;  // ln(1+eps/(1-eps))/delta
  const double h = dlt / 2;
  std::vector<AdversaryPiece> q1p{
      {-kInf, -t, 1 - eps, -h, {}},
      {-t, 0.0, 1.0, +h, {}},
      {0.0, kInf, 1.0, -h, {}},
  };
  std::vector<AdversaryPiece> q2p{
      {-kInf, 0.0, 1.0, +h, {}},
      {0.0, t, 1.0, -h, {}},
      {t, kInf, 1 - eps, +h, {}},
  };
  auto mass = [](const std::vector<AdversaryPiece>& ps) {
    double s = 0.0;
    for (const AdversaryPiece& p : ps) s += p.mass();
    return s;
  };
  const double a1 = mass(q1p), a2 = mass(q2p);
  if (std::abs(a1 - a2) > 1e-9) {
    throw NumericError("build_coupling_pair: masses of q1 and q2 disagree");
  }
  CouplingPair pair{Adversary1D(-h, eps, std::move(q1p), a1),
                    Adversary1D(+h, eps, std::move(q2p), a2), t, 0.5 * (a1 + a2)};
  return pair;
}

double coupling_tv_closed_form(const CouplingPair& pair, double epsilon, double delta) {
  const double t = pair.threshold_t, h = delta / 2;
  return ((1 - epsilon) * norm_cdf(-t + h) - norm_cdf(-t - h)) / pair.alpha;
}

ObservedSample censor_sample(const Adversary1D& adv, double x, RandomStream& rng) {
  const double r = adv.retention(x);
  if (rng.uniform() <= r) {
    Eigen::VectorXd v(1);
    v[0] = x;
    return ObservedSample::make_value(std::move(v));
  }
  return ObservedSample::make_missing();
}

namespace {

// Flattened retention table: within each piece the Gaussian ratio is
// scale * exp(alpha x + beta); unit pieces (f == p there) skip the exp.
struct RetentionTable {
  struct Row {
    double hi;
    double scale, alpha, beta;
    bool constant;     // alpha == beta == 0
    bool exact = true;  // false for Legendre pieces: fall back to retention()
  };
  std::vector<Row> rows;
  const Adversary1D* adv;

  explicit RetentionTable(const Adversary1D& a) : adv(&a) {
    const double base = a.base_mean();
    for (const AdversaryPiece& p : a.pieces()) {
      Row r;
      r.hi = p.hi;
      r.scale = p.scale;
      // ((x-base)^2 - (x-shift)^2)/2 = (shift - base) x + (base^2 - shift^2)/2
      r.alpha = p.shift - base;
      r.beta = 0.5 * (base * base - p.shift * p.shift);
      r.constant = r.alpha == 0.0 && r.beta == 0.0;
      r.exact = !p.has_legendre();
      rows.push_back(r);
    }
  }

  double operator()(double x) const {
    for (const Row& r : rows) {
      if (x < r.hi || std::isinf(r.hi)) {
        if (!r.exact) return adv->retention(x);
        if (r.constant) return r.scale;
        const double v = r.scale * std::exp(r.alpha * x + r.beta);
        return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
      }
    }
    return 1.0;
  }
};

}  // namespace

Dataset sample_hidden_direction(const Adversary1D& adv, const Eigen::VectorXd& v,
                                std::size_t n, RandomStream& rng) {
  const int d = static_cast<int>(v.size());
  if (std::abs(v.norm() - 1.0) > 1e-12) {
    throw ParameterDomainError("sample_hidden_direction: direction must be a unit vector");
  }
  const RetentionTable retain(adv);
  Dataset data(d, 0);
  data.reserve(n);
  if (d == 1) {
    // the orthogonal complement is empty: the draw reduces to 1D censoring
    const double sign = v[0];
    for (std::size_t i = 0; i < n; ++i) {
      const double y = adv.base_mean() + rng.normal();
      if (rng.uniform() <= retain(y)) {
        data.push_value_1d(y * sign);
      } else {
        data.push_missing();
      }
    }
    return data;
  }
  Eigen::VectorXd z(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) z[j] = rng.normal();
    const double y = adv.base_mean() + rng.normal();
    if (rng.uniform() <= retain(y)) {
      data.push_value(y * v + (z - (v.dot(z)) * v));
    } else {
      data.push_missing();
    }
  }
  return data;
}

double sandwich_violation(const Adversary1D& adv, double lo, double hi, int n_points) {
  const double eps = adv.epsilon();
  double worst = 0.0;
  for (int i = 0; i < n_points; ++i) {
    const double x = lo + (hi - lo) * i / (n_points - 1.0);
    const double f = adv.density(x);
    const double p = adv.clean_pdf(x);
    worst = std::max(worst, f - p);
    worst = std::max(worst, (1 - eps) * p - f);
  }
  return std::max(worst, 0.0);
}

double sandwich_violation(const Adversary1D& adv, int n_points) {
  double lo = adv.base_mean(), hi = adv.base_mean();
  for (const AdversaryPiece& p : adv.pieces()) {
    if (p.lo != -kInf) lo = std::min(lo, p.lo);
    if (p.hi != kInf) hi = std::max(hi, p.hi);
    lo = std::min(lo, p.shift);
    hi = std::max(hi, p.shift);
  }
  return sandwich_violation(adv, lo - 10.0, hi + 10.0, n_points);
}

double mass_by_quadrature(const Adversary1D& adv, double abs_tol) {
  double total = 0.0;
  for (const AdversaryPiece& p : adv.pieces()) {
    if (p.has_legendre()) {
      total += integrate_adaptive([&p](double x) { return p.eval(x); }, p.lo, p.hi, abs_tol);
    } else {
      total += tail_poly_moment(0, p.lo, p.hi, p.scale, p.shift, abs_tol);
    }
  }
  return total;
}

}  // namespace contam
