#include "contam/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>

#include "contam/errors.hpp"
#include "contam/gaussian.hpp"
#include "contam/hermite.hpp"

namespace contam {

double SubspaceBasis::orthonormality_defect() const {
  const Eigen::MatrixXd G = columns.transpose() * columns;
  return (G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
}

std::string EstimateResult::to_json() const {
  nlohmann::json j;
  j["estimate"] = std::vector<double>(estimate.data(), estimate.data() + estimate.size());
  j["method"] = method;
  j["n_used"] = n_used;
  if (subspace_dim) j["subspace_dim"] = *subspace_dim;
  j["diagnostics"] = diagnostics;
  return j.dump(2);
}

double median_1d(std::vector<double> values) {
  if (values.empty()) throw EmptyDataError("median_1d: empty input");
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double hi = values[mid];
  if (n % 2 == 1) return hi;
  std::nth_element(values.begin(), values.begin() + mid - 1, values.begin() + mid);
  return 0.5 * (values[mid - 1] + hi);
}

std::size_t dkw_required_n(double tau, double eta) {
  if (!(tau > 0 && tau < 1) || !(eta > 0)) {
    throw ParameterDomainError("dkw_required_n: need tau in (0,1) and eta > 0");
  }
  return static_cast<std::size_t>(std::ceil(std::log(2.0 / tau) / (2.0 * eta * eta)));
}

double cdf_inversion_from_quantile(const std::function<double(double)>& quantile_fn,
                                   double epsilon, double delta) {
  if (!(epsilon > 0 && epsilon < 1) || !(delta > 0)) {
    throw ParameterDomainError("cdf_inversion: need epsilon in (0,1), delta > 0");
  }
  const double t = std::log1p(epsilon / (1 - epsilon)) / delta;
  return quantile_fn(norm_cdf(-t)) + t;
}

double cdf_inversion_estimate_1d(std::vector<double> values, double epsilon, double delta,
                                 double tau) {
  if (!(epsilon > 0 && epsilon < 1) || !(delta > 0) || !(tau > 0 && tau < 1)) {
    throw ParameterDomainError("cdf_inversion: bad parameters");
  }
  if (values.empty()) throw EmptyDataError("cdf_inversion: empty input");
  const double t = std::log1p(epsilon / (1 - epsilon)) / delta;
  const double q = norm_cdf(-t);
  const std::size_t n = values.size();
  const std::size_t required = dkw_required_n(tau, epsilon * q);
  if (n < required) {
    std::ostringstream os;
    os << "cdf_inversion: " << n << " samples, DKW requirement is " << required;
    throw InsufficientSamplesError(os.str(), required, n);
  }
  if (q * static_cast<double>(n) < 1.0) {
    throw QuantileUnresolvableError("cdf_inversion: target quantile below 1/n");
  }
  // left-continuous generalized inverse: smallest order statistic with
  // i/n >= q
  std::size_t idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  if (idx < 1) idx = 1;
  if (idx > n) idx = n;
  std::nth_element(values.begin(), values.begin() + (idx - 1), values.end());
  return values[idx - 1] + t;
}

namespace {

Eigen::VectorXd random_unit(int d, RandomStream& rng) {
  Eigen::VectorXd v(d);
  double norm = 0.0;
  do {
    for (int i = 0; i < d; ++i) v[i] = rng.normal();
    norm = v.norm();
  } while (norm < 1e-12);
  return v / norm;
}

}  // namespace

std::vector<Eigen::VectorXd> sphere_cover(int d, double xi) {
  if (d < 1 || d > kBruteForceDimCap) {
    throw CapabilityError("sphere_cover: dimension outside [1, 12]");
  }
  if (!(xi > 0 && xi <= 1)) throw ParameterDomainError("sphere_cover: xi must be in (0,1]");
  std::vector<Eigen::VectorXd> cover;
  if (d == 1) {
    cover.push_back(Eigen::VectorXd::Constant(1, 1.0));
    cover.push_back(Eigen::VectorXd::Constant(1, -1.0));
    return cover;
  }
  const double size_bound = std::pow(1.0 + 2.0 / xi, d);
  RandomStream rng(0xC0FEBABEULL ^ splitmix64(static_cast<std::uint64_t>(d) * 1000003 +
                                              static_cast<std::uint64_t>(xi * 1e6)));
  auto min_dist = [&cover](const Eigen::VectorXd& u) {
    double best = 2.0;
    for (const Eigen::VectorXd& y : cover) best = std::min(best, (y - u).norm());
    return best;
  };
  // Greedy maximal packing at radius xi; a maximal packing is a covering.
  int rejects = 0;
  while (rejects < 3000) {
    const Eigen::VectorXd u = random_unit(d, rng);
    if (min_dist(u) >= xi) {
      cover.push_back(u);
      rejects = 0;
    } else {
      ++rejects;
    }
  }
  // Probe phase: self-repair until 1e4 consecutive random directions are
  // within xi of the cover.
  int clean = 0;
  while (clean < 10000) {
    const Eigen::VectorXd u = random_unit(d, rng);
    if (min_dist(u) > xi) {
      cover.push_back(u);
      clean = 0;
    } else {
      ++clean;
    }
  }
  if (static_cast<double>(cover.size()) > size_bound) {
    throw NumericError("sphere_cover: packing exceeded the (1+2/xi)^d bound");
  }
  return cover;
}

FeasibilityFit solve_direction_fit(const std::vector<Eigen::VectorXd>& dirs,
                                   const std::vector<double>& targets, int max_iters) {
  if (dirs.empty() || dirs.size() != targets.size()) {
    throw ParameterDomainError("solve_direction_fit: empty or mismatched inputs");
  }
  const int d = static_cast<int>(dirs[0].size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    A += dirs[i] * dirs[i].transpose();
    b += targets[i] * dirs[i];
  }
  Eigen::VectorXd mu = A.ldlt().solve(b);
  auto objective = [&](const Eigen::VectorXd& m, std::size_t* arg) {
    double worst = 0.0;
    std::size_t worst_i = 0;
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      const double r = std::abs(dirs[i].dot(m) - targets[i]);
      if (r > worst) {
        worst = r;
        worst_i = i;
      }
    }
    if (arg) *arg = worst_i;
    return worst;
  };
  Eigen::VectorXd best = mu;
  std::size_t arg = 0;
  double best_obj = objective(mu, &arg);
  const double step0 = std::max(best_obj, 1e-12);
  for (int it = 0; it < max_iters; ++it) {
    const double obj = objective(mu, &arg);
    if (obj < best_obj) {
      best_obj = obj;
      best = mu;
    }
    const double r = dirs[arg].dot(mu) - targets[arg];
    const double step = step0 / std::sqrt(it + 1.0);
    mu -= step * (r > 0 ? 1.0 : -1.0) * dirs[arg];
  }
  return FeasibilityFit{best, best_obj};
}

EstimateResult brute_force_estimate(const Dataset& data, double epsilon, double delta,
                                    double tau) {
  const int d = data.dim();
  if (d > kBruteForceDimCap) {
    throw CapabilityError("brute_force_estimate: dimension above the cover guard (12)");
  }
  const std::vector<Eigen::VectorXd> cover = sphere_cover(d, 0.5);
  const double tau_dir = tau / static_cast<double>(cover.size());
  std::vector<double> m_v;
  m_v.reserve(cover.size());
  for (const Eigen::VectorXd& v : cover) {
    m_v.push_back(cdf_inversion_estimate_1d(data.project_visible(v), epsilon, delta, tau_dir));
  }
  const FeasibilityFit fit = solve_direction_fit(cover, m_v);
  const double tol = delta / 4;
  if (fit.objective > tol) {
    std::ostringstream os;
    os << "brute force: feasibility program unsatisfied (best residual " << fit.objective
       << " > delta/4 = " << tol << "); upstream 1D estimates inconsistent";
    throw InfeasibleProgramError(os.str(), fit.objective);
  }
  EstimateResult r;
  r.estimate = fit.point;
  r.method = "brute";
  r.n_used = data.size();
  r.diagnostics["max_residual"] = fit.objective;
  r.diagnostics["cover_size"] = static_cast<double>(cover.size());
  r.diagnostics["constraint_tolerance"] = tol;
  return r;
}

CandidateList list_decode_candidates(const Dataset& data, double epsilon,
                                     const ListDecodeConfig& cfg) {
  if (data.visible_count() == 0) {
    throw EmptyDataError("list_decode_candidates: no visible samples");
  }
  if (!(epsilon >= 0 && epsilon < 1)) {
    throw ParameterDomainError("list_decode_candidates: epsilon must lie in [0,1)");
  }
  const int d = data.dim();
  const std::size_t n_vis = data.visible_count();
  // statistical resolution floor: restarts closer than the coordinate-median
  // noise are duplicates (binds only for epsilon near 0)
  const double r_floor = 8.0 * std::sqrt(static_cast<double>(d) / n_vis);
  const double r_target =
      std::max(cfg.c_r * std::sqrt(std::log(1.0 / (1.0 - epsilon))), r_floor);
  const std::size_t cap = static_cast<std::size_t>(std::ceil(cfg.c_list / (1.0 - epsilon)));

  std::vector<std::size_t> visible_idx;
  visible_idx.reserve(n_vis);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!data.is_missing(i)) visible_idx.push_back(i);
  }
  RandomStream rng(cfg.seed);
  std::vector<std::vector<double>> coords(d);

  auto coordinate_median = [&](const std::vector<std::size_t>& idx) {
    Eigen::VectorXd med(d);
    for (int c = 0; c < d; ++c) {
      coords[c].clear();
      for (std::size_t i : idx) coords[c].push_back(data.row(i)[c]);
      med[c] = median_1d(coords[c]);
    }
    return med;
  };

  CandidateList list;
  for (int restart = 0; restart < cfg.restarts && list.candidates.size() < cap; ++restart) {
    std::vector<std::size_t> idx;
    if (restart == 0) {
      idx = visible_idx;
    } else {
      const std::size_t m = std::max<std::size_t>(1, n_vis / 2);
      idx.reserve(m);
      for (std::size_t i = 0; i < m; ++i) {
        idx.push_back(visible_idx[rng.below(n_vis)]);
      }
    }
    const Eigen::VectorXd cand = coordinate_median(idx);
    bool duplicate = false;
    for (const Eigen::VectorXd& c : list.candidates) {
      if ((c - cand).norm() < r_target / 2) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) list.candidates.push_back(cand);
  }
  return list;
}

Eigen::VectorXd tournament_improve(const CandidateList& list, const Dataset& fresh_data,
                                   double epsilon, double delta) {
  (void)epsilon;
  (void)delta;
  if (list.candidates.empty()) throw EmptyDataError("tournament_improve: empty list");
  const std::size_t k = list.candidates.size();
  if (k == 1) return list.candidates[0];
  std::vector<int> disqualified(k, 0);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      Eigen::VectorXd u = list.candidates[b] - list.candidates[a];
      const double norm = u.norm();
      if (norm < 1e-12) {
        ++disqualified[b];  // duplicates: keep the earlier one
        continue;
      }
      u /= norm;
      const double med = median_1d(fresh_data.project_visible(u));
      const double da = std::abs(list.candidates[a].dot(u) - med);
      const double db = std::abs(list.candidates[b].dot(u) - med);
      if (da > db) {
        ++disqualified[a];
      } else {
        ++disqualified[b];
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < k; ++i) {
    if (disqualified[i] < disqualified[best]) best = i;
  }
  return list.candidates[best];
}

EstimateResult spectral_mean_estimate(const SampleSource& source,
                                      const ContaminationParams& params,
                                      const SpectralConfig& cfg) {
  const double eps = params.epsilon, delta = params.delta;
  EstimateResult result;
  result.method = "spectral";
  if (delta >= eps) {
    // Footnote regime: the pipeline still runs but classic robust estimators
    // already reach O(delta) here.
    result.diagnostics["warning_delta_ge_epsilon"] = 1.0;
  }

  const int k_eff = cfg.k_order > 0 ? cfg.k_order : params.k;

  // Stage 0/1: warm start.
  const Dataset list_data = source(cfg.n_list, 0);
  const int d = list_data.dim();

  int k_cap = 0;
  double entries = 1.0;
  for (int t = 1; t <= k_eff; ++t) {
    entries *= d;
    if (entries > static_cast<double>(kTensorEntryCap)) break;
    k_cap = t;
  }
  if (k_cap < k_eff) {
    std::ostringstream os;
    os << "spectral: d^k exceeds the dense-entry cap at k=" << k_eff
       << "; largest feasible order is " << k_cap;
    throw CapabilityError(os.str());
  }
  const double eta = cfg.eta_override > 0
                         ? cfg.eta_override
                         : std::exp(std::log(eps) - std::log(params.C_eta) -
                                    0.5 * k_eff * std::log(k_eff + 1.0));

  ListDecodeConfig list_cfg = cfg.list;
  const CandidateList list = list_decode_candidates(list_data, eps, list_cfg);
  const Dataset tour_data = source(cfg.n_tournament, 1);
  const Eigen::VectorXd mu0 = tournament_improve(list, tour_data, eps, delta);

  // Stage 2: recenter and retain large singular directions per order.
  const Dataset tensor_data =
      source(cfg.n_tensor, 2).project_visible_basis(Eigen::MatrixXd::Identity(d, d), mu0);
  std::vector<Eigen::VectorXd> retained;
  for (int t = 1; t <= k_eff; ++t) {
    const HermiteTensor T = empirical_hermite_tensor(tensor_data, t);
    const FlattenedTensor M = flatten(T);
    const Eigen::MatrixXd G = M.matrix * M.matrix.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    int count = 0;
    double sigma_max = 0.0;
    for (int i = 0; i < d; ++i) {
      const double sigma = std::sqrt(std::max(0.0, es.eigenvalues()(i)));
      sigma_max = std::max(sigma_max, sigma);
      if (sigma > eta) {  // strict: ties at eta excluded
        retained.push_back(es.eigenvectors().col(i));
        ++count;
      }
    }
    result.diagnostics["retained_t" + std::to_string(t)] = count;
    result.diagnostics["sigma_max_t" + std::to_string(t)] = sigma_max;
  }

  SubspaceBasis V;
  V.dim_ambient = d;
  if (!retained.empty()) {
    Eigen::MatrixXd cols(d, retained.size());
    for (std::size_t i = 0; i < retained.size(); ++i) cols.col(i) = retained[i];
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(cols);
    qr.setThreshold(1e-10);
    const int rank = static_cast<int>(qr.rank());
    V.columns = qr.householderQ() * Eigen::MatrixXd::Identity(d, rank);
  } else {
    V.columns = Eigen::MatrixXd(d, 0);
  }
  result.subspace_dim = V.dim();
  result.diagnostics["eta"] = eta;
  result.diagnostics["k_order"] = k_eff;
  for (int i = 0; i < d; ++i) result.diagnostics["mu0_" + std::to_string(i)] = mu0[i];
  for (int c = 0; c < V.dim(); ++c) {
    for (int i = 0; i < d; ++i) {
      result.diagnostics["V" + std::to_string(c) + "_" + std::to_string(i)] = V.columns(i, c);
    }
  }

  if (V.dim() == 0) {
    result.estimate = mu0;
    result.n_used = cfg.n_list + cfg.n_tournament + cfg.n_tensor;
    return result;
  }
  if (V.dim() > kBruteForceDimCap) {
    std::ostringstream os;
    os << "spectral: retained subspace dimension " << V.dim()
       << " exceeds the brute-force guard (12) at eta=" << eta;
    throw CapabilityError(os.str());
  }

  // Stage 3: brute force on the retained subspace.
  const Dataset brute_raw = source(cfg.n_brute, 3);
  const Dataset projected = brute_raw.project_visible_basis(V.columns, mu0);
  const double bf_delta = cfg.bf_delta_scale * (delta / 2);
  const EstimateResult brute = brute_force_estimate(projected, eps, bf_delta, cfg.tau);
  result.estimate = mu0 + V.columns * brute.estimate;
  result.n_used = cfg.n_list + cfg.n_tournament + cfg.n_tensor + cfg.n_brute;
  for (const auto& [key, val] : brute.diagnostics) result.diagnostics["bf_" + key] = val;
  result.diagnostics["bf_delta"] = bf_delta;
  return result;
}

double op_norm_upper_bound(const Eigen::MatrixXd& A) {
  const int d = static_cast<int>(A.rows());
  const std::vector<Eigen::VectorXd> cover = sphere_cover(d, 1.0 / 3.0);
  double worst = 0.0;
  for (const Eigen::VectorXd& x : cover) {
    worst = std::max(worst, std::abs(x.dot(A * x)));
  }
  return 3.0 * worst;
}

}  // namespace contam
