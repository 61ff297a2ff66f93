// Command-line driver for adversary construction, certification, simulation,
// estimation, and benchmark sweeps. All outputs are seeded-deterministic at
// any thread count (trial streams are seed-derived); wall-clock timing is
// opt-in because it is the one nondeterministic field.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "contam/adversary.hpp"
#include "contam/dataset.hpp"
#include "contam/errors.hpp"
#include "contam/estimators.hpp"
#include "contam/harness.hpp"
#include "contam/moments.hpp"
#include "contam/params.hpp"

namespace {

using namespace contam;

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path);
  os << text;
}

std::vector<int> parse_orders(const std::string& spec) {
  std::vector<int> orders;
  const auto dots = spec.find("..");
  if (dots != std::string::npos) {
    const int lo = std::stoi(spec.substr(0, dots));
    const int hi = std::stoi(spec.substr(dots + 2));
    if (lo < 0 || hi < lo) throw ConfigError("bad order range '" + spec + "'");
    for (int k = lo; k <= hi; ++k) orders.push_back(k);
    return orders;
  }
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) orders.push_back(std::stoi(tok));
  if (orders.empty()) throw ConfigError("empty order list");
  return orders;
}

int cmd_gen_adversary(double eps, double delta, int m, double C, double C_eta, double slack,
                      const std::string& out) {
  const ContaminationParams params = derive_params(eps, delta, C, C_eta);
  const Adversary1D adv = m > 0 ? build_moment_matched_adversary(params, m, 0.0, true, slack)
                                : build_tail_adversary(params, delta);
  spit(out, adv.to_json() + "\n");
  std::printf("wrote %s (pieces=%zu, total_mass=%.12g)\n", out.c_str(), adv.pieces().size(),
              adv.total_mass());
  return 0;
}

int cmd_verify(const std::string& adv_path, const std::string& orders_spec, double tol,
               std::size_t mc_n, std::uint64_t seed, const std::string& out) {
  const Adversary1D adv = Adversary1D::from_json(slurp(adv_path));
  const std::vector<int> orders = parse_orders(orders_spec);

  const double violation = sandwich_violation(adv);
  const double mass_quad = mass_by_quadrature(adv);
  const double mass_err = std::abs(mass_quad - adv.total_mass());
  const MomentReport report = moment_report_quadrature(adv, orders);
  double worst = 0.0;
  for (double r : report.residuals) worst = std::max(worst, std::abs(r));

  std::printf("sandwich violation: %.3e (tolerance 1e-9)\n", violation);
  std::printf("mass cache vs quadrature: %.3e (tolerance 1e-9)\n", mass_err);
  std::printf("worst moment residual (quadrature): %.3e (tolerance %.3e)\n", worst, tol);

  bool mc_ok = true;
  if (mc_n > 0) {
    RandomStream rng(seed);
    std::vector<double> se;
    const MomentReport mc = moment_report_monte_carlo(adv, orders, mc_n, rng, &se);
    for (std::size_t i = 0; i < mc.orders.size(); ++i) {
      const double dev = std::abs(mc.residuals[i]);
      const double lim = 4.0 * se[i];
      if (dev > lim) mc_ok = false;
      std::printf("  order %d: mc residual %.3e vs 4*sigma %.3e %s\n", mc.orders[i], dev, lim,
                  dev <= lim ? "ok" : "VIOLATION");
    }
  }

  if (!out.empty()) spit(out, report.to_json() + "\n");
  std::fputs(report.to_csv().c_str(), stdout);

  if (violation > 1e-9 || mass_err > 1e-9 || worst > tol || !mc_ok) {
    std::printf("verification FAILED\n");
    return 3;
  }
  std::printf("verification passed\n");
  return 0;
}

int cmd_simulate(const std::string& adv_path, int d, const std::string& direction,
                 std::size_t n, std::uint64_t seed, const std::string& out) {
  const Adversary1D adv = Adversary1D::from_json(slurp(adv_path));
  RandomStream rng(seed);
  Eigen::VectorXd v(d);
  if (direction == "random") {
    double norm = 0.0;
    do {
      for (int i = 0; i < d; ++i) v[i] = rng.normal();
      norm = v.norm();
    } while (norm < 1e-12);
    v /= norm;
  } else {
    std::stringstream ss(direction);
    std::string tok;
    int i = 0;
    while (std::getline(ss, tok, ',') && i < d) v[i++] = std::stod(tok);
    if (i != d) throw ConfigError("direction must have d components");
    v.normalize();
  }
  const Dataset data = sample_hidden_direction(adv, v, n, rng);
  data.write_csv_file(out);
  std::printf("wrote %s (n=%zu, visible=%zu, missing_fraction=%.6f)\n", out.c_str(),
              data.size(), data.visible_count(), estimate_epsilon(data));
  return 0;
}

int cmd_estimate(const std::string& method, const std::string& in_path, double eps,
                 double delta, double tau, int k_pipeline, double c_eta,
                 double bf_delta_scale, const std::string& out) {
  const Dataset data = Dataset::read_csv_file(in_path);
  EstimateResult result;
  if (method == "spectral") {
    // Serve the pipeline's independent stages from disjoint consecutive
    // blocks of the file (rows are i.i.d., so blocks are fresh batches):
    // 10% list, 10% tournament, 30% tensors, 50% brute force.
    const std::size_t n = data.size();
    const std::size_t cut[5] = {0, n / 10, 2 * (n / 10), 5 * (n / 10), n};
    SampleSource source = [&](std::size_t want, int stage) {
      Dataset block(data.dim(), data.seed());
      const std::size_t hi = std::min(cut[stage + 1], cut[stage] + want);
      for (std::size_t i = cut[stage]; i < hi; ++i) {
        if (data.is_missing(i)) {
          block.push_missing();
        } else {
          block.push_value(data.row(i));
        }
      }
      return block;
    };
    const ContaminationParams params = derive_params(eps, delta, 9.0, c_eta);
    SpectralConfig sc;
    sc.n_list = cut[1] - cut[0];
    sc.n_tournament = cut[2] - cut[1];
    sc.n_tensor = cut[3] - cut[2];
    sc.n_brute = cut[4] - cut[3];
    sc.k_order = k_pipeline;
    sc.bf_delta_scale = bf_delta_scale;
    sc.tau = tau;
    sc.list.seed = data.seed();
    result = spectral_mean_estimate(source, params, sc);
    result.n_used = n;
  } else if (method == "median") {
    result.method = "median";
    result.estimate.resize(data.dim());
    for (int c = 0; c < data.dim(); ++c) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(data.dim());
      e[c] = 1.0;
      result.estimate[c] = median_1d(data.project_visible(e));
    }
    result.n_used = data.size();
  } else if (method == "cdf1d") {
    if (data.dim() != 1) throw ConfigError("cdf1d needs 1-dimensional samples");
    result.method = "cdf1d";
    result.estimate.resize(1);
    result.estimate[0] =
        cdf_inversion_estimate_1d(data.visible_values_1d(), eps, delta, tau);
    result.n_used = data.size();
  } else if (method == "brute") {
    result = brute_force_estimate(data, eps, delta, tau);
  } else {
    throw ConfigError("estimate: unknown method '" + method + "'");
  }
  const std::string text = result.to_json() + "\n";
  if (!out.empty()) spit(out, text);
  std::fputs(text.c_str(), stdout);
  return 0;
}

int cmd_bench(const std::string& config_path, const std::string& out, int threads,
              bool timing) {
  const ExperimentConfig config = ExperimentConfig::from_json_file(config_path);
  const BenchResult result = run_bench(config, threads, timing);
  write_trials_csv(out, config, result);
  std::printf("wrote %s: success_rate=%.4f median_error=%.6g q10=%.6g q90=%.6g\n",
              out.c_str(), result.summary.success_rate, result.summary.median_error,
              result.summary.q10, result.summary.q90);
  return 0;
}

int cmd_tv_bound(double eps, double delta, std::size_t n) {
  const ContaminationParams params = derive_params(eps, delta);
  const CouplingPair pair = build_coupling_pair(params);
  const double tv_cond = coupling_tv_closed_form(pair, eps, delta);
  const double tv_quad = tv_distance_1d(pair.q1, pair.q2, 1e-10);
  const double tv_full = pair.alpha * tv_cond;  // bottom-symbol masses agree
  std::printf("threshold t        = %.12g\n", pair.threshold_t);
  std::printf("visible mass alpha = %.12g\n", pair.alpha);
  std::printf("TV(Q1~, Q2~) closed form = %.12e\n", tv_cond);
  std::printf("TV(Q1~, Q2~) quadrature  = %.12e\n", tv_quad);
  std::printf("closed form vs quadrature: %.3e\n", std::abs(tv_cond - tv_quad));
  std::printf("TV(Q1, Q2) with bottom symbol = %.12e\n", tv_full);
  std::printf("n-sample union bound n*TV = %.12e (n=%zu)\n", n * tv_full, n);
  return std::abs(tv_cond - tv_quad) <= 1e-6 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Gaussian mean estimation under realizable censoring: adversary\n"
      "construction, certification, simulation, and benchmarks.\n"
      "Exit codes: 0 ok, 2 usage/parameter errors, 3 certification or\n"
      "construction-feasibility failure, 4 capability guard, 5 numeric or\n"
      "statistical failure."};
  app.require_subcommand(1);

  double eps = 0.5, delta = 0.25, tol = 1e-8, tau = 0.05, C = 9.0, C_eta = 1.0, slack = 0.5,
         bf_delta_scale = 2.0;
  int m = 0, d = 1, threads = 0, k_pipeline = 3;
  std::size_t n = 100000, mc_n = 0;
  std::uint64_t seed = 1;
  std::string out, in_path, adv_path, config_path, orders = "1..4", direction = "random",
               method = "median";
  bool timing = false;

  auto* gen = app.add_subcommand("gen-adversary", "construct a censoring adversary (JSON)");
  gen->add_option("--eps", eps, "corruption budget")->required();
  gen->add_option("--delta", delta, "mean shift / accuracy parameter")->required();
  gen->add_option("--m", m, "moment-matching order (0 = tail construction only)");
  gen->add_option("--C", C, "k-derivation constant");
  gen->add_option("--C-eta", C_eta, "threshold constant");
  gen->add_option("--slack", slack, "correction bound |p| <= slack*eps");
  gen->add_option("--out", out, "output path")->required();

  auto* ver = app.add_subcommand("verify", "certify sandwich + moment residuals");
  ver->add_option("--adversary", adv_path)->required();
  ver->add_option("--orders", orders, "e.g. 1..4 or 1,2,3");
  ver->add_option("--tol", tol, "quadrature residual tolerance");
  ver->add_option("--mc", mc_n, "Monte Carlo cross-check draws (0 = skip)");
  ver->add_option("--seed", seed);
  ver->add_option("--out", out, "also write the report JSON here");

  auto* sim = app.add_subcommand("simulate", "draw a hidden-direction dataset (CSV)");
  sim->add_option("--adversary", adv_path)->required();
  sim->add_option("--d", d)->required();
  sim->add_option("--direction", direction, "random or v1,v2,...");
  sim->add_option("--n", n)->required();
  sim->add_option("--seed", seed)->required();
  sim->add_option("--out", out)->required();

  auto* est = app.add_subcommand("estimate", "estimate the mean from a sample CSV");
  est->add_option("--method", method, "median | cdf1d | brute | spectral")->required();
  est->add_option("--in", in_path)->required();
  est->add_option("--eps", eps);
  est->add_option("--delta", delta);
  est->add_option("--tau", tau);
  est->add_option("--k-pipeline", k_pipeline, "spectral: tensor order cap");
  est->add_option("--c-eta", C_eta, "spectral: retention threshold constant");
  est->add_option("--bf-delta-scale", bf_delta_scale,
                  "spectral: final-stage accuracy in units of delta/2");
  est->add_option("--out", out);

  auto* ben = app.add_subcommand("bench", "run seeded trials from a config (CSV out)");
  ben->add_option("--config", config_path)->required();
  ben->add_option("--out", out)->required();
  ben->add_option("--threads", threads, "0 = hardware");
  ben->add_flag("--timing", timing, "record wall times (breaks byte-determinism)");

  auto* tvb = app.add_subcommand("tv-bound", "coupling-pair TV: closed form vs quadrature");
  tvb->add_option("--eps", eps)->required();
  tvb->add_option("--delta", delta)->required();
  tvb->add_option("--n", n, "sample count for the union bound");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_adversary(eps, delta, m, C, C_eta, slack, out);
    if (ver->parsed()) return cmd_verify(adv_path, orders, tol, mc_n, seed, out);
    if (sim->parsed()) return cmd_simulate(adv_path, d, direction, n, seed, out);
    if (est->parsed()) {
      return cmd_estimate(method, in_path, eps, delta, tau, k_pipeline, C_eta,
                          bf_delta_scale, out);
    }
    if (ben->parsed()) return cmd_bench(config_path, out, threads, timing);
    if (tvb->parsed()) return cmd_tv_bound(eps, delta, n);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
