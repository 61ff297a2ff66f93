#include "contam/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "contam/errors.hpp"

namespace contam {

namespace {

const std::vector<std::string> kTopKeys{
    "epsilon", "delta", "d",         "n_per_stage", "trials",
    "master_seed", "adversary", "estimator", "constants"};
const std::vector<std::string> kAdversaryKeys{"kind", "m", "base_mean"};
const std::vector<std::string> kStageKeys{"estimate", "list", "tournament", "tensor", "brute"};

void reject_unknown(const nlohmann::json& j, const std::vector<std::string>& allowed,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const std::string& k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
  }
}

int hardware_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

Eigen::VectorXd random_unit_vec(int d, RandomStream& rng) {
  Eigen::VectorXd v(d);
  double norm = 0.0;
  do {
    for (int i = 0; i < d; ++i) v[i] = rng.normal();
    norm = v.norm();
  } while (norm < 1e-12);
  return v / norm;
}

struct StageTally {
  std::size_t total = 0;
  std::size_t missing = 0;
};

TrialRecord run_trial(const ExperimentConfig& cfg, const Adversary1D& adv_proto, int index) {
  TrialRecord rec;
  rec.trial_index = index;
  rec.seed = trial_seed(cfg.master_seed, static_cast<std::uint64_t>(index));

  RandomStream setup(stage_seed(rec.seed, 100));
  const Eigen::VectorXd v = random_unit_vec(cfg.d, setup);
  rec.true_mean = cfg.base_mean * v;

  StageTally tally;
  auto draw = [&](std::size_t n, int stage) {
    RandomStream rng(stage_seed(rec.seed, static_cast<std::uint64_t>(stage)));
    Dataset data = sample_hidden_direction(adv_proto, v, n, rng);
    tally.total += data.size();
    tally.missing += data.missing_count();
    return data;
  };

  try {
    if (cfg.estimator == "median") {
      const Dataset data = draw(cfg.stage_n("estimate", 100000), 0);
      Eigen::VectorXd est(cfg.d);
      for (int c = 0; c < cfg.d; ++c) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(cfg.d);
        e[c] = 1.0;
        est[c] = median_1d(data.project_visible(e));
      }
      rec.estimate = est;
    } else if (cfg.estimator == "cdf1d") {
      if (cfg.d != 1) throw ConfigError("cdf1d estimator requires d = 1");
      const Dataset data = draw(cfg.stage_n("estimate", 100000), 0);
      Eigen::VectorXd est(1);
      est[0] = cdf_inversion_estimate_1d(data.visible_values_1d(), cfg.epsilon, cfg.delta,
                                         cfg.constant("tau", 0.05));
      rec.estimate = est;
    } else if (cfg.estimator == "brute") {
      const Dataset data = draw(cfg.stage_n("estimate", 100000), 0);
      const EstimateResult r =
          brute_force_estimate(data, cfg.epsilon, cfg.delta, cfg.constant("tau", 0.05));
      rec.estimate = r.estimate;
    } else if (cfg.estimator == "spectral") {
      const ContaminationParams params =
          derive_params(cfg.epsilon, cfg.delta, cfg.constant("C", 9.0),
                        cfg.constant("C_eta", 1.0));
      SpectralConfig sc;
      sc.n_list = cfg.stage_n("list", 30000);
      sc.n_tournament = cfg.stage_n("tournament", 30000);
      sc.n_tensor = cfg.stage_n("tensor", 60000);
      sc.n_brute = cfg.stage_n("brute", 2000000);
      sc.k_order = static_cast<int>(cfg.constant("k_pipeline", 0));
      sc.eta_override = cfg.constant("eta_override", 0.0);
      sc.bf_delta_scale = cfg.constant("bf_delta_scale", 2.0);
      sc.tau = cfg.constant("tau", 0.05);
      sc.list.c_list = cfg.constant("c_list", 4.0);
      sc.list.c_r = cfg.constant("c_r", 3.0);
      sc.list.restarts = static_cast<int>(cfg.constant("restarts", 24));
      sc.list.seed = stage_seed(rec.seed, 101);
      const EstimateResult r = spectral_mean_estimate(draw, params, sc);
      rec.estimate = r.estimate;
      rec.subspace_dim = r.subspace_dim.value_or(-1);
    } else {
      throw ConfigError("config: unknown estimator '" + cfg.estimator + "'");
    }
    rec.error_l2 = (rec.estimate - rec.true_mean).norm();
  } catch (const Error& e) {
    rec.failure = e.what();
    rec.estimate = Eigen::VectorXd::Constant(cfg.d, std::numeric_limits<double>::quiet_NaN());
    rec.error_l2 = std::numeric_limits<double>::quiet_NaN();
  }
  rec.missing_fraction =
      tally.total == 0 ? 0.0 : static_cast<double>(tally.missing) / tally.total;
  return rec;
}

}  // namespace

std::size_t ExperimentConfig::stage_n(const std::string& stage, std::size_t fallback) const {
  auto it = n_per_stage.find(stage);
  return it == n_per_stage.end() ? fallback : it->second;
}

double ExperimentConfig::constant(const std::string& name, double fallback) const {
  auto it = constants.find(name);
  return it == constants.end() ? fallback : it->second;
}

std::string ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["epsilon"] = epsilon;
  j["delta"] = delta;
  j["d"] = d;
  j["n_per_stage"] = n_per_stage;
  j["trials"] = trials;
  j["master_seed"] = master_seed;
  j["adversary"] = {{"kind", adversary_kind}, {"m", adversary_m}, {"base_mean", base_mean}};
  j["estimator"] = estimator;
  j["constants"] = constants;
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: bad JSON: ") + e.what());
  }
  reject_unknown(j, kTopKeys, "top level");
  ExperimentConfig c;
  try {
    c.epsilon = j.at("epsilon").get<double>();
    c.delta = j.at("delta").get<double>();
    c.d = j.at("d").get<int>();
    if (j.contains("n_per_stage")) {
      reject_unknown(j["n_per_stage"], kStageKeys, "n_per_stage");
      for (auto it = j["n_per_stage"].begin(); it != j["n_per_stage"].end(); ++it) {
        c.n_per_stage[it.key()] = it.value().get<std::size_t>();
      }
    }
    c.trials = j.at("trials").get<int>();
    c.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("adversary")) {
      reject_unknown(j["adversary"], kAdversaryKeys, "adversary");
      c.adversary_kind = j["adversary"].value("kind", "tail");
      c.adversary_m = j["adversary"].value("m", 0);
      c.base_mean = j["adversary"].value("base_mean", 1.0);
    }
    c.estimator = j.at("estimator").get<std::string>();
    if (j.contains("constants")) {
      for (auto it = j["constants"].begin(); it != j["constants"].end(); ++it) {
        c.constants[it.key()] = it.value().get<double>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.d < 1) throw ConfigError("config: d must be >= 1");
  if (c.trials < 1) throw ConfigError("config: trials must be >= 1");
  return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return from_json(ss.str());
}

Adversary1D make_adversary(const ExperimentConfig& config, double planted_mean) {
  if (config.adversary_kind == "none") {
    return null_adversary(config.epsilon, planted_mean);
  }
  const ContaminationParams params =
      derive_params(config.epsilon, config.delta, config.constant("C", 9.0),
                    config.constant("C_eta", 1.0));
  if (config.adversary_kind == "tail") {
    return build_tail_adversary(params, planted_mean);
  }
  if (config.adversary_kind == "moment-matched") {
    const int m = config.adversary_m > 0 ? config.adversary_m : 2;
    return build_moment_matched_adversary(params, m, planted_mean, false,
                                          config.constant("slack", 0.5));
  }
  if (config.adversary_kind == "coupling") {
    return build_coupling_pair(params).q1.shifted(planted_mean + config.delta / 2);
  }
  throw ConfigError("config: unknown adversary kind '" + config.adversary_kind + "'");
}

BenchSummary summarize(const std::vector<TrialRecord>& records, double delta) {
  BenchSummary s;
  std::vector<double> errors;
  std::size_t success = 0;
  for (const TrialRecord& r : records) {
    const double e = std::isfinite(r.error_l2) ? r.error_l2
                                               : std::numeric_limits<double>::infinity();
    errors.push_back(e);
    if (e <= delta) ++success;
  }
  s.success_rate = records.empty() ? 0.0 : static_cast<double>(success) / records.size();
  std::sort(errors.begin(), errors.end());
  auto quantile = [&errors](double q) {
    if (errors.empty()) return 0.0;
    std::size_t idx = static_cast<std::size_t>(std::ceil(q * errors.size()));
    if (idx < 1) idx = 1;
    if (idx > errors.size()) idx = errors.size();
    return errors[idx - 1];
  };
  const std::size_t n = errors.size();
  s.median_error = n % 2 == 1 ? errors[n / 2] : 0.5 * (errors[n / 2 - 1] + errors[n / 2]);
  s.q10 = quantile(0.10);
  s.q90 = quantile(0.90);
  return s;
}

BenchResult run_bench(const ExperimentConfig& config, int threads, bool timing) {
  const Adversary1D adv = make_adversary(config, config.base_mean);
  BenchResult result;
  result.records.resize(config.trials);
  std::atomic<int> next{0};
  const int pool = std::min(hardware_threads(threads), config.trials);
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= config.trials) return;
      const auto t0 = std::chrono::steady_clock::now();
      result.records[i] = run_trial(config, adv, i);
      if (timing) {
        const auto t1 = std::chrono::steady_clock::now();
        result.records[i].wall_time_ms =
            std::chrono::duration<double, std::milli>(t1 - t0).count();
      }
    }
  };
  std::vector<std::thread> ts;
  for (int i = 1; i < pool; ++i) ts.emplace_back(worker);
  worker();
  for (std::thread& t : ts) t.join();
  result.summary = summarize(result.records, config.delta);
  return result;
}

void write_trials_csv(const std::string& path, const ExperimentConfig& config,
                      const BenchResult& result) {
  std::ofstream os(path);
  if (!os) throw ConfigError("write_trials_csv: cannot open " + path);
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  os << "# epsilon=" << num(config.epsilon) << " delta=" << num(config.delta)
     << " d=" << config.d << " trials=" << config.trials
     << " master_seed=" << config.master_seed << " adversary=" << config.adversary_kind
     << " m=" << config.adversary_m << " base_mean=" << num(config.base_mean)
     << " estimator=" << config.estimator << "\n";
  os << "# constants:";
  for (const auto& [k, v] : config.constants) os << ' ' << k << '=' << num(v);
  os << "\n# n_per_stage:";
  for (const auto& [k, v] : config.n_per_stage) os << ' ' << k << '=' << v;
  os << "\n";
  os << "trial,seed";
  for (int c = 0; c < config.d; ++c) os << ",mu_" << c;
  for (int c = 0; c < config.d; ++c) os << ",est_" << c;
  os << ",error_l2,subspace_dim,missing_fraction,wall_time_ms\n";
  for (const TrialRecord& r : result.records) {
    os << r.trial_index << ',' << r.seed;
    for (int c = 0; c < config.d; ++c) os << ',' << num(r.true_mean[c]);
    for (int c = 0; c < config.d; ++c) os << ',' << num(r.estimate[c]);
    os << ',' << num(r.error_l2) << ',' << r.subspace_dim << ',' << num(r.missing_fraction)
       << ',' << num(r.wall_time_ms) << "\n";
  }
  os << "# summary success_rate=" << num(result.summary.success_rate)
     << " median_error=" << num(result.summary.median_error)
     << " q10=" << num(result.summary.q10) << " q90=" << num(result.summary.q90) << "\n";
}

LoadedTrials read_trials_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("read_trials_csv: cannot open " + path);
  LoadedTrials out;
  std::string line;
  int d = 0;
  bool have_summary = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.rfind("# summary", 0) == 0) {
      std::sscanf(line.c_str(), "# summary success_rate=%lf median_error=%lf q10=%lf q90=%lf",
                  &out.summary.success_rate, &out.summary.median_error, &out.summary.q10,
                  &out.summary.q90);
      have_summary = true;
      continue;
    }
    if (line[0] == '#') continue;
    if (line.rfind("trial,", 0) == 0) {
      // count mu_ columns
      std::stringstream ss(line);
      std::string col;
      d = 0;
      while (std::getline(ss, col, ',')) {
        if (col.rfind("mu_", 0) == 0) ++d;
      }
      out.d = d;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != static_cast<std::size_t>(2 * d + 6)) {
      throw ConfigError("read_trials_csv: malformed row: " + line);
    }
    TrialRecord r;
    r.trial_index = std::stoi(cells[0]);
    r.seed = std::stoull(cells[1]);
    r.true_mean.resize(d);
    r.estimate.resize(d);
    for (int c = 0; c < d; ++c) r.true_mean[c] = std::strtod(cells[2 + c].c_str(), nullptr);
    for (int c = 0; c < d; ++c) r.estimate[c] = std::strtod(cells[2 + d + c].c_str(), nullptr);
    r.error_l2 = std::strtod(cells[2 + 2 * d].c_str(), nullptr);
    r.subspace_dim = std::stoi(cells[3 + 2 * d]);
    r.missing_fraction = std::strtod(cells[4 + 2 * d].c_str(), nullptr);
    r.wall_time_ms = std::strtod(cells[5 + 2 * d].c_str(), nullptr);
    out.records.push_back(std::move(r));
  }
  if (!have_summary) throw ConfigError("read_trials_csv: missing summary line");
  return out;
}

double lecam_lr_error(const CouplingPair& pair, std::size_t n, int trials, std::uint64_t seed,
                      int threads) {
  std::atomic<int> next{0};
  std::atomic<long long> errors{0};
  const int pool = std::min(hardware_threads(threads), trials);
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= trials) return;
      RandomStream rng(stage_seed(trial_seed(seed, i), 0));
      const bool truth_is_q2 = rng.uniform() < 0.5;
      const Adversary1D& truth = truth_is_q2 ? pair.q2 : pair.q1;
      double log_lr = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        const double x = truth.base_mean() + rng.normal();
        if (rng.uniform() > truth.retention(x)) continue;  // bottom symbol: ratio 1
        log_lr += std::log(pair.q2.density(x)) - std::log(pair.q1.density(x));
      }
      const bool decide_q2 = log_lr > 0.0;
      if (decide_q2 != truth_is_q2) errors.fetch_add(1);
    }
  };
  std::vector<std::thread> ts;
  for (int i = 1; i < pool; ++i) ts.emplace_back(worker);
  worker();
  for (std::thread& t : ts) t.join();
  return static_cast<double>(errors.load()) / trials;
}

}  // namespace contam
