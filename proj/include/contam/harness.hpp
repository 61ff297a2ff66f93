#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "contam/adversary.hpp"
#include "contam/estimators.hpp"
#include "contam/params.hpp"

namespace contam {

/// Fully explicit, strictly validated experiment description. Unknown JSON
/// keys are rejected so config drift cannot pass silently.
struct ExperimentConfig {
  double epsilon = 0.5;
  double delta = 0.25;
  int d = 1;
  std::map<std::string, std::size_t> n_per_stage;  // estimate|list|tournament|tensor|brute
  int trials = 100;
  std::uint64_t master_seed = 1;
  std::string adversary_kind = "tail";  // tail | moment-matched | coupling | none
  int adversary_m = 0;                  // moment-matched order
  double base_mean = 1.0;               // planted 1D mean along the hidden direction
  std::string estimator = "cdf1d";      // median | cdf1d | brute | spectral
  std::map<std::string, double> constants;

  std::size_t stage_n(const std::string& stage, std::size_t fallback) const;
  double constant(const std::string& name, double fallback) const;

  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);
};

struct TrialRecord {
  int trial_index = 0;
  std::uint64_t seed = 0;
  Eigen::VectorXd true_mean;
  Eigen::VectorXd estimate;
  double error_l2 = 0.0;
  int subspace_dim = -1;  // -1 when not applicable
  double missing_fraction = 0.0;
  double wall_time_ms = 0.0;
  std::string failure;  // nonempty when the trial errored
};

struct BenchSummary {
  double success_rate = 0.0;  // error <= delta
  double median_error = 0.0;
  double q10 = 0.0;
  double q90 = 0.0;
};

struct BenchResult {
  std::vector<TrialRecord> records;
  BenchSummary summary;
};

/// Runs all trials in a worker pool. Every trial owns seed-derived streams,
/// so results are independent of the thread count; records are written in
/// trial order. Wall times are recorded only when `timing` is set (they are
/// the one nondeterministic field).
BenchResult run_bench(const ExperimentConfig& config, int threads = 0, bool timing = false);

BenchSummary summarize(const std::vector<TrialRecord>& records, double delta);

void write_trials_csv(const std::string& path, const ExperimentConfig& config,
                      const BenchResult& result);
/// Reads back a trials CSV; returns records plus the stored summary lines.
struct LoadedTrials {
  std::vector<TrialRecord> records;
  BenchSummary summary;
  int d = 0;
};
LoadedTrials read_trials_csv(const std::string& path);

/// Builds the configured adversary at the given planted mean.
Adversary1D make_adversary(const ExperimentConfig& config, double planted_mean);

/// Empirical average error of the likelihood-ratio test between the coupled
/// corruptions over `trials` simulations with n samples each (equal priors;
/// the optimal test, so its error floors at (1 - TV(Q1^n, Q2^n))/2).
double lecam_lr_error(const CouplingPair& pair, std::size_t n, int trials,
                      std::uint64_t seed, int threads = 0);

}  // namespace contam
