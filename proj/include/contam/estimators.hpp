#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "contam/dataset.hpp"
#include "contam/params.hpp"
#include "contam/rng.hpp"

namespace contam {

inline constexpr int kBruteForceDimCap = 12;

/// Orthonormal basis of a retained subspace of R^d.
struct SubspaceBasis {
  int dim_ambient = 0;
  Eigen::MatrixXd columns;  // d x m, orthonormal

  int dim() const { return static_cast<int>(columns.cols()); }
  /// max_i,j |<c_i, c_j> - [i==j]|
  double orthonormality_defect() const;
};

struct CandidateList {
  std::vector<Eigen::VectorXd> candidates;
};

struct EstimateResult {
  Eigen::VectorXd estimate;
  std::string method;
  std::size_t n_used = 0;
  std::optional<int> subspace_dim;
  std::map<std::string, double> diagnostics;

  std::string to_json() const;
};

/// Standard median; mean of the two central order statistics for even length.
double median_1d(std::vector<double> values);

/// Deterministic DKW sample requirement ceil(ln(2/tau) / (2 eta^2)).
std::size_t dkw_required_n(double tau, double eta);

/// CDF-inversion estimator: with t = ln(1+eps/(1-eps))/delta, returns
/// Fhat^{-1}(Phi(-t)) + t over the visible values. Throws
/// InsufficientSamplesError (carrying the requirement) when
/// n < dkw_required_n(tau, eps Phi(-t)), and QuantileUnresolvableError when
/// Phi(-t) < 1/n.
double cdf_inversion_estimate_1d(std::vector<double> values, double epsilon, double delta,
                                 double tau);

/// The same inversion against an exact quantile oracle (testing hook).
double cdf_inversion_from_quantile(const std::function<double(double)>& quantile_fn,
                                   double epsilon, double delta);

/// Deterministic covering of the unit sphere with covering radius xi, built
/// as a maximal xi-packing (hence |C| <= (1+2/xi)^d) and self-repaired
/// against 1e4 random probes.
std::vector<Eigen::VectorXd> sphere_cover(int d, double xi);

/// Chebyshev fit min over mu of max_v |v^T mu - m_v|; least-squares start
/// plus subgradient polish.
struct FeasibilityFit {
  Eigen::VectorXd point;
  double objective = 0.0;
};
FeasibilityFit solve_direction_fit(const std::vector<Eigen::VectorXd>& dirs,
                                   const std::vector<double>& targets, int max_iters = 4000);

/// Cover + per-direction CDF inversion + feasibility program at tolerance
/// delta/4. Data must have dim <= 12.
EstimateResult brute_force_estimate(const Dataset& data, double epsilon, double delta,
                                    double tau);

struct ListDecodeConfig {
  double c_list = 4.0;     // list size cap = ceil(c_list / (1-eps))
  double c_r = 3.0;        // target radius constant
  int restarts = 24;       // subsample restarts (first uses all samples)
  std::uint64_t seed = 0;  // restart subsampling stream
};

/// Desk-scale list-decoding substitute: seeded multi-restart coordinate
/// medians with dedup at half the target radius. Contract: some candidate
/// lands within c_r sqrt(ln(1/(1-eps))) of the mean, list stays small.
CandidateList list_decode_candidates(const Dataset& data, double epsilon,
                                     const ListDecodeConfig& cfg);

/// Pairwise elimination along candidate-difference directions using the
/// 1D median on fresh samples; returns the least-disqualified candidate.
Eigen::VectorXd tournament_improve(const CandidateList& list, const Dataset& fresh_data,
                                   double epsilon, double delta);

/// Fresh-batch source for the pipeline stages (list / tournament / tensor /
/// brute), each drawn from an independent stream.
using SampleSource = std::function<Dataset(std::size_t n, int stage)>;

struct SpectralConfig {
  std::size_t n_list = 30000;
  std::size_t n_tournament = 30000;
  std::size_t n_tensor = 60000;
  std::size_t n_brute = 2000000;
  int k_order = 0;          // tensor order cap actually run; 0 = params.k
  double eta_override = 0.0;  // 0 = eta from (k_order, C_eta) formula
  double bf_delta_scale = 2.0;  // 1D-threshold accuracy passed to the final
                                // brute force, in units of delta/2
  double tau = 0.05;
  ListDecodeConfig list;
};

/// Algorithm: warm start by list-decode + tournament, recenter, retain
/// singular directions of the flattened empirical Hermite tensors with
/// sigma > eta for t = 1..k, then brute-force on the retained subspace.
EstimateResult spectral_mean_estimate(const SampleSource& source,
                                      const ContaminationParams& params,
                                      const SpectralConfig& cfg);

/// 3 max_{x in cover} |x^T A x| over a 1/3-cover: operator-norm upper bound
/// for symmetric A (testing utility for small d).
double op_norm_upper_bound(const Eigen::MatrixXd& A);

}  // namespace contam
