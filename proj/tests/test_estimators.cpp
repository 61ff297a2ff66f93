#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "contam/adversary.hpp"
#include "contam/errors.hpp"
#include "contam/estimators.hpp"
#include "contam/gaussian.hpp"
#include "contam/params.hpp"

using namespace contam;

TEST_CASE("median basics") {
  CHECK(median_1d({3.0}) == 3.0);
  CHECK(median_1d({1.0, 2.0, 100.0}) == 2.0);
  CHECK(median_1d({4.0, 1.0}) == 2.5);
  CHECK_THROWS_AS(median_1d({}), EmptyDataError);
}

TEST_CASE("median under one-sided 20% corruption lands near the quantile-shift value") {
  RandomStream rng(808);
  std::vector<double> xs;
  const std::size_t n = 100000;
  for (std::size_t i = 0; i < n; ++i) {
    xs.push_back(i % 5 == 0 ? 50.0 : 0.7 + rng.normal());
  }
  // quantile-shift oracle: median of the mixture solves 0.8 Phi(m - 0.7)=0.5
  const double oracle = 0.7 + norm_quantile(0.5 / 0.8);
  const double med = median_1d(xs);
  CHECK(std::abs(med - 0.7) <= 0.35);
  CHECK(std::abs(med - oracle) <= 0.02);
}

TEST_CASE("DKW requirement formula") {
  CHECK(dkw_required_n(0.05, 0.1) == 185);
  CHECK(dkw_required_n(0.05, 0.6 * norm_cdf(-3.0543024395805167)) == 4027201);
}

TEST_CASE("cdf inversion against the exact quantile oracle returns mu exactly") {
  for (double mu0 : {-2.0, 0.0, 1.3}) {
    for (auto [eps, dlt] : {std::pair{0.5, 0.4}, {0.6, 0.3}, {0.2, 0.5}}) {
      auto quantile = [mu0](double q) { return mu0 + norm_quantile(q); };
      const double est = cdf_inversion_from_quantile(quantile, eps, dlt);
      CHECK(est == doctest::Approx(mu0).epsilon(1e-9));
    }
  }
}

TEST_CASE("cdf inversion guards: undersampled and unresolvable quantiles") {
  std::vector<double> tiny(100, 0.0);
  CHECK_THROWS_AS(cdf_inversion_estimate_1d(tiny, 0.6, 0.3, 0.05),
                  InsufficientSamplesError);
  try {
    cdf_inversion_estimate_1d(tiny, 0.6, 0.3, 0.05);
  } catch (const InsufficientSamplesError& e) {
    CHECK(e.required_n == 4027201);
    CHECK(e.got_n == 100);
  }
}

TEST_CASE("cdf inversion concentrates on clean data") {
  RandomStream rng(515);
  const double eps = 0.5, dlt = 0.4, mu = 0.9;
  std::vector<double> xs;
  const std::size_t n = 60000;
  xs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) xs.push_back(mu + rng.normal());
  const double est = cdf_inversion_estimate_1d(xs, eps, dlt, 0.05);
  CHECK(std::abs(est - mu) <= 0.1);
}

TEST_CASE("sphere cover: d=1 and cardinality/covering properties") {
  const auto c1 = sphere_cover(1, 0.5);
  REQUIRE(c1.size() == 2);
  CHECK(c1[0][0] == 1.0);
  CHECK(c1[1][0] == -1.0);

  for (int d : {2, 3, 4}) {
    const auto cover = sphere_cover(d, 0.5);
    CHECK(static_cast<double>(cover.size()) <= std::pow(5.0, d));
    RandomStream rng(d * 1000 + 7);
    double worst = 0.0;
    for (int probe = 0; probe < 10000; ++probe) {
      Eigen::VectorXd u(d);
      double nrm = 0.0;
      do {
        for (int i = 0; i < d; ++i) u[i] = rng.normal();
        nrm = u.norm();
      } while (nrm < 1e-12);
      u /= nrm;
      double best = 2.0;
      for (const auto& y : cover) best = std::min(best, (y - u).norm());
      worst = std::max(worst, best);
    }
    CHECK(worst <= 0.5);
    // determinism
    const auto again = sphere_cover(d, 0.5);
    REQUIRE(again.size() == cover.size());
    CHECK(again[0] == cover[0]);
  }
  CHECK_THROWS_AS(sphere_cover(13, 0.5), CapabilityError);
}

TEST_CASE("direction fit: the truth is feasible with exact oracle targets") {
  const int d = 3;
  const auto cover = sphere_cover(d, 0.5);
  Eigen::VectorXd mu(d);
  mu << 0.4, -0.2, 0.9;
  std::vector<double> targets;
  for (const auto& v : cover) targets.push_back(v.dot(mu));
  const FeasibilityFit fit = solve_direction_fit(cover, targets);
  CHECK(fit.objective <= 1e-9);
  CHECK((fit.point - mu).norm() <= 1e-6);
}

TEST_CASE("brute force on a planted tail adversary at d=2") {
  const ContaminationParams p = derive_params(0.5, 0.4);
  const Adversary1D adv = build_tail_adversary(p, 0.8);
  Eigen::VectorXd v(2);
  v << std::sqrt(0.5), -std::sqrt(0.5);
  RandomStream rng(2024);
  const Dataset data = sample_hidden_direction(adv, v, 160000, rng);
  const EstimateResult r = brute_force_estimate(data, 0.5, 0.4, 0.05);
  const Eigen::VectorXd mu = 0.8 * v;
  CHECK((r.estimate - mu).norm() <= 0.4);
  CHECK(r.diagnostics.at("max_residual") <= 0.1 + 1e-9);
}

TEST_CASE("brute force rejects high dimensions") {
  Dataset data(13, 0);
  data.push_value(Eigen::VectorXd::Zero(13));
  CHECK_THROWS_AS(brute_force_estimate(data, 0.5, 0.4, 0.05), CapabilityError);
}

TEST_CASE("list decoding: clean data collapses to one candidate near the mean") {
  RandomStream rng(606);
  const int d = 4;
  Eigen::VectorXd mu(d);
  mu << 1.0, -2.0, 0.5, 0.0;
  Dataset data(d, 0);
  const std::size_t n = 20000;
  Eigen::VectorXd z(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < d; ++c) z[c] = mu[c] + rng.normal();
    data.push_value(z);
  }
  ListDecodeConfig cfg;
  cfg.seed = 9;
  const CandidateList list = list_decode_candidates(data, 0.0, cfg);
  REQUIRE(list.candidates.size() == 1);
  CHECK((list.candidates[0] - mu).norm() <= 3 * std::sqrt(static_cast<double>(d) / n));
  // determinism: same seed, same list
  const CandidateList again = list_decode_candidates(data, 0.0, cfg);
  REQUIRE(again.candidates.size() == 1);
  CHECK(again.candidates[0] == list.candidates[0]);
}

TEST_CASE("list decoding on the tail adversary keeps the contract") {
  const double eps = 0.7;
  const ContaminationParams p = derive_params(eps, 0.3);
  const Adversary1D adv = build_tail_adversary(p, 1.5);
  const int d = 6;
  const double r_target = 3.0 * std::sqrt(std::log(1.0 / (1.0 - eps)));
  int hits = 0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    RandomStream rng(3000 + t);
    Eigen::VectorXd v(d);
    double nrm = 0.0;
    do {
      for (int i = 0; i < d; ++i) v[i] = rng.normal();
      nrm = v.norm();
    } while (nrm < 1e-12);
    v /= nrm;
    const Dataset data = sample_hidden_direction(adv, v, 20000, rng);
    ListDecodeConfig cfg;
    cfg.seed = 40 + t;
    const CandidateList list = list_decode_candidates(data, eps, cfg);
    CHECK(list.candidates.size() <= 14);  // ceil(4/(1-eps))
    const Eigen::VectorXd mu = 1.5 * v;
    double best = 1e300;
    for (const auto& c : list.candidates) best = std::min(best, (c - mu).norm());
    if (best <= r_target) ++hits;
  }
  CHECK(hits == trials);
}

TEST_CASE("tournament: separated synthetic candidates, exact winner") {
  RandomStream rng(7777);
  const int d = 3;
  Eigen::VectorXd mu(d);
  mu << 0.3, 0.3, -0.1;
  Dataset fresh(d, 0);
  Eigen::VectorXd z(d);
  for (int i = 0; i < 20000; ++i) {
    for (int c = 0; c < d; ++c) z[c] = mu[c] + rng.normal();
    fresh.push_value(z);
  }
  CandidateList list;
  list.candidates.push_back(mu);  // exact candidate
  Eigen::VectorXd far = mu;
  far[0] += 10.0;
  list.candidates.push_back(far);
  const Eigen::VectorXd win = tournament_improve(list, fresh, 0.5, 0.25);
  CHECK((win - mu).norm() == 0.0);
  // singleton passthrough without consuming samples
  CandidateList single;
  single.candidates.push_back(far);
  Dataset empty(d, 0);
  CHECK(tournament_improve(single, empty, 0.5, 0.25) == far);
}

TEST_CASE("tournament contract on random lists (2 min + delta/2)") {
  const double eps = 0.5, dlt = 0.3;
  const ContaminationParams p = derive_params(eps, dlt);
  const Adversary1D adv = build_tail_adversary(p, 0.6);
  const int d = 4;
  int ok = 0;
  const int trials = 30;
  for (int t = 0; t < trials; ++t) {
    RandomStream rng(5000 + t);
    Eigen::VectorXd v(d);
    double nrm = 0.0;
    do {
      for (int i = 0; i < d; ++i) v[i] = rng.normal();
      nrm = v.norm();
    } while (nrm < 1e-12);
    v /= nrm;
    const Eigen::VectorXd mu = 0.6 * v;
    const Dataset fresh = sample_hidden_direction(adv, v, 8000, rng);
    CandidateList list;
    double best = 1e300;
    for (int c = 0; c < 6; ++c) {
      Eigen::VectorXd cand(d);
      for (int i = 0; i < d; ++i) cand[i] = mu[i] + 1.5 * rng.normal();
      list.candidates.push_back(cand);
      best = std::min(best, (cand - mu).norm());
    }
    const Eigen::VectorXd win = tournament_improve(list, fresh, eps, dlt);
    if ((win - mu).norm() <= 2 * best + dlt / 2 + 0.15) ++ok;
  }
  CHECK(ok >= trials - 1);
}

TEST_CASE("spectral pipeline smoke test at small scale") {
  const double eps = 0.5, dlt = 0.25;
  // C_eta = 2 puts eta = eps/(2*4^{3/2}) = 0.03125 between the order-3
  // signal (~0.05) and the tensor noise floor at this n
  const ContaminationParams params = derive_params(eps, dlt, 9.0, 2.0);
  const int d = 4;
  RandomStream dir_rng(424242);
  Eigen::VectorXd v(d);
  double nrm = 0.0;
  do {
    for (int i = 0; i < d; ++i) v[i] = dir_rng.normal();
    nrm = v.norm();
  } while (nrm < 1e-12);
  v /= nrm;
  const double planted = 1.0;
  const Adversary1D adv = build_tail_adversary(params, planted);
  const Eigen::VectorXd mu = planted * v;

  SampleSource source = [&](std::size_t n, int stage) {
    RandomStream rng(stage_seed(777, stage));
    return sample_hidden_direction(adv, v, n, rng);
  };
  SpectralConfig cfg;
  cfg.n_list = 20000;
  cfg.n_tournament = 20000;
  cfg.n_tensor = 200000;
  cfg.n_brute = 2600000;
  cfg.k_order = 3;
  cfg.bf_delta_scale = 2.0;
  cfg.list.seed = 99;
  const EstimateResult r = spectral_mean_estimate(source, params, cfg);
  REQUIRE(r.subspace_dim.has_value());
  CHECK(*r.subspace_dim >= 1);
  CHECK(*r.subspace_dim <= 4);
  CHECK((r.estimate - mu).norm() <= dlt);
}

TEST_CASE("spectral pipeline: clean recentered data retains nothing") {
  const double eps = 0.5, dlt = 0.25;
  const ContaminationParams params = derive_params(eps, dlt);
  const int d = 4;
  const Adversary1D nul = null_adversary(eps, 0.0);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  v[0] = 1.0;
  SampleSource source = [&](std::size_t n, int stage) {
    RandomStream rng(stage_seed(31, stage));
    return sample_hidden_direction(nul, v, n, rng);
  };
  SpectralConfig cfg;
  cfg.n_list = 20000;
  cfg.n_tournament = 20000;
  cfg.n_tensor = 40000;
  cfg.n_brute = 100000;
  cfg.k_order = 2;
  const EstimateResult r = spectral_mean_estimate(source, params, cfg);
  // mu-hat_0 is already within ~1e-2 of 0; no Hermite signal survives eta
  REQUIRE(r.subspace_dim.has_value());
  CHECK(*r.subspace_dim == 0);
  CHECK(r.estimate.norm() <= 0.1);
}

TEST_CASE("op norm upper bound dominates the true norm on small matrices") {
  RandomStream rng(135);
  for (int rep = 0; rep < 5; ++rep) {
    const int d = 3;
    Eigen::MatrixXd A(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j <= i; ++j) {
        A(i, j) = rng.normal();
        A(j, i) = A(i, j);
      }
    }
    const double truth = A.operatorNorm();
    const double bound = op_norm_upper_bound(A);
    CHECK(bound >= truth - 1e-9);
    CHECK(bound <= 3.5 * truth + 1e-9);
  }
}
