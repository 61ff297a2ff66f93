#pragma once

#include <cstdint>
#include <string>

namespace contam {

/// Corruption budget epsilon, target accuracy delta, and the derived
/// quantities that parameterize every construction and estimator:
///   B     tail-match radius, (1/delta) ln(1 + (eps/2)/(1-eps/2))
///   gamma (1/delta) ln(1 + eps/(1-eps))
///   k     smallest even integer >= C * gamma^2
///   eta   singular-value retention threshold, eps / (C_eta (k+1)^{k/2})
/// Immutable after construction; safe to share across threads.
struct ContaminationParams {
  double epsilon = 0.0;
  double delta = 0.0;
  double C = 9.0;
  double C_eta = 1.0;
  double B = 0.0;
  double gamma = 0.0;
  int k = 0;
  double eta = 0.0;  // may underflow to 0 for extreme k; desk-scale keeps it positive

  std::string to_json() const;
  static ContaminationParams from_json(const std::string& text);
};

/// Populates all derived fields. C >= 1 scales k; C_eta >= 1 shrinks eta.
ContaminationParams derive_params(double epsilon, double delta, double C = 9.0,
                                  double C_eta = 1.0);

}  // namespace contam
