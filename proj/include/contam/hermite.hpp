#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "contam/dataset.hpp"

namespace contam {

inline constexpr int kHermiteMaxOrder = 16;
inline constexpr std::size_t kTensorEntryCap = 10'000'000;

/// Normalized probabilist's Hermite polynomial h_k(x) = He_k(x)/sqrt(k!),
/// evaluated with the normalized three-term recurrence.
double hermite_poly_eval(int k, double x);

/// Dense symmetric order-t tensor over R^d with d^t entries in row-major
/// multi-index order.
class HermiteTensor {
 public:
  HermiteTensor(int order, int dim);

  int order() const { return order_; }
  int dim() const { return dim_; }
  std::size_t entry_count() const { return entries_.size(); }
  double* data() { return entries_.data(); }
  const double* data() const { return entries_.data(); }
  double operator[](std::size_t flat) const { return entries_[flat]; }
  double& operator[](std::size_t flat) { return entries_[flat]; }

  double l2_norm() const;

 private:
  int order_;
  int dim_;
  std::vector<double> entries_;
};

/// Flattened d x d^{t-1} matrix view of an order-t tensor (row = first index,
/// column = remaining multi-index, row-major).
struct FlattenedTensor {
  Eigen::MatrixXd matrix;
};

/// Partitions of {0..k-1} into singletons and pairs, generated once per k.
struct PairPartition {
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> singles;
};
const std::vector<PairPartition>& hermite_partitions(int k);

/// The Hermite tensor H_k(x): entry (i_1..i_k) = (1/sqrt(k!)) sum over
/// partitions of prod over pairs (-[i_a == i_b]) prod over singletons x_{i_c}.
HermiteTensor hermite_tensor(int k, const Eigen::VectorXd& x);

/// (1/n_visible) sum over visible samples of H_k(x). Missing entries are
/// skipped (their count is available from the dataset). Computed by
/// accumulating empirical raw-moment tensors and assembling once, which is
/// algebraically identical to averaging per-sample tensors.
HermiteTensor empirical_hermite_tensor(const Dataset& data, int k);

FlattenedTensor flatten(const HermiteTensor& t);

/// <v^{tensor k}, T> = sum entries * v_{i_1} ... v_{i_k}.
double tensor_project(const HermiteTensor& t, const Eigen::VectorXd& v);

}  // namespace contam
