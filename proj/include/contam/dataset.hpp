#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace contam {

/// One observation: a d-dimensional value or the missing symbol.
struct ObservedSample {
  bool missing = false;
  Eigen::VectorXd value;  // empty when missing

  static ObservedSample make_missing() { return ObservedSample{true, {}}; }
  static ObservedSample make_value(Eigen::VectorXd v) { return ObservedSample{false, std::move(v)}; }
};

/// A sequence of observations with fixed dimension, stored flat. Missing
/// rows keep their position (zero-filled payload) so serialization is
/// order-preserving and lossless.
class Dataset {
 public:
  Dataset() = default;
  Dataset(int dim, std::uint64_t seed) : dim_(dim), seed_(seed) {}

  int dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t size() const { return missing_.size(); }
  std::size_t visible_count() const { return visible_count_; }
  std::size_t missing_count() const { return size() - visible_count_; }

  bool is_missing(std::size_t i) const { return missing_[i] != 0; }
  Eigen::Map<const Eigen::VectorXd> row(std::size_t i) const {
    return Eigen::Map<const Eigen::VectorXd>(values_.data() + i * dim_, dim_);
  }

  void push_missing();
  void push_value(const Eigen::VectorXd& v);
  void push_value_1d(double x);
  void reserve(std::size_t n);

  /// Visible samples projected on a unit direction.
  std::vector<double> project_visible(const Eigen::VectorXd& v) const;
  /// Visible samples, coordinates in the (column-orthonormal) basis.
  Dataset project_visible_basis(const Eigen::MatrixXd& basis,
                                const Eigen::VectorXd& center) const;
  /// d=1 convenience: the visible values.
  std::vector<double> visible_values_1d() const;
  Eigen::VectorXd visible_mean() const;

  void write_csv(std::ostream& os) const;
  void write_csv_file(const std::string& path) const;
  static Dataset read_csv(std::istream& is, std::uint64_t seed = 0);
  static Dataset read_csv_file(const std::string& path, std::uint64_t seed = 0);

 private:
  int dim_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<double> values_;
  std::vector<std::uint8_t> missing_;
  std::size_t visible_count_ = 0;
};

/// Fraction of missing observations: the natural estimator of the corruption
/// budget actually spent by the adversary.
double estimate_epsilon(const Dataset& data);

}  // namespace contam
