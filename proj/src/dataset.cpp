#include "contam/dataset.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "contam/errors.hpp"

namespace contam {

void Dataset::reserve(std::size_t n) {
  values_.reserve(n * dim_);
  missing_.reserve(n);
}

void Dataset::push_missing() {
  values_.insert(values_.end(), dim_, 0.0);
  missing_.push_back(1);
}

void Dataset::push_value(const Eigen::VectorXd& v) {
  if (v.size() != dim_) throw ParameterDomainError("Dataset: sample dimension mismatch");
  values_.insert(values_.end(), v.data(), v.data() + dim_);
  missing_.push_back(0);
  ++visible_count_;
}

void Dataset::push_value_1d(double x) {
  if (dim_ != 1) throw ParameterDomainError("Dataset: push_value_1d on dim != 1");
  values_.push_back(x);
  missing_.push_back(0);
  ++visible_count_;
}

std::vector<double> Dataset::project_visible(const Eigen::VectorXd& v) const {
  if (v.size() != dim_) throw ParameterDomainError("Dataset: projection dimension mismatch");
  std::vector<double> out;
  out.reserve(visible_count_);
  for (std::size_t i = 0; i < size(); ++i) {
    if (!missing_[i]) out.push_back(row(i).dot(v));
  }
  return out;
}

Dataset Dataset::project_visible_basis(const Eigen::MatrixXd& basis,
                                       const Eigen::VectorXd& center) const {
  if (basis.rows() != dim_) throw ParameterDomainError("Dataset: basis dimension mismatch");
  Dataset out(static_cast<int>(basis.cols()), seed_);
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) {
    if (missing_[i]) {
      out.push_missing();
    } else {
      out.push_value(basis.transpose() * (row(i) - center));
    }
  }
  return out;
}

std::vector<double> Dataset::visible_values_1d() const {
  if (dim_ != 1) throw ParameterDomainError("Dataset: visible_values_1d on dim != 1");
  std::vector<double> out;
  out.reserve(visible_count_);
  for (std::size_t i = 0; i < size(); ++i) {
    if (!missing_[i]) out.push_back(values_[i]);
  }
  return out;
}

Eigen::VectorXd Dataset::visible_mean() const {
  if (visible_count_ == 0) throw EmptyDataError("Dataset: no visible samples");
  Eigen::VectorXd m = Eigen::VectorXd::Zero(dim_);
  for (std::size_t i = 0; i < size(); ++i) {
    if (!missing_[i]) m += row(i);
  }
  return m / static_cast<double>(visible_count_);
}

void Dataset::write_csv(std::ostream& os) const {
  os << "# dim=" << dim_ << "\n";
  char buf[32];
  for (std::size_t i = 0; i < size(); ++i) {
    if (missing_[i]) {
      os << "MISSING\n";
      continue;
    }
    for (int j = 0; j < dim_; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", values_[i * dim_ + j]);
      os << buf;
      if (j + 1 < dim_) os << ',';
    }
    os << "\n";
  }
}

void Dataset::write_csv_file(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw ConfigError("Dataset: cannot open output file " + path);
  write_csv(os);
}

Dataset Dataset::read_csv(std::istream& is, std::uint64_t seed) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("Dataset: empty sample file");
  int dim = 0;
  if (std::sscanf(line.c_str(), "# dim=%d", &dim) != 1 || dim < 1) {
    throw ConfigError("Dataset: first line must be '# dim=<d>'");
  }
  Dataset d(dim, seed);
  Eigen::VectorXd v(dim);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line == "MISSING") {
      d.push_missing();
      continue;
    }
    const char* p = line.c_str();
    char* end = nullptr;
    for (int j = 0; j < dim; ++j) {
      v[j] = std::strtod(p, &end);
      if (end == p) throw ConfigError("Dataset: malformed sample row: " + line);
      p = end;
      if (j + 1 < dim) {
        if (*p != ',') throw ConfigError("Dataset: malformed sample row: " + line);
        ++p;
      }
    }
    d.push_value(v);
  }
  return d;
}

Dataset Dataset::read_csv_file(const std::string& path, std::uint64_t seed) {
  std::ifstream is(path);
  if (!is) throw ConfigError("Dataset: cannot open sample file " + path);
  return read_csv(is, seed);
}

double estimate_epsilon(const Dataset& data) {
  if (data.size() == 0) throw EmptyDataError("estimate_epsilon: empty dataset");
  return static_cast<double>(data.missing_count()) / static_cast<double>(data.size());
}

}  // namespace contam
