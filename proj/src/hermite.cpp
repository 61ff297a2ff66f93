#include "contam/hermite.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "contam/errors.hpp"

namespace contam {

double hermite_poly_eval(int k, double x) {
  if (k < 0 || k > kHermiteMaxOrder) {
    throw CapabilityError("hermite_poly_eval: order beyond configured maximum");
  }
  if (k == 0) return 1.0;
  if (k == 1) return x;
  double hm = 1.0, h = x;
  for (int j = 1; j < k; ++j) {
    // h_{j+1} = (x h_j - sqrt(j) h_{j-1}) / sqrt(j+1)
    const double next = (x * h - std::sqrt(static_cast<double>(j)) * hm) /
                        std::sqrt(static_cast<double>(j + 1));
    hm = h;
    h = next;
  }
  return h;
}

HermiteTensor::HermiteTensor(int order, int dim) : order_(order), dim_(dim) {
  if (order < 0 || dim < 1) throw ParameterDomainError("HermiteTensor: bad order/dim");
  if (order > kHermiteMaxOrder) {
    throw CapabilityError("HermiteTensor: order beyond configured maximum");
  }
  double count = 1.0;
  for (int i = 0; i < order; ++i) count *= dim;
  if (count > static_cast<double>(kTensorEntryCap)) {
    throw CapabilityError("HermiteTensor: d^t exceeds the dense-entry cap");
  }
  entries_.assign(static_cast<std::size_t>(count), 0.0);
}

double HermiteTensor::l2_norm() const {
  long double s = 0.0L;
  for (double e : entries_) s += static_cast<long double>(e) * e;
  return static_cast<double>(std::sqrt(static_cast<double>(s)));
}

namespace {

void enumerate_partitions(std::vector<int>& remaining, PairPartition& current,
                          std::vector<PairPartition>& out) {
  if (remaining.empty()) {
    out.push_back(current);
    return;
  }
  const int first = remaining.front();
  // singleton
  std::vector<int> rest(remaining.begin() + 1, remaining.end());
  current.singles.push_back(first);
  enumerate_partitions(rest, current, out);
  current.singles.pop_back();
  // pair with each later element
  for (std::size_t j = 0; j < rest.size(); ++j) {
    std::vector<int> rest2;
    for (std::size_t t = 0; t < rest.size(); ++t) {
      if (t != j) rest2.push_back(rest[t]);
    }
    current.pairs.emplace_back(first, rest[j]);
    enumerate_partitions(rest2, current, out);
    current.pairs.pop_back();
  }
}

/// Assemble an order-k Hermite tensor from raw-moment tensors
/// moment[j](i_1..i_j) for j = k, k-2, ..., sharing one code path between the
/// single-point and empirical cases.
HermiteTensor assemble_from_moments(const std::vector<const HermiteTensor*>& moment, int k,
                                    int d) {
  HermiteTensor out(k, d);
  const std::vector<PairPartition>& parts = hermite_partitions(k);
  double fact = 1.0;
  for (int j = 2; j <= k; ++j) fact *= j;
  const double norm = 1.0 / std::sqrt(fact);

  std::vector<int> idx(k, 0);
  const std::size_t total = out.entry_count();
  for (std::size_t flat = 0; flat < total; ++flat) {
    double sum = 0.0;
    for (const PairPartition& part : parts) {
      double term = 1.0;
      for (const auto& [a, b] : part.pairs) {
        if (idx[a] != idx[b]) {
          term = 0.0;
          break;
        }
        term = -term;
      }
      if (term == 0.0) continue;
      if (!part.singles.empty()) {
        const HermiteTensor& M = *moment[part.singles.size()];
        std::size_t mflat = 0;
        for (int s : part.singles) mflat = mflat * d + idx[s];
        term *= M[mflat];
      }
      sum += term;
    }
    out[flat] = norm * sum;
    for (int pos = k - 1; pos >= 0; --pos) {
      if (++idx[pos] < d) break;
      idx[pos] = 0;
    }
  }
  return out;
}

/// Raw-moment tensors x^{tensor j} for one point, j = 0..k.
std::vector<HermiteTensor> point_power_tensors(int k, const Eigen::VectorXd& x) {
  const int d = static_cast<int>(x.size());
  std::vector<HermiteTensor> out;
  out.reserve(k + 1);
  out.emplace_back(0, d);
  out[0][0] = 1.0;
  for (int j = 1; j <= k; ++j) {
    HermiteTensor t(j, d);
    const HermiteTensor& prev = out[j - 1];
    const std::size_t np = prev.entry_count();
    for (std::size_t f = 0; f < np; ++f) {
      for (int c = 0; c < d; ++c) t[f * d + c] = prev[f] * x[c];
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

const std::vector<PairPartition>& hermite_partitions(int k) {
  // Involution counts grow fast (140152 at k=12, 46M at k=16); the dense
  // entry cap does not bind at d=1,2 so guard the enumeration itself.
  if (k > 12) throw CapabilityError("hermite_partitions: enumeration capped at order 12");
  static std::map<int, std::vector<PairPartition>> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(k);
  if (it == cache.end()) {
    std::vector<PairPartition> parts;
    std::vector<int> elems(k);
    for (int i = 0; i < k; ++i) elems[i] = i;
    PairPartition cur;
    enumerate_partitions(elems, cur, parts);
    it = cache.emplace(k, std::move(parts)).first;
  }
  return it->second;
}

HermiteTensor hermite_tensor(int k, const Eigen::VectorXd& x) {
  const int d = static_cast<int>(x.size());
  const std::vector<HermiteTensor> powers = point_power_tensors(k, x);
  std::vector<const HermiteTensor*> ptrs(k + 1);
  for (int j = 0; j <= k; ++j) ptrs[j] = &powers[j];
  return assemble_from_moments(ptrs, k, d);
}

HermiteTensor empirical_hermite_tensor(const Dataset& data, int k) {
  if (data.visible_count() == 0) {
    throw EmptyDataError("empirical_hermite_tensor: no visible samples");
  }
  const int d = data.dim();
  // Accumulate empirical raw moments M_j = mean of x^{tensor j}; the cost per
  // sample is d^j instead of d^k * #partitions.
  std::vector<HermiteTensor> M;
  M.reserve(k + 1);
  for (int j = 0; j <= k; ++j) M.emplace_back(j, d);
  std::vector<std::vector<double>> pow(k + 1);
  for (int j = 0; j <= k; ++j) pow[j].resize(M[j].entry_count());
  pow[0][0] = 1.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.is_missing(i)) continue;
    const auto x = data.row(i);
    for (int j = 1; j <= k; ++j) {
      const std::vector<double>& prev = pow[j - 1];
      std::vector<double>& next = pow[j];
      for (std::size_t f = 0; f < prev.size(); ++f) {
        const double base = prev[f];
        for (int c = 0; c < d; ++c) next[f * d + c] = base * x[c];
      }
      double* acc = M[j].data();
      for (std::size_t f = 0; f < next.size(); ++f) acc[f] += next[f];
    }
  }
  const double inv = 1.0 / static_cast<double>(data.visible_count());
  M[0][0] = 1.0;
  for (int j = 1; j <= k; ++j) {
    double* acc = M[j].data();
    for (std::size_t f = 0; f < M[j].entry_count(); ++f) acc[f] *= inv;
  }
  std::vector<const HermiteTensor*> ptrs(k + 1);
  for (int j = 0; j <= k; ++j) ptrs[j] = &M[j];
  return assemble_from_moments(ptrs, k, d);
}

FlattenedTensor flatten(const HermiteTensor& t) {
  if (t.order() < 1) {
    throw ParameterDomainError("flatten: order-0 tensors have no matrix form");
  }
  const int d = t.dim();
  std::size_t cols = 1;
  for (int i = 1; i < t.order(); ++i) cols *= d;
  Eigen::MatrixXd m(d, cols);
  for (int r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = t[r * cols + c];
  }
  return FlattenedTensor{std::move(m)};
}

double tensor_project(const HermiteTensor& t, const Eigen::VectorXd& v) {
  if (v.size() != t.dim()) throw ParameterDomainError("tensor_project: dimension mismatch");
  if (std::abs(v.norm() - 1.0) > 1e-12) {
    throw ParameterDomainError("tensor_project: direction must be a unit vector");
  }
  const int d = t.dim(), k = t.order();
  if (k == 0) return t[0];
  // Contract one index at a time: cost sum_j d^j instead of k d^k.
  std::vector<double> cur(t.data(), t.data() + t.entry_count());
  for (int step = 0; step < k; ++step) {
    const std::size_t next_size = cur.size() / d;
    std::vector<double> next(next_size, 0.0);
    for (std::size_t f = 0; f < next_size; ++f) {
      double s = 0.0;
      for (int c = 0; c < d; ++c) s += cur[f * d + c] * v[c];
      next[f] = s;
    }
    cur = std::move(next);
  }
  return cur[0];
}

}  // namespace contam
