#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "submax/core.hpp"
#include "submax/ipe.hpp"

namespace submax {

/// vec(u u^T), column-stacked: block j holds (u)_j * u. Its Euclidean norm
/// equals ||u||^2 and <flatten(u), vec(M)> = u^T M u for any square M.
template <typename Derived>
Eigen::VectorXd flatten(const Eigen::MatrixBase<Derived>& u) {
  const Eigen::VectorXd v = u;
  const int d = static_cast<int>(v.size());
  Eigen::VectorXd out(d * d);
  for (int j = 0; j < d; ++j) {
    out.segment(static_cast<Eigen::Index>(j) * d, d) = v(j) * v;
  }
  return out;
}

/// vec(M), column-stacked.
inline Eigen::VectorXd flatten_matrix(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

/// Live index set with O(log n) delete.
class CandidateSet {
 public:
  CandidateSet() = default;
  explicit CandidateSet(int n);

  int size() const { return static_cast<int>(live_.size()); }
  bool empty() const { return live_.empty(); }
  bool contains(int i) const { return live_.count(i) != 0; }
  void erase(int i);  // deleting an absent index is an error
  const std::set<int>& items() const { return live_; }

 private:
  std::set<int> live_;
};

enum class QfsVariant {
  Flat,     // one IPE over the n flattened d^2-vectors
  Columns,  // d IPE instances at accuracy eps/d, failure delta/d
};

/// Near-argmax search for u_j^T M u_j over live candidates.
///
/// Contract: for ||M||_F <= 1 the returned j0 satisfies
/// u_j0^T M u_j0 >= max_live u_j^T M u_j - 2*eps with probability >= 1-delta.
class QfsState {
 public:
  QfsState(const GroundVectors& gv, double eps, double delta, QfsVariant variant,
           std::uint64_t seed, const AdeOverrides& overrides = {});

  QfsVariant variant() const { return variant_; }
  int count() const { return n_; }
  int live_count() const { return live_.size(); }
  const CandidateSet& candidates() const { return live_; }

  /// Near-argmax over live candidates; smallest index on ties.
  int query(const Eigen::MatrixXd& m) const;

  /// Estimated quadratic forms for all n points (live or not).
  Eigen::VectorXd estimate_all(const Eigen::MatrixXd& m) const;

  void erase(int i);

  /// Replace u_i by z (||z|| <= D).
  void update(int i, const Eigen::VectorXd& z);

 private:
  QfsVariant variant_;
  int n_ = 0;
  int d_ = 0;
  double norm_bound_ = 1.0;
  std::optional<IpeState> flat_;
  std::vector<IpeState> columns_;
  CandidateSet live_;
};

}  // namespace submax
