#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "submax/core.hpp"

namespace submax {

struct LshParams {
  int tables = 0;       // T
  int bits = 0;         // K per table
  int scan_cap = 0;     // exact-scored candidates per query (10*T)
  double p1 = 0.0;      // single-bit collision probability at the threshold
};

/// K = ceil(log2 n); T = max(8, ceil(4 ln(1/delta) / p1^K)) with
/// p1 = 1 - arccos(tau)/pi, amplifying planted-pair recall to >= 1-delta.
LshParams derive_lsh_params(int n, double tau, double delta);

/// Signed-random-hyperplane Max-IP index over unit vectors.
///
/// Query contract (one-sided): when a live point with <p, q> >= tau exists,
/// some live p' with <p', q> >= c*tau is returned with probability >= 1-delta;
/// otherwise FAIL (nullopt) is allowed. Candidates from colliding buckets are
/// scored exactly, capped at scan_cap per query.
class HashEnsemble {
 public:
  /// Rows of `points` must be unit vectors (within 1e-9).
  HashEnsemble(const Eigen::MatrixXd& points, double c, double tau, double delta,
               std::uint64_t seed);

  int count() const { return static_cast<int>(points_.rows()); }
  int dim() const { return static_cast<int>(points_.cols()); }
  int live_count() const { return live_count_; }
  bool contains(int i) const { return live_[i]; }
  const LshParams& params() const { return params_; }
  double c() const { return c_; }
  double tau() const { return tau_; }

  /// Best colliding live candidate if its inner product reaches c*tau.
  std::optional<int> query(const Eigen::VectorXd& q) const;

  /// Remove i from every table; absent index is an error.
  void erase(int i);

  /// Bucket scan diagnostic: true when i occurs in no bucket.
  bool absent_from_all_buckets(int i) const;

 private:
  std::uint64_t code_for(int table, const Eigen::VectorXd& x) const;

  Eigen::MatrixXd points_;       // n x d, kept for exact rescoring
  Eigen::MatrixXd hyperplanes_;  // (T*K) x d, unit rows
  std::vector<std::unordered_map<std::uint64_t, std::vector<int>>> tables_;
  std::vector<std::vector<std::uint64_t>> codes_;  // per point, per table
  std::vector<char> live_;
  int live_count_ = 0;
  double c_ = 0.0;
  double tau_ = 0.0;
  double delta_ = 0.0;
  LshParams params_;
};

/// Quadratic-form search on top of Max-IP: stores Q(flatten(u_i)) and
/// queries with P(vec(M)). Requires ||u_i|| <= 1 and ||M||_F <= 1.
class LshQfs {
 public:
  LshQfs(const GroundVectors& gv, double c, double tau, double delta,
         std::uint64_t seed);

  /// Index of a live j0 with u_j0^T M u_j0 >= c * max live form, or FAIL.
  std::optional<int> query(const Eigen::MatrixXd& m) const;

  void erase(int i);
  int live_count() const { return maxip_.live_count(); }
  const HashEnsemble& maxip() const { return maxip_; }

 private:
  int d_ = 0;
  HashEnsemble maxip_;
};

}  // namespace submax
