#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "submax/sketch_ade.hpp"

namespace submax {

// Asymmetric transformation: P and Q map bounded vectors to unit vectors on
// disjoint padding coordinates so that <Q(a), P(b)> = <a, b> exactly.

template <typename Derived>
Eigen::VectorXd lift_p(const Eigen::MatrixBase<Derived>& b) {
  const double sq = b.squaredNorm();
  if (sq > 1.0 + 1e-9) {
    throw std::invalid_argument("lift_p: ||b|| must be <= 1");
  }
  Eigen::VectorXd out(b.size() + 2);
  out.head(b.size()) = b;
  out(b.size()) = std::sqrt(std::max(0.0, 1.0 - sq));
  out(b.size() + 1) = 0.0;
  return out;
}

template <typename Derived>
Eigen::VectorXd lift_q(const Eigen::MatrixBase<Derived>& a) {
  const double sq = a.squaredNorm();
  if (sq > 1.0 + 1e-9) {
    throw std::invalid_argument("lift_q: ||a|| must be <= 1");
  }
  Eigen::VectorXd out(a.size() + 2);
  out.head(a.size()) = a;
  out(a.size()) = 0.0;
  out(a.size() + 1) = std::sqrt(std::max(0.0, 1.0 - sq));
  return out;
}

/// For unit-norm lifted pairs, <x, y> = D - D/2 * ||Q(x/D) - P(y)||^2.
inline double inner_from_distance(double norm_bound, double dist) {
  return norm_bound * (1.0 - 0.5 * dist * dist);
}

/// Dynamic inner product estimation over points with ||x_i|| <= D.
///
/// Stores Q(x_i / D) in a distance ensemble with accuracy eps' = 2*eps/(3D);
/// a query q (||q|| <= 1) estimates every <q, x_i> within an additive eps
/// with probability >= 1-delta.
class IpeState {
 public:
  /// `points` rows are the x_i. Rejects ||x_i|| > D; requires
  /// eps in (0, 3D/2) so that eps' lands in (0,1).
  IpeState(const RowSource& points, double norm_bound, double eps, double delta,
           std::uint64_t seed, const AdeOverrides& overrides = {});
  IpeState(const Eigen::MatrixXd& points, double norm_bound, double eps,
           double delta, std::uint64_t seed, const AdeOverrides& overrides = {});

  int count() const { return ade_.count(); }
  /// Dimension of the original points (lifted points have dim()+2).
  int dim() const { return dim_; }
  double norm_bound() const { return norm_bound_; }
  double eps() const { return eps_; }
  double eps_prime() const { return eps_prime_; }
  double delta() const { return delta_; }
  const SketchEnsemble& ade() const { return ade_; }

  /// Replace x_i by z (||z|| <= D, rejected otherwise).
  void update(int i, const Eigen::VectorXd& z);

  /// Estimates w~_i of <q, x_i> for all i; requires ||q|| <= 1.
  Eigen::VectorXd query(const Eigen::VectorXd& q) const;

 private:
  int dim_ = 0;
  double norm_bound_ = 1.0;
  double eps_ = 0.0;
  double eps_prime_ = 0.0;
  double delta_ = 0.0;
  SketchEnsemble ade_;
};

}  // namespace submax
