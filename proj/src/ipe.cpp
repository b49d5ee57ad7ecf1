#include "submax/ipe.hpp"

#include <string>

namespace submax {

namespace {

// Rows scaled by 1/D and lifted with Q; feeds the ADE without materializing
// the lifted matrix.
class LiftQSource final : public RowSource {
 public:
  LiftQSource(const RowSource& inner, double norm_bound)
      : inner_(inner), norm_bound_(norm_bound), buf_(inner.cols()) {}

  int rows() const override { return inner_.rows(); }
  int cols() const override { return inner_.cols() + 2; }

  void row(int i, Eigen::VectorXd& out) const override {
    inner_.row(i, buf_);
    const double norm = buf_.norm();
    if (norm > norm_bound_ * (1.0 + 1e-9)) {
      throw std::invalid_argument("ipe init: ||x_" + std::to_string(i) +
                                  "|| exceeds the norm bound D");
    }
    out = lift_q(buf_ / norm_bound_);
  }

 private:
  const RowSource& inner_;
  double norm_bound_;
  mutable Eigen::VectorXd buf_;
};

double checked_eps_prime(double norm_bound, double eps, double delta) {
  if (!(norm_bound > 0.0)) {
    throw std::invalid_argument("ipe: norm bound D must be positive");
  }
  if (!(eps > 0.0 && eps < 1.5 * norm_bound)) {
    throw std::invalid_argument("ipe: eps must lie in (0, 3D/2)");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("ipe: delta must lie in (0,1)");
  }
  const double eps_prime = 2.0 * eps / (3.0 * norm_bound);
  // Error budget behind the +-eps contract; holds by construction.
  const double slack = 1.0 + 1e-12;
  if (0.5 * norm_bound * (2.0 * eps_prime + eps_prime * eps_prime) >
          1.5 * norm_bound * eps_prime * slack ||
      1.5 * norm_bound * eps_prime > eps * slack) {
    throw std::logic_error("ipe: eps' budget identity violated");
  }
  return eps_prime;
}

}  // namespace

IpeState::IpeState(const Eigen::MatrixXd& points, double norm_bound, double eps,
                   double delta, std::uint64_t seed, const AdeOverrides& overrides)
    : IpeState(DenseRows(points), norm_bound, eps, delta, seed, overrides) {}

IpeState::IpeState(const RowSource& points, double norm_bound, double eps,
                   double delta, std::uint64_t seed, const AdeOverrides& overrides)
    : dim_(points.cols()),
      norm_bound_(norm_bound),
      eps_(eps),
      eps_prime_(checked_eps_prime(norm_bound, eps, delta)),
      delta_(delta),
      ade_(LiftQSource(points, norm_bound), eps_prime_, delta, seed, overrides) {}

void IpeState::update(int i, const Eigen::VectorXd& z) {
  if (z.size() != dim_) {
    throw std::invalid_argument("ipe update: dimension mismatch");
  }
  if (z.norm() > norm_bound_ * (1.0 + 1e-9)) {
    throw std::invalid_argument("ipe update: ||z|| exceeds the norm bound D");
  }
  ade_.update(i, lift_q(z / norm_bound_));
}

Eigen::VectorXd IpeState::query(const Eigen::VectorXd& q) const {
  if (q.size() != dim_) {
    throw std::invalid_argument("ipe query: dimension mismatch");
  }
  if (q.norm() > 1.0 + 1e-9) {
    throw std::invalid_argument("ipe query: ||q|| must be <= 1");
  }
  const Eigen::VectorXd dists = ade_.query(lift_p(q));
  return norm_bound_ *
         (Eigen::VectorXd::Ones(dists.size()) - 0.5 * dists.cwiseProduct(dists));
}

}  // namespace submax
