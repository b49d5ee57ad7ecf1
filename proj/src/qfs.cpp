#include "submax/qfs.hpp"

#include <limits>
#include <stdexcept>
#include <string>

#include "submax/common.hpp"

namespace submax {

namespace {

class FlattenSource final : public RowSource {
 public:
  explicit FlattenSource(const GroundVectors& gv) : gv_(gv) {}
  int rows() const override { return gv_.count(); }
  int cols() const override { return gv_.dim() * gv_.dim(); }
  void row(int i, Eigen::VectorXd& out) const override {
    out = flatten(gv_.row(i).transpose());
  }

 private:
  const GroundVectors& gv_;
};

// Row i is (u_i)_c * u_i, the c-th column of u_i u_i^T.
class ScaledColumnSource final : public RowSource {
 public:
  ScaledColumnSource(const GroundVectors& gv, int c) : gv_(gv), c_(c) {}
  int rows() const override { return gv_.count(); }
  int cols() const override { return gv_.dim(); }
  void row(int i, Eigen::VectorXd& out) const override {
    out = gv_.matrix()(i, c_) * gv_.row(i).transpose();
  }

 private:
  const GroundVectors& gv_;
  int c_;
};

void check_query_matrix(const Eigen::MatrixXd& m, int d) {
  if (m.rows() != d || m.cols() != d) {
    throw std::invalid_argument("qfs query: M must be d x d");
  }
  if (m.norm() > 1.0 + 1e-9) {
    throw std::invalid_argument("qfs query: ||M||_F must be <= 1");
  }
}

}  // namespace

CandidateSet::CandidateSet(int n) {
  for (int i = 0; i < n; ++i) live_.insert(live_.end(), i);
}

void CandidateSet::erase(int i) {
  const auto it = live_.find(i);
  if (it == live_.end()) {
    throw std::invalid_argument("CandidateSet: index " + std::to_string(i) +
                                " is not live");
  }
  live_.erase(it);
}

QfsState::QfsState(const GroundVectors& gv, double eps, double delta,
                   QfsVariant variant, std::uint64_t seed,
                   const AdeOverrides& overrides)
    : variant_(variant),
      n_(gv.count()),
      d_(gv.dim()),
      norm_bound_(gv.norm_bound()),
      live_(gv.count()) {
  const double flat_bound = norm_bound_ * norm_bound_;  // ||flatten(u)|| = ||u||^2
  if (variant_ == QfsVariant::Flat) {
    flat_.emplace(FlattenSource(gv), flat_bound, eps, delta,
                  substream(seed, 0xf1a7ULL), overrides);
    return;
  }
  columns_.reserve(d_);
  for (int c = 0; c < d_; ++c) {
    columns_.emplace_back(ScaledColumnSource(gv, c), flat_bound, eps / d_,
                          delta / d_, substream(seed, 0xc0150000ULL + c),
                          overrides);
  }
}

Eigen::VectorXd QfsState::estimate_all(const Eigen::MatrixXd& m) const {
  check_query_matrix(m, d_);
  if (variant_ == QfsVariant::Flat) {
    return flat_->query(flatten_matrix(m));
  }
  Eigen::VectorXd s = Eigen::VectorXd::Zero(n_);
  for (int c = 0; c < d_; ++c) {
    s += columns_[c].query(m.col(c));
  }
  return s;
}

int QfsState::query(const Eigen::MatrixXd& m) const {
  if (live_.empty()) {
    throw std::logic_error("qfs query: candidate set is empty");
  }
  const Eigen::VectorXd w = estimate_all(m);
  int best = -1;
  double best_w = -std::numeric_limits<double>::infinity();
  for (int j : live_.items()) {  // ascending, so ties keep the smallest index
    if (w(j) > best_w) {
      best_w = w(j);
      best = j;
    }
  }
  return best;
}

void QfsState::erase(int i) { live_.erase(i); }

void QfsState::update(int i, const Eigen::VectorXd& z) {
  if (i < 0 || i >= n_) {
    throw std::out_of_range("qfs update: index out of range");
  }
  if (z.size() != d_) {
    throw std::invalid_argument("qfs update: dimension mismatch");
  }
  if (z.norm() > norm_bound_ * (1.0 + 1e-9)) {
    throw std::invalid_argument("qfs update: ||z|| exceeds the norm bound");
  }
  if (variant_ == QfsVariant::Flat) {
    flat_->update(i, flatten(z));
    return;
  }
  for (int c = 0; c < d_; ++c) {
    columns_[c].update(i, z(c) * z);
  }
}

}  // namespace submax
