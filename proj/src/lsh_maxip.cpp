#include "submax/lsh_maxip.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "submax/common.hpp"
#include "submax/ipe.hpp"
#include "submax/qfs.hpp"

namespace submax {

LshParams derive_lsh_params(int n, double tau, double delta) {
  if (n < 1) throw std::invalid_argument("lsh: need n >= 1");
  if (!(tau > 0.0 && tau < 1.0) || !(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("lsh: tau and delta must lie in (0,1)");
  }
  LshParams p;
  p.bits = std::max(1, static_cast<int>(std::ceil(std::log2(std::max(2, n)))));
  p.bits = std::min(p.bits, 62);
  p.p1 = 1.0 - std::acos(tau) / M_PI;
  const double hit = std::pow(p.p1, p.bits);
  p.tables = std::max(8, static_cast<int>(std::ceil(4.0 * std::log(1.0 / delta) / hit)));
  p.scan_cap = 10 * p.tables;
  return p;
}

HashEnsemble::HashEnsemble(const Eigen::MatrixXd& points, double c, double tau,
                           double delta, std::uint64_t seed)
    : points_(points), c_(c), tau_(tau), delta_(delta) {
  const int n = count();
  if (!(c > 0.0 && c < 1.0)) {
    throw std::invalid_argument("lsh: c must lie in (0,1)");
  }
  params_ = derive_lsh_params(n, tau, delta);
  for (int i = 0; i < n; ++i) {
    if (std::abs(points_.row(i).norm() - 1.0) > 1e-9) {
      throw std::invalid_argument("lsh: point " + std::to_string(i) +
                                  " is not unit norm");
    }
  }

  Rng rng(substream(seed, 0x15f4ULL));
  const int d = dim();
  hyperplanes_.resize(static_cast<Eigen::Index>(params_.tables) * params_.bits, d);
  for (Eigen::Index r = 0; r < hyperplanes_.rows(); ++r) {
    for (int j = 0; j < d; ++j) hyperplanes_(r, j) = rng.next_gaussian();
    const double norm = hyperplanes_.row(r).norm();
    if (norm > 0.0) hyperplanes_.row(r) /= norm;
  }

  tables_.resize(params_.tables);
  codes_.assign(n, std::vector<std::uint64_t>(params_.tables, 0));
  live_.assign(n, 1);
  live_count_ = n;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = points_.row(i).transpose();
    for (int t = 0; t < params_.tables; ++t) {
      const std::uint64_t code = code_for(t, x);
      codes_[i][t] = code;
      tables_[t][code].push_back(i);
    }
  }
}

std::uint64_t HashEnsemble::code_for(int table, const Eigen::VectorXd& x) const {
  std::uint64_t code = 0;
  const Eigen::Index base = static_cast<Eigen::Index>(table) * params_.bits;
  for (int k = 0; k < params_.bits; ++k) {
    code = (code << 1) | (hyperplanes_.row(base + k).dot(x) >= 0.0 ? 1u : 0u);
  }
  return code;
}

std::optional<int> HashEnsemble::query(const Eigen::VectorXd& q) const {
  if (q.size() != dim()) {
    throw std::invalid_argument("lsh query: dimension mismatch");
  }
  if (std::abs(q.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("lsh query: ||q|| must be 1");
  }
  int best = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  int scanned = 0;
  std::unordered_set<int> seen;
  for (int t = 0; t < params_.tables && scanned < params_.scan_cap; ++t) {
    const auto it = tables_[t].find(code_for(t, q));
    if (it == tables_[t].end()) continue;
    for (int idx : it->second) {
      if (!seen.insert(idx).second) continue;
      const double score = points_.row(idx).dot(q);
      ++scanned;
      if (score > best_score || (score == best_score && idx < best)) {
        best_score = score;
        best = idx;
      }
      if (scanned >= params_.scan_cap) break;
    }
  }
  if (best < 0 || best_score < c_ * tau_ - 1e-12) return std::nullopt;
  return best;
}

void HashEnsemble::erase(int i) {
  if (i < 0 || i >= count()) {
    throw std::out_of_range("lsh erase: index out of range");
  }
  if (!live_[i]) {
    throw std::invalid_argument("lsh erase: index " + std::to_string(i) +
                                " already deleted");
  }
  for (int t = 0; t < params_.tables; ++t) {
    auto& bucket = tables_[t][codes_[i][t]];
    bucket.erase(std::remove(bucket.begin(), bucket.end(), i), bucket.end());
  }
  live_[i] = 0;
  --live_count_;
}

bool HashEnsemble::absent_from_all_buckets(int i) const {
  for (const auto& table : tables_) {
    for (const auto& [code, bucket] : table) {
      if (std::find(bucket.begin(), bucket.end(), i) != bucket.end()) return false;
    }
  }
  return true;
}

LshQfs::LshQfs(const GroundVectors& gv, double c, double tau, double delta,
               std::uint64_t seed)
    : d_(gv.dim()),
      maxip_([&] {
        if (gv.norm_bound() > 1.0 + 1e-9) {
          throw std::invalid_argument("lsh qfs: requires ||u_i|| <= 1");
        }
        const int n = gv.count();
        Eigen::MatrixXd lifted(n, d_ * d_ + 2);
        for (int i = 0; i < n; ++i) {
          lifted.row(i) = lift_q(flatten(gv.row(i).transpose())).transpose();
        }
        return lifted;
      }(), c, tau, delta, seed) {}

std::optional<int> LshQfs::query(const Eigen::MatrixXd& m) const {
  if (m.rows() != d_ || m.cols() != d_) {
    throw std::invalid_argument("lsh qfs query: M must be d x d");
  }
  if (m.norm() > 1.0 + 1e-9) {
    throw std::invalid_argument("lsh qfs query: ||M||_F must be <= 1");
  }
  return maxip_.query(lift_p(flatten_matrix(m)));
}

void LshQfs::erase(int i) { maxip_.erase(i); }

}  // namespace submax
