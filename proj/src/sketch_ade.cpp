#include "submax/sketch_ade.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "submax/common.hpp"

namespace submax {

namespace {

// Above this projection size (entries), initialization switches to blocked
// matrix products; per-row results then match the update path only up to
// roundoff instead of bitwise. Contract-scale ensembles stay far below it.
constexpr std::size_t kBlockedInitThreshold = std::size_t{1} << 22;
constexpr int kInitBlockRows = 256;

}  // namespace

void SignProjection::apply(const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
  if (x.size() != cols) {
    throw std::invalid_argument("SignProjection::apply: dimension mismatch");
  }
  out.resize(rows);
  const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
  const int blocks = (cols + 63) / 64;
  for (int j = 0; j < rows; ++j) {
    double acc = 0.0;
    for (int blk = 0; blk < blocks; ++blk) {
      std::uint64_t bits = mix3(seed, static_cast<std::uint64_t>(j),
                                static_cast<std::uint64_t>(blk));
      const int hi = std::min(cols, (blk + 1) * 64);
      for (int c = blk * 64; c < hi; ++c) {
        acc += (bits & 1u) ? x(c) : -x(c);
        bits >>= 1;
      }
    }
    out(j) = acc * scale;
  }
}

Eigen::MatrixXd SignProjection::materialize() const {
  Eigen::MatrixXd p(rows, cols);
  const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
  const int blocks = (cols + 63) / 64;
  for (int j = 0; j < rows; ++j) {
    for (int blk = 0; blk < blocks; ++blk) {
      std::uint64_t bits = mix3(seed, static_cast<std::uint64_t>(j),
                                static_cast<std::uint64_t>(blk));
      const int hi = std::min(cols, (blk + 1) * 64);
      for (int c = blk * 64; c < hi; ++c) {
        p(j, c) = (bits & 1u) ? scale : -scale;
        bits >>= 1;
      }
    }
  }
  return p;
}

AdeParams derive_ade_params(int n, int dim, double eps, double delta,
                            const AdeOverrides& o) {
  if (n < 1 || dim < 1) {
    throw std::invalid_argument("ade: need n >= 1 and d >= 1");
  }
  if (!(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("ade: eps and delta must lie in (0,1)");
  }
  AdeParams p;
  const double nd = static_cast<double>(n);
  p.query_samples = o.query_samples > 0
                        ? o.query_samples
                        : static_cast<int>(std::ceil(10.0 * std::log(2.0 * nd / delta)));
  p.query_samples = std::max(1, p.query_samples);
  p.sketches = o.sketches > 0 ? o.sketches : std::max(32, 4 * p.query_samples);
  if (o.proj_dim > 0) {
    p.proj_dim = o.proj_dim;
  } else {
    p.proj_dim = static_cast<int>(std::ceil(
        8.0 / (eps * eps) * std::log(8.0 * nd * p.sketches / delta)));
  }
  if (p.proj_dim >= dim) {
    // A projection at or above the ambient dimension buys nothing; store the
    // points themselves and answer exactly. The (1 +- eps) contract then
    // holds with probability 1.
    p.exact = true;
    p.proj_dim = dim;
    p.sketches = 1;
    p.query_samples = 1;
  }
  return p;
}

SketchEnsemble::SketchEnsemble(const Eigen::MatrixXd& points, double eps,
                               double delta, std::uint64_t seed,
                               const AdeOverrides& overrides)
    : SketchEnsemble(DenseRows(points), eps, delta, seed, overrides) {}

SketchEnsemble::SketchEnsemble(const RowSource& points, double eps, double delta,
                               std::uint64_t seed, const AdeOverrides& overrides)
    : n_(points.rows()),
      d_(points.cols()),
      eps_(eps),
      delta_(delta),
      params_(derive_ade_params(points.rows(), points.cols(), eps, delta, overrides)),
      build_seed_(substream(seed, 0xadeULL)),
      query_seed_(substream(seed, 0x9ce7ULL)) {
  Eigen::VectorXd x(d_);
  if (params_.exact) {
    points_.resize(n_, d_);
    for (int i = 0; i < n_; ++i) {
      points.row(i, x);
      points_.row(i) = x.transpose();
    }
    return;
  }

  const std::size_t proj_entries =
      static_cast<std::size_t>(params_.proj_dim) * static_cast<std::size_t>(d_);
  const std::size_t cache_bytes =
      static_cast<std::size_t>(params_.sketches) * proj_entries * sizeof(double);
  cached_ = cache_bytes <= overrides.cache_budget_bytes;
  if (cached_) {
    proj_cache_.reserve(params_.sketches);
    for (int ell = 0; ell < params_.sketches; ++ell) {
      proj_cache_.push_back(
          SignProjection{sketch_seed(ell), params_.proj_dim, d_}.materialize());
    }
  }
  sketched_.assign(params_.sketches, Eigen::MatrixXd(n_, params_.proj_dim));

  if (proj_entries <= kBlockedInitThreshold) {
    Eigen::VectorXd sx(params_.proj_dim);
    for (int i = 0; i < n_; ++i) {
      points.row(i, x);
      for (int ell = 0; ell < params_.sketches; ++ell) {
        sketch_point(ell, x, sx);
        sketched_[ell].row(i) = sx.transpose();
      }
    }
    return;
  }

  // Large projections: sketch point blocks with matrix products.
  Eigen::MatrixXd block(kInitBlockRows, d_);
  for (int base = 0; base < n_; base += kInitBlockRows) {
    const int rows = std::min(kInitBlockRows, n_ - base);
    for (int i = 0; i < rows; ++i) {
      points.row(base + i, x);
      block.row(i) = x.transpose();
    }
    for (int ell = 0; ell < params_.sketches; ++ell) {
      const Eigen::MatrixXd proj =
          cached_ ? proj_cache_[ell]
                  : SignProjection{sketch_seed(ell), params_.proj_dim, d_}
                        .materialize();
      sketched_[ell].middleRows(base, rows).noalias() =
          block.topRows(rows) * proj.transpose();
    }
  }
}

std::uint64_t SketchEnsemble::sketch_seed(int ell) const {
  return substream(build_seed_, static_cast<std::uint64_t>(ell));
}

void SketchEnsemble::sketch_point(int ell, const Eigen::VectorXd& x,
                                  Eigen::VectorXd& out) const {
  if (cached_) {
    out.noalias() = proj_cache_[ell] * x;
  } else {
    SignProjection{sketch_seed(ell), params_.proj_dim, d_}.apply(x, out);
  }
}

void SketchEnsemble::update(int i, const Eigen::VectorXd& z) {
  if (i < 0 || i >= n_) {
    throw std::out_of_range("ade update: index out of range");
  }
  if (z.size() != d_) {
    throw std::invalid_argument("ade update: dimension mismatch");
  }
  if (params_.exact) {
    points_.row(i) = z.transpose();
    return;
  }
  Eigen::VectorXd sx(params_.proj_dim);
  for (int ell = 0; ell < params_.sketches; ++ell) {
    sketch_point(ell, z, sx);
    sketched_[ell].row(i) = sx.transpose();
  }
}

Eigen::VectorXd SketchEnsemble::query(const Eigen::VectorXd& q) const {
  if (q.size() != d_) {
    throw std::invalid_argument("ade query: dimension mismatch");
  }
  if (params_.exact) {
    return (points_.rowwise() - q.transpose()).rowwise().norm();
  }

  // Fresh per-query sample of r sketch indices, with replacement.
  const std::uint64_t ticket = query_counter_.fetch_add(1);
  Rng stream(mix3(query_seed_, ticket, 0x5a17ULL));
  const int r = params_.query_samples;
  std::vector<int> picks(r);
  for (int& p : picks) p = stream.next_index(params_.sketches);

  std::vector<int> distinct = picks;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  Eigen::MatrixXd dists(n_, static_cast<int>(distinct.size()));
  Eigen::VectorXd sq(params_.proj_dim);
  for (std::size_t t = 0; t < distinct.size(); ++t) {
    sketch_point(distinct[t], q, sq);
    dists.col(static_cast<int>(t)) =
        (sketched_[distinct[t]].rowwise() - sq.transpose()).rowwise().norm();
  }
  std::vector<int> col_of(params_.sketches, -1);
  for (std::size_t t = 0; t < distinct.size(); ++t) {
    col_of[distinct[t]] = static_cast<int>(t);
  }

  Eigen::VectorXd out(n_);
  std::vector<double> buf(r);
  for (int i = 0; i < n_; ++i) {
    for (int s = 0; s < r; ++s) buf[s] = dists(i, col_of[picks[s]]);
    auto mid = buf.begin() + r / 2;
    std::nth_element(buf.begin(), mid, buf.end());
    if (r % 2 == 1) {
      out(i) = *mid;
    } else {
      const double upper = *mid;
      const double lower = *std::max_element(buf.begin(), mid);
      out(i) = 0.5 * (lower + upper);
    }
  }
  return out;
}

bool SketchEnsemble::reproject_check(int i, const Eigen::VectorXd& x_i) const {
  if (i < 0 || i >= n_) return false;
  if (params_.exact) {
    return points_.row(i) == x_i.transpose();
  }
  Eigen::VectorXd sx(params_.proj_dim);
  const double tol = 1e-9;
  for (int ell = 0; ell < params_.sketches; ++ell) {
    sketch_point(ell, x_i, sx);
    const double diff = (sketched_[ell].row(i) - sx.transpose()).norm();
    if (diff > tol * std::max(1.0, sx.norm())) return false;
  }
  return true;
}

const Eigen::MatrixXd& SketchEnsemble::sketch_matrix(int ell) const {
  if (params_.exact) return points_;
  return sketched_.at(static_cast<std::size_t>(ell));
}

}  // namespace submax
