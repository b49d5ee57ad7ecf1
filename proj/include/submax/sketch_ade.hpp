#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <cstdint>
#include <memory>
#include <vector>

namespace submax {

/// Rademacher projection: m x d matrix with entries +-1/sqrt(m), addressable
/// by (seed, row, column) so it never has to be stored to be reapplied.
struct SignProjection {
  std::uint64_t seed = 0;
  int rows = 0;
  int cols = 0;

  /// out = P x, streaming entry generation.
  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& out) const;

  /// Dense materialization (projection cache / tests).
  Eigen::MatrixXd materialize() const;
};

/// Testing and benchmarking knobs; zero means "derive from the formulas".
struct AdeOverrides {
  int sketches = 0;       // L
  int proj_dim = 0;       // m
  int query_samples = 0;  // r
  std::size_t cache_budget_bytes = 768u * 1024u * 1024u;
};

struct AdeParams {
  int sketches = 1;       // L
  int proj_dim = 1;       // m
  int query_samples = 1;  // r
  bool exact = false;     // m >= ambient dimension: store points, answer exactly
};

/// L = max(32, 4r), r = ceil(10 ln(2n/delta)), m = ceil(8 eps^-2 ln(8nL/delta)).
/// When the derived m reaches the ambient dimension the projection cannot
/// help and the ensemble collapses to exact storage (see AdeParams::exact).
AdeParams derive_ade_params(int n, int dim, double eps, double delta,
                            const AdeOverrides& overrides = {});

/// Point provider for initialization; lets callers feed transformed rows
/// (flattened outer products, asymmetric lifts) without materializing an
/// n x d matrix.
class RowSource {
 public:
  virtual ~RowSource() = default;
  virtual int rows() const = 0;
  virtual int cols() const = 0;
  virtual void row(int i, Eigen::VectorXd& out) const = 0;
};

class DenseRows final : public RowSource {
 public:
  explicit DenseRows(const Eigen::MatrixXd& m) : m_(m) {}
  int rows() const override { return static_cast<int>(m_.rows()); }
  int cols() const override { return static_cast<int>(m_.cols()); }
  void row(int i, Eigen::VectorXd& out) const override {
    out = m_.row(i).transpose();
  }

 private:
  const Eigen::MatrixXd& m_;
};

/// Adaptive-query-robust Euclidean distance estimation.
///
/// L independent Rademacher sketches of the points; a query samples r sketch
/// indices with replacement from a dedicated random stream (independent of
/// the build seed) and reports, per point, the median of the sampled sketch
/// distances. Contract: with probability >= 1-delta every estimate lies in
/// (1 +- eps) of the true distance.
///
/// Queries are read-only and may run concurrently; update requires exclusive
/// access and must not overlap any query.
class SketchEnsemble {
 public:
  SketchEnsemble(const RowSource& points, double eps, double delta,
                 std::uint64_t seed, const AdeOverrides& overrides = {});
  SketchEnsemble(const Eigen::MatrixXd& points, double eps, double delta,
                 std::uint64_t seed, const AdeOverrides& overrides = {});

  // Movable; a move must not overlap concurrent queries.
  SketchEnsemble(SketchEnsemble&& other) noexcept
      : n_(other.n_),
        d_(other.d_),
        eps_(other.eps_),
        delta_(other.delta_),
        params_(other.params_),
        build_seed_(other.build_seed_),
        query_seed_(other.query_seed_),
        query_counter_(other.query_counter_.load()),
        points_(std::move(other.points_)),
        sketched_(std::move(other.sketched_)),
        proj_cache_(std::move(other.proj_cache_)),
        cached_(other.cached_) {}

  SketchEnsemble& operator=(SketchEnsemble&& other) noexcept {
    n_ = other.n_;
    d_ = other.d_;
    eps_ = other.eps_;
    delta_ = other.delta_;
    params_ = other.params_;
    build_seed_ = other.build_seed_;
    query_seed_ = other.query_seed_;
    query_counter_.store(other.query_counter_.load());
    points_ = std::move(other.points_);
    sketched_ = std::move(other.sketched_);
    proj_cache_ = std::move(other.proj_cache_);
    cached_ = other.cached_;
    return *this;
  }

  int count() const { return n_; }
  int dim() const { return d_; }
  double eps() const { return eps_; }
  double delta() const { return delta_; }
  const AdeParams& params() const { return params_; }
  bool exact_mode() const { return params_.exact; }

  /// Replace x_i by z. Re-sketching z with the same bits as init, so an
  /// update with the current point leaves the state bitwise unchanged.
  void update(int i, const Eigen::VectorXd& z);

  /// Distance estimates d~_i for all i.
  Eigen::VectorXd query(const Eigen::VectorXd& q) const;

  /// Invariant check: stored sketch rows of i match re-projection of x_i.
  bool reproject_check(int i, const Eigen::VectorXd& x_i) const;

  /// Stored sketch of all points under sketch ell (the point matrix itself
  /// in exact mode). State inspection for tests.
  const Eigen::MatrixXd& sketch_matrix(int ell) const;

 private:
  void sketch_point(int ell, const Eigen::VectorXd& x, Eigen::VectorXd& out) const;
  std::uint64_t sketch_seed(int ell) const;

  int n_ = 0;
  int d_ = 0;
  double eps_ = 0.0;
  double delta_ = 0.0;
  AdeParams params_;
  std::uint64_t build_seed_ = 0;
  std::uint64_t query_seed_ = 0;
  mutable std::atomic<std::uint64_t> query_counter_{0};

  Eigen::MatrixXd points_;                 // exact mode only (n x d)
  std::vector<Eigen::MatrixXd> sketched_;  // sketch mode: L matrices, n x m
  std::vector<Eigen::MatrixXd> proj_cache_;  // dense projections when affordable
  bool cached_ = false;
};

}  // namespace submax
