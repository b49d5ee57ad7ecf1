#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "submax/core.hpp"
#include "submax/lsh_maxip.hpp"
#include "submax/qfs.hpp"

namespace submax {

/// Incremental provider of h(S_t) along a greedy chain.
class GainChain {
 public:
  virtual ~GainChain() = default;
  virtual const Eigen::MatrixXd& current() const = 0;
  virtual void add(int j) = 0;
  virtual void reset() = 0;
};

/// O(d^2)-per-step chain for DiversityFamily instances.
class DiversityChain final : public GainChain {
 public:
  DiversityChain(const GroundVectors& gv, DiversityFamily family)
      : gv_(&gv), family_(std::move(family)) {}
  const Eigen::MatrixXd& current() const override { return family_.current(); }
  void add(int j) override { family_.add(*gv_, j); }
  void reset() override { family_.reset(); }

 private:
  const GroundVectors* gv_;
  DiversityFamily family_;
};

/// Chain over a caller-supplied MarginalOracle; recomputes h after each add.
class OracleChain final : public GainChain {
 public:
  explicit OracleChain(MarginalOracle oracle)
      : oracle_(std::move(oracle)), h_(oracle_.evaluate({})) {}
  const Eigen::MatrixXd& current() const override { return h_; }
  void add(int j) override {
    selected_.push_back(j);
    h_ = oracle_.evaluate(selected_);
  }
  void reset() override {
    selected_.clear();
    h_ = oracle_.evaluate(selected_);
  }

 private:
  MarginalOracle oracle_;
  std::vector<int> selected_;
  Eigen::MatrixXd h_;
};

/// Per-step selection backend. `select` receives h(S_t)/H (so ||.||_F <= 1
/// for approximate backends) and must return a live index.
class SearchBackend {
 public:
  virtual ~SearchBackend() = default;
  virtual int select(const Eigen::MatrixXd& a_normalized) = 0;
  virtual void erase(int i) = 0;
  virtual void update(int i, const Eigen::VectorXd& z) = 0;
  virtual const CandidateSet& live() const = 0;
  virtual long fallbacks() const { return 0; }
};

class ExactBackend final : public SearchBackend {
 public:
  explicit ExactBackend(const GroundVectors& gv);
  int select(const Eigen::MatrixXd& a) override;
  void erase(int i) override { live_.erase(i); }
  void update(int i, const Eigen::VectorXd& z) override;
  const CandidateSet& live() const override { return live_; }

 private:
  Eigen::MatrixXd points_;
  CandidateSet live_;
};

class QfsBackend final : public SearchBackend {
 public:
  QfsBackend(const GroundVectors& gv, double eps, double delta_step,
             QfsVariant variant, std::uint64_t seed,
             const AdeOverrides& overrides = {});
  int select(const Eigen::MatrixXd& a) override { return qfs_.query(a); }
  void erase(int i) override { qfs_.erase(i); }
  void update(int i, const Eigen::VectorXd& z) override { qfs_.update(i, z); }
  const CandidateSet& live() const override { return qfs_.candidates(); }
  const QfsState& state() const { return qfs_; }

 private:
  QfsState qfs_;
};

/// LSH-backed selection. A FAIL (no candidate above threshold) falls back to
/// an exact scan for that step and is counted.
class LshBackend final : public SearchBackend {
 public:
  LshBackend(const GroundVectors& gv, double c, double tau, double delta_step,
             std::uint64_t seed);
  int select(const Eigen::MatrixXd& a) override;
  void erase(int i) override;
  void update(int i, const Eigen::VectorXd& z) override;  // unsupported
  const CandidateSet& live() const override { return live_; }
  long fallbacks() const override { return fallbacks_; }

 private:
  LshQfs lsh_;
  Eigen::MatrixXd points_;
  CandidateSet live_;
  long fallbacks_ = 0;
};

enum class BackendKind { Exact, SketchFlat, SketchColumns, Lsh };

struct GreedyConfig {
  int k = 1;
  double eps = 0.1;
  double delta = 0.05;
  BackendKind backend = BackendKind::SketchFlat;
  double lsh_c = 0.9;
  double lsh_tau = 0.5;
  double h_bound = 0.0;  // 0: use the instance's Frobenius bound
  std::uint64_t seed = 0;
  AdeOverrides ade;
};

/// Backend with per-step failure budget delta_step (the driver passes
/// delta/k for cardinality runs, delta/rank for matroids, delta/n for
/// knapsack passes).
std::unique_ptr<SearchBackend> make_backend(const GreedyConfig& cfg,
                                            const GroundVectors& gv,
                                            double delta_step);

// Semi-online adversary: may replace one not-yet-selected vector per step.
struct AdversaryMove {
  int index = -1;
  Eigen::VectorXd z;
};
using Adversary = std::function<std::optional<AdversaryMove>(
    int step, const GroundVectors& gv, const std::vector<int>& selected,
    const Eigen::MatrixXd& h_current)>;

Adversary null_adversary();
Adversary random_perturb_adversary(double sigma, std::uint64_t seed);
/// Shrinks the currently best live candidate's vector toward zero.
Adversary greedy_spoiler_adversary(double shrink = 0.5);

// Generic driver cores (chain state must be at S = empty on entry).

/// Exact greedy, one O(d^2) quadratic form per candidate per step.
SelectionRun greedy_naive(const GroundVectors& gv, GainChain& chain, int k);

/// Exact greedy via d-column blocks of diag(U^T A U); identical chain and
/// tie-break as greedy_naive.
SelectionRun greedy_batch(const GroundVectors& gv, GainChain& chain, int k);

/// Backend-driven greedy under a cardinality constraint.
SelectionRun greedy_with_backend(const GroundVectors& gv, GainChain& chain,
                                 int k, SearchBackend& backend, double h_bound);

/// Matroid-constrained greedy: infeasible candidates are deleted from the
/// backend before each query. Ends early if everything is deleted.
SelectionRun greedy_matroid(const GroundVectors& gv, GainChain& chain,
                            const Matroid& matroid, SearchBackend& backend,
                            double h_bound);

// Instance-level entry points.

SelectionRun greedy_naive(const DiversityInstance& inst, int k);
SelectionRun greedy_batch(const DiversityInstance& inst, int k);
SelectionRun greedy_fast(const DiversityInstance& inst, const GreedyConfig& cfg);
SelectionRun greedy_lsh(const DiversityInstance& inst, const GreedyConfig& cfg);
SelectionRun greedy_matroid(const DiversityInstance& inst, const Matroid& matroid,
                            const GreedyConfig& cfg);

/// Two-pass knapsack greedy: pass 1 ranks by gain, pass 2 by gain per unit
/// cost (vectors scaled by 1/sqrt(w)); both passes delete infeasible items as
/// they surface. Returns the better run by exact f.
SelectionRun knapsack_two_pass(const DiversityInstance& inst,
                               const Eigen::VectorXd& weights, double budget,
                               const GreedyConfig& cfg);

/// Cardinality greedy with an adversary that may move one unselected vector
/// per step (applied before the query, after h(S_t) is formed). With the
/// null adversary this is exactly greedy_fast.
SelectionRun semi_online_run(const DiversityInstance& inst,
                             const GreedyConfig& cfg, const Adversary& adversary);

}  // namespace submax
