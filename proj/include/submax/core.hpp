#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace submax {

/// Quadratic form u^T A u for any (possibly asymmetric) square A.
template <typename DerivedA, typename DerivedU>
double quadratic_form(const Eigen::MatrixBase<DerivedA>& a,
                      const Eigen::MatrixBase<DerivedU>& u) {
  return u.dot(a * u);
}

/// Ground set embedding: n vectors u_1..u_n in R^d with a norm bound D.
class GroundVectors {
 public:
  GroundVectors() = default;

  /// Rows of `vectors` are the u_i. Requires n >= 1, d >= 1, D > 0 and
  /// ||u_i|| <= D for every i.
  GroundVectors(Eigen::MatrixXd vectors, double norm_bound);

  int count() const { return static_cast<int>(vectors_.rows()); }
  int dim() const { return static_cast<int>(vectors_.cols()); }
  double norm_bound() const { return norm_bound_; }

  const Eigen::MatrixXd& matrix() const { return vectors_; }
  Eigen::MatrixXd::ConstRowXpr row(int i) const { return vectors_.row(i); }
  Eigen::VectorXd vector(int i) const;

  /// Replace u_i (semi-online updates). Rejects ||z|| > D.
  void set_vector(int i, const Eigen::VectorXd& z);

  void check_index(int i) const;

 private:
  Eigen::MatrixXd vectors_;  // n x d, row-per-element
  double norm_bound_ = 1.0;
};

/// Set-indexed gain matrix: h(S) with Delta_f(i|S) = u_i^T h(S) u_i.
/// `evaluate` must be a pure function of the set (order independent).
struct MarginalOracle {
  std::function<Eigen::MatrixXd(const std::vector<int>&)> evaluate;
  double frobenius_bound = 1.0;  // H >= sup_S ||h(S)||_F
  bool psd = false;              // true when every h(S) is PSD
};

/// Concrete instance family h(S) = B - 2*lambda * sum_{j in S} u_j u_j^T.
///
/// The induced objective f(S) = sum_i u_i^T B u_i - lambda * sum_{i != j}
/// <u_i, u_j>^2 is submodular for lambda >= 0 and monotone when lambda is
/// at most max_monotone_lambda. `current()` tracks h of the selected chain
/// incrementally in O(d^2) per add.
class DiversityFamily {
 public:
  DiversityFamily(Eigen::MatrixXd base, double lambda);

  const Eigen::MatrixXd& base() const { return base_; }
  double lambda() const { return lambda_; }
  const Eigen::MatrixXd& current() const { return current_; }

  /// current_h <- current_h - 2*lambda*u_j u_j^T.
  void add(const GroundVectors& gv, int j);
  void reset() { current_ = base_; }

  /// Closed form h(S) recomputed from scratch.
  Eigen::MatrixXd h_of(const GroundVectors& gv, const std::vector<int>& s) const;

  /// ||B||_F + 2*lambda*sum_j ||u_j||^2, a valid bound for every h(S).
  double frobenius_bound(const GroundVectors& gv) const;

  MarginalOracle oracle(const GroundVectors& gv) const;

  /// Largest lambda keeping the induced f monotone:
  /// min_i u_i^T B u_i / (2 * sum_{j != i} <u_i, u_j>^2).
  static double max_monotone_lambda(const Eigen::MatrixXd& base,
                                    const GroundVectors& gv);

 private:
  Eigen::MatrixXd base_;
  double lambda_;
  Eigen::MatrixXd current_;
};

/// Incremental maintenance of h after a greedy add (free-function form).
void diversity_step(DiversityFamily& family, const GroundVectors& gv, int j);

struct Cardinality {
  int k = 0;
};

struct Matroid {
  std::function<bool(const std::vector<int>&)> independent;
  int rank = 0;
};

struct Knapsack {
  Eigen::VectorXd weights;  // w(j) > 0
  double budget = 0.0;      // W > 0
};

using Constraint = std::variant<Cardinality, Matroid, Knapsack>;

/// Partition matroid: element i belongs to block `block_of[i]` and at most
/// `capacity[b]` elements of block b may be selected.
Matroid make_partition_matroid(const std::vector<int>& block_of,
                               const std::vector<int>& capacity);

/// Output of one greedy run: ordered chain, per-step gains and timings.
struct SelectionRun {
  std::vector<int> chain;
  std::vector<double> gains;
  double value = 0.0;  // sum of gains
  std::vector<double> step_seconds;
  long fallbacks = 0;  // LSH exact-scan fallbacks
  long deletes = 0;    // backend delete operations issued
};

/// Delta_f(i|S) = u_i^T h(S) u_i. Requires i in range and i not in S.
double marginal_gain(const GroundVectors& gv, const MarginalOracle& oracle,
                     const std::vector<int>& s, int i);

/// f(chain) = sum_j Delta(i_j | S_{j-1}) with S_0 = empty.
/// Chain elements must be distinct.
double evaluate_f(const GroundVectors& gv, const MarginalOracle& oracle,
                  const std::vector<int>& chain);

/// Sampled diagnostics for an instance. Purely informational.
struct ValidationReport {
  int samples = 0;
  int monotonicity_violations = 0;  // Delta(i|S) < -1e-10
  int submodularity_violations = 0; // Delta(i|T) > Delta(i|S) + 1e-10 for S subset T
  int psd_violations = 0;           // min eigenvalue of h(S) < -1e-8
  int frobenius_violations = 0;     // ||h(S)||_F > H
  bool clean() const {
    return monotonicity_violations == 0 && submodularity_violations == 0 &&
           psd_violations == 0 && frobenius_violations == 0;
  }
};

ValidationReport validate_instance(const GroundVectors& gv,
                                   const MarginalOracle& oracle,
                                   int sample_budget, std::uint64_t seed = 1);

/// A generated DiversityFamily problem: vectors plus family parameters.
struct DiversityInstance {
  GroundVectors gv;
  Eigen::MatrixXd base;  // B
  double lambda = 0.0;

  MarginalOracle oracle() const;
  DiversityFamily family() const { return DiversityFamily(base, lambda); }
  double h_bound() const { return family().frobenius_bound(gv); }

  /// f(S) via the closed form (set order irrelevant).
  double value(const std::vector<int>& s) const;
};

enum class BaseKind { Identity, RandomSpd };

/// Random monotone instance: vector norms in [0.7, 1]*D and
/// lambda = lambda_scale * max_monotone_lambda (monotone for scale <= 1).
DiversityInstance make_diversity_instance(int n, int d, std::uint64_t seed,
                                          double lambda_scale,
                                          double norm_bound = 1.0,
                                          BaseKind base_kind = BaseKind::Identity);

}  // namespace submax
