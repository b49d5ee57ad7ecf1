#include "submax/oracle.hpp"

#include <limits>
#include <stdexcept>

namespace submax {

namespace {

struct Enumerator {
  const GroundVectors& gv;
  const MarginalOracle& oracle;
  const Constraint& constraint;
  OptResult result;
  std::vector<int> current;

  bool feasible_with(const std::vector<int>& s, int extra) const {
    if (const auto* card = std::get_if<Cardinality>(&constraint)) {
      return static_cast<int>(s.size()) + 1 <= card->k;
    }
    if (const auto* knap = std::get_if<Knapsack>(&constraint)) {
      double total = knap->weights(extra);
      for (int i : s) total += knap->weights(i);
      return total <= knap->budget + 1e-12;
    }
    const auto& matroid = std::get<Matroid>(constraint);
    std::vector<int> probe = s;
    probe.push_back(extra);
    return matroid.independent(probe);
  }

  void consider(double value) {
    ++result.enumerated;
    if (value > result.best_value ||
        (value == result.best_value && current < result.best_set)) {
      result.best_value = value;
      result.best_set = current;
    }
  }

  // DFS in index order; every feasible set is visited exactly once and the
  // visit order is lexicographic, so equal values keep the smallest set.
  void expand(int next, double value) {
    const Eigen::MatrixXd h = oracle.evaluate(current);
    for (int j = next; j < gv.count(); ++j) {
      if (!feasible_with(current, j)) continue;
      const double gain = quadratic_form(h, gv.vector(j));
      current.push_back(j);
      consider(value + gain);
      expand(j + 1, value + gain);
      current.pop_back();
    }
  }
};

}  // namespace

OptResult brute_force_opt(const GroundVectors& gv, const MarginalOracle& oracle,
                          const Constraint& constraint) {
  if (gv.count() > 20) {
    throw std::invalid_argument(
        "brute_force_opt: n <= 20 required (2^n enumeration)");
  }
  if (const auto* knap = std::get_if<Knapsack>(&constraint)) {
    if (knap->weights.size() != gv.count()) {
      throw std::invalid_argument("brute_force_opt: weight vector size != n");
    }
  }
  Enumerator e{gv, oracle, constraint, {}, {}};
  e.result.best_set = {};
  e.result.best_value = 0.0;  // f(empty) = 0
  e.consider(0.0);
  e.current.clear();
  e.expand(0, 0.0);
  return e.result;
}

std::pair<int, double> exact_qf_argmax(const GroundVectors& gv,
                                       const Eigen::MatrixXd& m,
                                       const std::vector<int>& live) {
  if (live.empty()) {
    throw std::invalid_argument("exact_qf_argmax: empty candidate set");
  }
  int best = -1;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int j : live) {
    gv.check_index(j);
    const double w = quadratic_form(m, gv.vector(j));
    if (w > best_value || (w == best_value && j < best)) {
      best_value = w;
      best = j;
    }
  }
  return {best, best_value};
}

Eigen::VectorXd exact_inner_products(const Eigen::MatrixXd& points,
                                     const Eigen::VectorXd& q) {
  if (points.cols() != q.size()) {
    throw std::invalid_argument("exact_inner_products: dimension mismatch");
  }
  return points * q;
}

}  // namespace submax
