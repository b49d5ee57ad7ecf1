#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

#include "submax/core.hpp"

namespace submax {

/// Exhaustive optimum over feasible sets.
struct OptResult {
  std::vector<int> best_set;  // sorted ascending
  double best_value = 0.0;
  long enumerated = 0;  // feasible sets examined (includes the empty set)
};

/// Exact maximum of f over all feasible sets. Ties go to the
/// lexicographically smallest set. Enforces n <= 20.
OptResult brute_force_opt(const GroundVectors& gv, const MarginalOracle& oracle,
                          const Constraint& constraint);

/// Exact argmax of u_j^T M u_j over `live`, smallest-index tie-break.
std::pair<int, double> exact_qf_argmax(const GroundVectors& gv,
                                       const Eigen::MatrixXd& m,
                                       const std::vector<int>& live);

/// <q, x_i> for every row x_i of `points`.
Eigen::VectorXd exact_inner_products(const Eigen::MatrixXd& points,
                                     const Eigen::VectorXd& q);

}  // namespace submax
