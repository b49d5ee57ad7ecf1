#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "submax/common.hpp"
#include "submax/core.hpp"
#include "submax/qfs.hpp"

namespace submax::audit {

/// One statistical battery outcome: observed violation rate vs. its budget.
struct BatteryResult {
  std::string name;
  int trials = 0;
  int violations = 0;
  double budget = 0.0;  // largest acceptable violation rate
  std::string detail;

  double rate() const {
    return trials > 0 ? static_cast<double>(violations) / trials : 0.0;
  }
  bool pass() const { return rate() <= budget + 1e-12; }
  std::string line() const;
};

/// Random d-vector with ||v|| = scale.
Eigen::VectorXd random_direction(Rng& rng, int d, double scale);

/// Random PSD matrix normalized to unit Frobenius norm.
Eigen::MatrixXd random_psd_query(Rng& rng, int d);

// Deterministic identity batteries (budget 0).
BatteryResult exact_identities(int cases, std::uint64_t seed);

// Greedy guarantees against the brute-force oracle (budget 0).
BatteryResult greedy_ratio(int instances, int max_n, int max_k, std::uint64_t seed);
BatteryResult mock_oracle_bound(int instances, double eps, std::uint64_t seed);
BatteryResult chain_equality(int instances, std::uint64_t seed);
BatteryResult matroid_bound(int instances, std::uint64_t seed);
BatteryResult knapsack_bound(int instances, std::uint64_t seed);
BatteryResult null_adversary_equality(int instances, std::uint64_t seed);

// Probabilistic contracts, budget = delta + slack.
BatteryResult ipe_contract(int builds, int queries, int n, int d,
                           double norm_bound, double eps, double delta,
                           double slack, std::uint64_t seed);
BatteryResult ipe_update_contract(int builds, int n, int d, double eps,
                                  double delta, double slack, std::uint64_t seed);
BatteryResult qfs_contract(QfsVariant variant, int trials, int n, int d,
                           double eps, double delta, double slack,
                           std::uint64_t seed);
BatteryResult lsh_recall(int trials, int n, int d, double tau, double c,
                         double delta, double slack, std::uint64_t seed);
BatteryResult lsh_delete_exactness(int trials, std::uint64_t seed);

struct ScalingPoint {
  int d = 0;
  double naive_step_ms = 0.0;
  double fast_step_ms = 0.0;
};

struct ScalingReport {
  std::vector<ScalingPoint> points;
  double naive_growth = 0.0;  // per-step ratio, largest dim vs smallest
  int crossover_dim = -1;     // smallest measured d with fast < naive
  bool naive_growth_ok = false;
  std::string detail;
};

/// Per-step timing of greedy_naive vs greedy_fast across dimensions. The
/// fast backend runs with a light, documented ensemble profile
/// (L=8, m=64, r=3) so query cost, not sketch construction, is measured.
ScalingReport scaling_probe(int n, int k, const std::vector<int>& dims,
                            double eps, double delta, std::uint64_t seed);

}  // namespace submax::audit
