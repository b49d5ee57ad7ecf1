#include "submax/audit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "submax/ipe.hpp"
#include "submax/lsh_maxip.hpp"
#include "submax/maximizers.hpp"
#include "submax/oracle.hpp"

namespace submax::audit {

namespace {

constexpr double kRatio1e = 1.0 - 1.0 / M_E;          // 1 - 1/e
constexpr double kKnapsackRatio = 0.5 - 0.5 / M_E;    // 1/2 - 1/(2e)

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + v.size() / 2;
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

Eigen::MatrixXd random_points(Rng& rng, int n, int d, double norm_bound) {
  Eigen::MatrixXd pts(n, d);
  for (int i = 0; i < n; ++i) {
    const double scale = (0.5 + 0.5 * rng.next_double()) * norm_bound;
    pts.row(i) = random_direction(rng, d, scale).transpose();
  }
  return pts;
}

}  // namespace

std::string BatteryResult::line() const {
  std::ostringstream os;
  os << name << ": trials=" << trials << " violations=" << violations
     << " rate=" << rate() << " budget=" << budget
     << (pass() ? " PASS" : " FAIL");
  if (!detail.empty()) os << " (" << detail << ")";
  return os.str();
}

Eigen::VectorXd random_direction(Rng& rng, int d, double scale) {
  Eigen::VectorXd v(d);
  double norm = 0.0;
  do {
    for (int j = 0; j < d; ++j) v(j) = rng.next_gaussian();
    norm = v.norm();
  } while (norm == 0.0);
  return v * (scale / norm);
}

Eigen::MatrixXd random_psd_query(Rng& rng, int d) {
  Eigen::MatrixXd g(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) g(i, j) = rng.next_gaussian();
  }
  Eigen::MatrixXd psd = g.transpose() * g;
  const double norm = psd.norm();
  if (norm > 0.0) psd /= norm;
  return psd;
}

BatteryResult exact_identities(int cases, std::uint64_t seed) {
  BatteryResult r;
  r.name = "exact-identities";
  r.budget = 0.0;
  Rng rng(substream(seed, 0x1dULL));
  for (int t = 0; t < cases; ++t) {
    ++r.trials;
    const int d = 2 + rng.next_index(7);
    bool bad = false;

    // Flattening: <vec(u u^T), vec(M)> = u^T M u (M need not be symmetric).
    const Eigen::VectorXd u = random_direction(rng, d, 0.2 + 2.0 * rng.next_double());
    Eigen::MatrixXd m(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) m(i, j) = rng.next_gaussian();
    }
    const double direct = quadratic_form(m, u);
    const double flat = flatten(u).dot(flatten_matrix(m));
    if (std::abs(flat - direct) > 1e-10 * std::max(1.0, std::abs(direct))) {
      bad = true;
    }

    // Asymmetric lift: unit norms and inner-product preservation.
    const Eigen::VectorXd a = random_direction(rng, d, rng.next_double());
    const Eigen::VectorXd b = random_direction(rng, d, rng.next_double());
    const Eigen::VectorXd qa = lift_q(a);
    const Eigen::VectorXd pb = lift_p(b);
    if (std::abs(qa.norm() - 1.0) > 1e-12 || std::abs(pb.norm() - 1.0) > 1e-12 ||
        std::abs(qa.dot(pb) - a.dot(b)) > 1e-12) {
      bad = true;
    }

    // Distance-to-inner-product conversion on exact lifted distances.
    const double bound = 0.5 + 2.0 * rng.next_double();
    const Eigen::VectorXd x = random_direction(rng, d, rng.next_double() * bound);
    const Eigen::VectorXd q = random_direction(rng, d, rng.next_double());
    const double dist = (lift_q(x / bound) - lift_p(q)).norm();
    const double recovered = inner_from_distance(bound, dist);
    const double truth = q.dot(x);
    if (std::abs(recovered - truth) > 1e-10 * std::max(1.0, std::abs(truth))) {
      bad = true;
    }

    if (bad) ++r.violations;
  }
  return r;
}

BatteryResult greedy_ratio(int instances, int max_n, int max_k,
                           std::uint64_t seed) {
  BatteryResult r;
  r.name = "greedy-ratio";
  r.budget = 0.0;
  Rng rng(substream(seed, 0x6eULL));
  for (int t = 0; t < instances; ++t) {
    ++r.trials;
    const int n = 6 + rng.next_index(std::max(1, max_n - 5));
    const int d = 2 + rng.next_index(3);
    const int k = 1 + rng.next_index(std::min(max_k, n));
    const auto inst =
        make_diversity_instance(n, d, rng.next_u64(), rng.next_double());
    const SelectionRun run = greedy_naive(inst, k);
    const OptResult opt =
        brute_force_opt(inst.gv, inst.oracle(), Cardinality{k});
    if (run.value < kRatio1e * opt.best_value - 1e-9) ++r.violations;
  }
  return r;
}

BatteryResult mock_oracle_bound(int instances, double eps, std::uint64_t seed) {
  BatteryResult r;
  r.name = "mock-oracle-bound";
  r.budget = 0.0;
  Rng rng(substream(seed, 0x0cULL));
  for (int t = 0; t < instances; ++t) {
    ++r.trials;
    const int n = 6 + rng.next_index(7);
    const int d = 2 + rng.next_index(3);
    const int k = 1 + rng.next_index(std::min(4, n));
    // lambda_scale <= 0.5 keeps every marginal well above eps, so the
    // perturbed objective stays monotone and the bound must hold on every run.
    const auto inst =
        make_diversity_instance(n, d, rng.next_u64(), 0.5 * rng.next_double());
    const MarginalOracle oracle = inst.oracle();
    const OptResult opt = brute_force_opt(inst.gv, oracle, Cardinality{k});

    // Worst-case deterministic +-eps oracle: penalize members of the optimal
    // set, boost everything else. The shift is modular, so the perturbed f
    // stays submodular.
    std::vector<double> sign(n, 1.0);
    for (int i : opt.best_set) sign[i] = -1.0;

    DiversityFamily family = inst.family();
    std::vector<int> chain;
    double realized = 0.0;
    std::vector<char> live(n, 1);
    for (int step = 0; step < k; ++step) {
      const Eigen::MatrixXd& h = family.current();
      int best = -1;
      double best_score = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j) {
        if (!live[j]) continue;
        const double score =
            quadratic_form(h, inst.gv.vector(j)) + eps * sign[j];
        if (score > best_score) {
          best_score = score;
          best = j;
        }
      }
      realized += quadratic_form(h, inst.gv.vector(best));
      live[best] = 0;
      chain.push_back(best);
      family.add(inst.gv, best);
    }
    const double bound =
        kRatio1e * opt.best_value - k * (2.0 - 1.0 / M_E) * eps;
    if (realized < bound - 1e-9) ++r.violations;
  }
  return r;
}

BatteryResult chain_equality(int instances, std::uint64_t seed) {
  BatteryResult r;
  r.name = "chain-equality";
  r.budget = 0.0;
  Rng rng(substream(seed, 0xce0ULL));
  const int ns[] = {10, 100, 1000};
  const int ds[] = {4, 32};
  int produced = 0;
  while (produced < instances) {
    for (int n : ns) {
      for (int d : ds) {
        if (produced >= instances) break;
        ++produced;
        ++r.trials;
        const auto inst =
            make_diversity_instance(n, d, rng.next_u64(), rng.next_double());
        const int k = std::min(n, 6);
        const SelectionRun naive = greedy_naive(inst, k);
        const SelectionRun batch = greedy_batch(inst, k);
        if (naive.chain != batch.chain) ++r.violations;
      }
    }
  }
  return r;
}

BatteryResult matroid_bound(int instances, std::uint64_t seed) {
  BatteryResult r;
  r.name = "matroid-half-ratio";
  r.budget = 0.0;
  Rng rng(substream(seed, 0x3a7ULL));
  for (int t = 0; t < instances; ++t) {
    ++r.trials;
    const int n = 6 + rng.next_index(7);
    const int d = 2 + rng.next_index(3);
    const auto inst =
        make_diversity_instance(n, d, rng.next_u64(), rng.next_double());
    const int parts = 2 + rng.next_index(2);
    std::vector<int> block_of(n);
    for (int i = 0; i < n; ++i) block_of[i] = rng.next_index(parts);
    std::vector<int> caps(parts);
    for (int& c : caps) c = 1 + rng.next_index(2);
    const Matroid matroid = make_partition_matroid(block_of, caps);

    GreedyConfig cfg;
    cfg.backend = BackendKind::Exact;
    cfg.k = matroid.rank;
    const SelectionRun run = greedy_matroid(inst, matroid, cfg);
    const OptResult opt = brute_force_opt(inst.gv, inst.oracle(), matroid);
    if (run.value < 0.5 * opt.best_value - 1e-9) ++r.violations;
  }
  return r;
}

BatteryResult knapsack_bound(int instances, std::uint64_t seed) {
  BatteryResult r;
  r.name = "knapsack-ratio";
  r.budget = 0.0;
  Rng rng(substream(seed, 0x2b5ULL));
  for (int t = 0; t < instances; ++t) {
    ++r.trials;
    const int n = 6 + rng.next_index(7);
    const int d = 2 + rng.next_index(3);
    const auto inst =
        make_diversity_instance(n, d, rng.next_u64(), rng.next_double());
    Eigen::VectorXd weights(n);
    for (int i = 0; i < n; ++i) weights(i) = 0.5 + rng.next_double();
    const double budget = (0.3 + 0.4 * rng.next_double()) * weights.sum();

    GreedyConfig cfg;
    cfg.backend = BackendKind::Exact;
    const SelectionRun run = knapsack_two_pass(inst, weights, budget, cfg);
    const OptResult opt =
        brute_force_opt(inst.gv, inst.oracle(), Knapsack{weights, budget});
    if (run.value < kKnapsackRatio * opt.best_value - 1e-9) ++r.violations;
  }
  return r;
}

BatteryResult null_adversary_equality(int instances, std::uint64_t seed) {
  BatteryResult r;
  r.name = "null-adversary-equality";
  r.budget = 0.0;
  Rng rng(substream(seed, 0x0afbULL));
  for (int t = 0; t < instances; ++t) {
    ++r.trials;
    const auto inst = make_diversity_instance(10 + rng.next_index(20), 4,
                                              rng.next_u64(), rng.next_double());
    GreedyConfig cfg;
    cfg.backend = BackendKind::SketchFlat;
    cfg.k = std::min(5, inst.gv.count());
    cfg.eps = 0.1;
    cfg.delta = 0.05;
    cfg.seed = rng.next_u64();
    const SelectionRun fast = greedy_fast(inst, cfg);
    const SelectionRun online = semi_online_run(inst, cfg, null_adversary());
    const bool same = fast.chain == online.chain && fast.gains == online.gains &&
                      fast.value == online.value;
    if (!same) ++r.violations;
  }
  return r;
}

BatteryResult ipe_contract(int builds, int queries, int n, int d,
                           double norm_bound, double eps, double delta,
                           double slack, std::uint64_t seed) {
  BatteryResult r;
  r.name = "ipe-contract";
  r.budget = delta + slack;
  Rng rng(substream(seed, 0x19eULL));
  const Eigen::MatrixXd points = random_points(rng, n, d, norm_bound);
  std::vector<Eigen::VectorXd> qs;
  qs.reserve(queries);
  for (int i = 0; i < queries; ++i) {
    qs.push_back(random_direction(rng, d, 0.5 + 0.5 * rng.next_double()));
  }
  for (int b = 0; b < builds; ++b) {
    ++r.trials;
    const IpeState ipe(points, norm_bound, eps, delta,
                       substream(seed, 0xb0000ULL + b));
    bool violated = false;
    for (const auto& q : qs) {
      const Eigen::VectorXd est = ipe.query(q);
      const Eigen::VectorXd truth = points * q;
      if ((est - truth).cwiseAbs().maxCoeff() > eps + 1e-9) {
        violated = true;
        break;
      }
    }
    if (violated) ++r.violations;
  }
  return r;
}

BatteryResult ipe_update_contract(int builds, int n, int d, double eps,
                                  double delta, double slack,
                                  std::uint64_t seed) {
  BatteryResult r;
  r.name = "ipe-update-contract";
  r.budget = delta + slack;
  Rng rng(substream(seed, 0x4bULL));
  const Eigen::MatrixXd points = random_points(rng, n, d, 1.0);
  const Eigen::VectorXd q = random_direction(rng, d, 1.0);
  for (int b = 0; b < builds; ++b) {
    ++r.trials;
    IpeState ipe(points, 1.0, eps, delta, substream(seed, 0xc0000ULL + b));
    const int target = rng.next_index(n);
    const Eigen::VectorXd z = random_direction(rng, d, rng.next_double());
    ipe.update(target, z);
    const Eigen::VectorXd est = ipe.query(q);
    if (std::abs(est(target) - q.dot(z)) > eps + 1e-9) ++r.violations;
  }
  return r;
}

BatteryResult qfs_contract(QfsVariant variant, int trials, int n, int d,
                           double eps, double delta, double slack,
                           std::uint64_t seed) {
  BatteryResult r;
  r.name = variant == QfsVariant::Flat ? "qfs-contract-flat"
                                                      : "qfs-contract-columns";
  r.budget = delta + slack;
  Rng rng(substream(seed, 0x5fULL));
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  for (int t = 0; t < trials; ++t) {
    ++r.trials;
    const auto inst =
        make_diversity_instance(n, d, rng.next_u64(), rng.next_double());
    const QfsState qfs(inst.gv, eps, delta, variant, rng.next_u64());
    const Eigen::MatrixXd m = random_psd_query(rng, d);
    const int j0 = qfs.query(m);
    const auto [best, best_value] = exact_qf_argmax(inst.gv, m, all);
    const double got = quadratic_form(m, inst.gv.vector(j0));
    if (got < best_value - 2.0 * eps - 1e-9) ++r.violations;
  }
  return r;
}

namespace {

// Planted Max-IP battery instance: one point at inner product `planted` with
// the query, all others at |<p,q>| <= 0.1.
struct PlantedMaxIp {
  Eigen::MatrixXd points;
  Eigen::VectorXd query;
  int planted_index = 0;
};

PlantedMaxIp make_planted(Rng& rng, int n, int d, double planted) {
  PlantedMaxIp out;
  out.query = random_direction(rng, d, 1.0);
  out.points.resize(n, d);
  for (int i = 0; i < n; ++i) {
    const double target =
        (0.2 * rng.next_double() - 0.1);  // background inner products
    Eigen::VectorXd w = random_direction(rng, d, 1.0);
    w -= w.dot(out.query) * out.query;
    const double wn = w.norm();
    if (wn > 0.0) w /= wn;
    out.points.row(i) =
        (target * out.query + std::sqrt(std::max(0.0, 1.0 - target * target)) * w)
            .transpose();
  }
  out.planted_index = rng.next_index(n);
  Eigen::VectorXd w = random_direction(rng, d, 1.0);
  w -= w.dot(out.query) * out.query;
  w /= w.norm();
  out.points.row(out.planted_index) =
      (planted * out.query +
       std::sqrt(std::max(0.0, 1.0 - planted * planted)) * w)
          .transpose();
  return out;
}

}  // namespace

BatteryResult lsh_recall(int trials, int n, int d, double tau, double c,
                         double delta, double slack, std::uint64_t seed) {
  BatteryResult r;
  r.name = "lsh-recall";
  r.budget = delta + slack;
  Rng rng(substream(seed, 0x15fULL));
  for (int t = 0; t < trials; ++t) {
    ++r.trials;
    const PlantedMaxIp planted = make_planted(rng, n, d, 0.9);
    const HashEnsemble ens(planted.points, c, tau, delta, rng.next_u64());
    const auto hit = ens.query(planted.query);
    const bool ok =
        hit.has_value() &&
        planted.points.row(*hit).dot(planted.query) >= c * tau - 1e-12;
    if (!ok) ++r.violations;
  }
  return r;
}

BatteryResult lsh_delete_exactness(int trials, std::uint64_t seed) {
  BatteryResult r;
  r.name = "lsh-delete-exactness";
  r.budget = 0.0;
  Rng rng(substream(seed, 0xde1ULL));
  for (int t = 0; t < trials; ++t) {
    ++r.trials;
    const PlantedMaxIp planted = make_planted(rng, 64, 16, 0.95);
    HashEnsemble ens(planted.points, 0.9, 0.8, 0.1, rng.next_u64());
    ens.erase(planted.planted_index);
    bool bad = !ens.absent_from_all_buckets(planted.planted_index);
    for (int probe = 0; probe < 5 && !bad; ++probe) {
      const auto hit = ens.query(planted.query);
      if (hit && *hit == planted.planted_index) bad = true;
    }
    if (bad) ++r.violations;
  }
  return r;
}

ScalingReport scaling_probe(int n, int k, const std::vector<int>& dims,
                            double eps, double delta, std::uint64_t seed) {
  ScalingReport report;
  for (int d : dims) {
    const auto inst = make_diversity_instance(n, d, substream(seed, d), 0.3);
    ScalingPoint point;
    point.d = d;

    const SelectionRun naive = greedy_naive(inst, k);
    point.naive_step_ms = 1e3 * median_of(naive.step_seconds);

    GreedyConfig cfg;
    cfg.backend = BackendKind::SketchFlat;
    cfg.k = k;
    cfg.eps = eps;
    cfg.delta = delta;
    cfg.seed = substream(seed, 0xbe57ULL + d);
    cfg.ade.sketches = 8;
    cfg.ade.proj_dim = 64;
    cfg.ade.query_samples = 3;
    const SelectionRun fast = greedy_fast(inst, cfg);
    point.fast_step_ms = 1e3 * median_of(fast.step_seconds);

    report.points.push_back(point);
    if (report.crossover_dim < 0 && point.fast_step_ms < point.naive_step_ms) {
      report.crossover_dim = d;
    }
  }
  if (report.points.size() >= 2) {
    // Growth is judged between d=32 and d=128 when both were measured.
    double low = report.points.front().naive_step_ms;
    double high = report.points.back().naive_step_ms;
    for (const auto& p : report.points) {
      if (p.d == 32) low = p.naive_step_ms;
      if (p.d == 128) high = p.naive_step_ms;
    }
    report.naive_growth = low > 0.0 ? high / low : 0.0;
    report.naive_growth_ok = report.naive_growth >= 3.0;
  }
  std::ostringstream os;
  for (const auto& p : report.points) {
    os << "d=" << p.d << " naive=" << p.naive_step_ms
       << "ms fast=" << p.fast_step_ms << "ms; ";
  }
  report.detail = os.str();
  return report;
}

}  // namespace submax::audit
