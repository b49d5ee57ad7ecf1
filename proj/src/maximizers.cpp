#include "submax/maximizers.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <stdexcept>

#include "submax/common.hpp"

namespace submax {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_k(int k, int n) {
  if (k < 0 || k > n) {
    throw std::invalid_argument("greedy: k must lie in [0, n]");
  }
}

double resolve_h_bound(const DiversityInstance& inst, const GreedyConfig& cfg) {
  return cfg.h_bound > 0.0 ? cfg.h_bound : inst.h_bound();
}

}  // namespace

ExactBackend::ExactBackend(const GroundVectors& gv)
    : points_(gv.matrix()), live_(gv.count()) {}

int ExactBackend::select(const Eigen::MatrixXd& a) {
  if (live_.empty()) {
    throw std::logic_error("exact backend: candidate set is empty");
  }
  int best = -1;
  double best_w = -std::numeric_limits<double>::infinity();
  for (int j : live_.items()) {
    const double w = quadratic_form(a, points_.row(j).transpose());
    if (w > best_w) {
      best_w = w;
      best = j;
    }
  }
  return best;
}

void ExactBackend::update(int i, const Eigen::VectorXd& z) {
  if (i < 0 || i >= points_.rows() || z.size() != points_.cols()) {
    throw std::invalid_argument("exact backend update: bad index or dimension");
  }
  points_.row(i) = z.transpose();
}

QfsBackend::QfsBackend(const GroundVectors& gv, double eps, double delta_step,
                       QfsVariant variant, std::uint64_t seed,
                       const AdeOverrides& overrides)
    : qfs_(gv, eps, delta_step, variant, seed, overrides) {}

LshBackend::LshBackend(const GroundVectors& gv, double c, double tau,
                       double delta_step, std::uint64_t seed)
    : lsh_(gv, c, tau, delta_step, seed),
      points_(gv.matrix()),
      live_(gv.count()) {}

int LshBackend::select(const Eigen::MatrixXd& a) {
  if (live_.empty()) {
    throw std::logic_error("lsh backend: candidate set is empty");
  }
  if (const auto hit = lsh_.query(a)) return *hit;
  ++fallbacks_;
  int best = -1;
  double best_w = -std::numeric_limits<double>::infinity();
  for (int j : live_.items()) {
    const double w = quadratic_form(a, points_.row(j).transpose());
    if (w > best_w) {
      best_w = w;
      best = j;
    }
  }
  return best;
}

void LshBackend::erase(int i) {
  lsh_.erase(i);
  live_.erase(i);
}

void LshBackend::update(int, const Eigen::VectorXd&) {
  throw std::logic_error("lsh backend: updates are not supported");
}

std::unique_ptr<SearchBackend> make_backend(const GreedyConfig& cfg,
                                            const GroundVectors& gv,
                                            double delta_step) {
  switch (cfg.backend) {
    case BackendKind::Exact:
      return std::make_unique<ExactBackend>(gv);
    case BackendKind::SketchFlat:
      return std::make_unique<QfsBackend>(gv, cfg.eps, delta_step,
                                          QfsVariant::Flat, cfg.seed, cfg.ade);
    case BackendKind::SketchColumns:
      return std::make_unique<QfsBackend>(gv, cfg.eps, delta_step,
                                          QfsVariant::Columns, cfg.seed, cfg.ade);
    case BackendKind::Lsh:
      return std::make_unique<LshBackend>(gv, cfg.lsh_c, cfg.lsh_tau, delta_step,
                                          cfg.seed);
  }
  throw std::logic_error("make_backend: unknown backend kind");
}

Adversary null_adversary() {
  return [](int, const GroundVectors&, const std::vector<int>&,
            const Eigen::MatrixXd&) { return std::nullopt; };
}

Adversary random_perturb_adversary(double sigma, std::uint64_t seed) {
  auto rng = std::make_shared<Rng>(substream(seed, 0xadd5ULL));
  return [rng, sigma](int, const GroundVectors& gv,
                      const std::vector<int>& selected,
                      const Eigen::MatrixXd&) -> std::optional<AdversaryMove> {
    std::vector<int> free_indices;
    for (int i = 0; i < gv.count(); ++i) {
      if (std::find(selected.begin(), selected.end(), i) == selected.end()) {
        free_indices.push_back(i);
      }
    }
    if (free_indices.empty()) return std::nullopt;
    const int target = free_indices[rng->next_index(
        static_cast<int>(free_indices.size()))];
    Eigen::VectorXd z = gv.vector(target);
    for (int j = 0; j < z.size(); ++j) z(j) += sigma * rng->next_gaussian();
    const double norm = z.norm();
    if (norm > gv.norm_bound()) z *= gv.norm_bound() / norm;
    return AdversaryMove{target, std::move(z)};
  };
}

Adversary greedy_spoiler_adversary(double shrink) {
  return [shrink](int, const GroundVectors& gv, const std::vector<int>& selected,
                  const Eigen::MatrixXd& h) -> std::optional<AdversaryMove> {
    int best = -1;
    double best_w = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < gv.count(); ++i) {
      if (std::find(selected.begin(), selected.end(), i) != selected.end()) {
        continue;
      }
      const double w = quadratic_form(h, gv.vector(i));
      if (w > best_w) {
        best_w = w;
        best = i;
      }
    }
    if (best < 0) return std::nullopt;
    return AdversaryMove{best, shrink * gv.vector(best)};
  };
}

SelectionRun greedy_naive(const GroundVectors& gv, GainChain& chain, int k) {
  const int n = gv.count();
  check_k(k, n);
  SelectionRun run;
  std::vector<char> live(n, 1);
  for (int t = 0; t < k; ++t) {
    const auto start = Clock::now();
    const Eigen::MatrixXd& a = chain.current();
    int best = -1;
    double best_w = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (!live[j]) continue;
      const double w = quadratic_form(a, gv.vector(j));
      if (w > best_w) {
        best_w = w;
        best = j;
      }
    }
    live[best] = 0;
    run.chain.push_back(best);
    run.gains.push_back(best_w);
    run.value += best_w;
    chain.add(best);
    run.step_seconds.push_back(seconds_since(start));
  }
  return run;
}

SelectionRun greedy_batch(const GroundVectors& gv, GainChain& chain, int k) {
  const int n = gv.count();
  const int d = gv.dim();
  check_k(k, n);
  SelectionRun run;
  std::vector<char> live(n, 1);
  Eigen::MatrixXd product;
  for (int t = 0; t < k; ++t) {
    const auto start = Clock::now();
    const Eigen::MatrixXd& a = chain.current();
    int best = -1;
    double best_w = -std::numeric_limits<double>::infinity();
    for (int base = 0; base < n; base += d) {
      const int width = std::min(d, n - base);
      // diag(U^T A U) for the block U of up to d candidate columns.
      const auto block = gv.matrix().middleRows(base, width).transpose();
      product.noalias() = a * block;
      for (int j = 0; j < width; ++j) {
        const int idx = base + j;
        if (!live[idx]) continue;
        const double w = block.col(j).dot(product.col(j));
        if (w > best_w) {
          best_w = w;
          best = idx;
        }
      }
    }
    live[best] = 0;
    // Recorded gain recomputed per vector so it is bit-identical to the
    // naive scan's bookkeeping on the same chain.
    const double gain = quadratic_form(a, gv.vector(best));
    run.chain.push_back(best);
    run.gains.push_back(gain);
    run.value += gain;
    chain.add(best);
    run.step_seconds.push_back(seconds_since(start));
  }
  return run;
}

namespace {

// Shared driver: cardinality greedy over a backend, with an optional
// adversary move applied between forming h(S_t) and querying.
SelectionRun backend_loop(GroundVectors& gv, GainChain& chain, int k,
                          SearchBackend& backend, double h_bound,
                          const Adversary* adversary) {
  check_k(k, gv.count());
  if (!(h_bound > 0.0)) {
    throw std::invalid_argument("greedy: h bound must be positive");
  }
  SelectionRun run;
  for (int t = 0; t < k; ++t) {
    const auto start = Clock::now();
    const Eigen::MatrixXd a = chain.current();
    if (adversary && *adversary) {
      if (auto move = (*adversary)(t, gv, run.chain, a)) {
        if (std::find(run.chain.begin(), run.chain.end(), move->index) !=
            run.chain.end()) {
          throw std::invalid_argument(
              "semi-online: adversary targeted a selected index");
        }
        gv.set_vector(move->index, move->z);
        backend.update(move->index, move->z);
      }
    }
    const int j = backend.select(a / h_bound);
    const double gain = quadratic_form(a, gv.vector(j));
    backend.erase(j);
    ++run.deletes;
    run.chain.push_back(j);
    run.gains.push_back(gain);
    run.value += gain;
    chain.add(j);
    run.step_seconds.push_back(seconds_since(start));
  }
  run.fallbacks = backend.fallbacks();
  return run;
}

}  // namespace

SelectionRun greedy_with_backend(const GroundVectors& gv, GainChain& chain,
                                 int k, SearchBackend& backend, double h_bound) {
  GroundVectors local = gv;
  return backend_loop(local, chain, k, backend, h_bound, nullptr);
}

SelectionRun greedy_matroid(const GroundVectors& gv, GainChain& chain,
                            const Matroid& matroid, SearchBackend& backend,
                            double h_bound) {
  if (!matroid.independent || !matroid.independent({})) {
    throw std::invalid_argument("matroid: oracle must accept the empty set");
  }
  if (!(h_bound > 0.0)) {
    throw std::invalid_argument("greedy: h bound must be positive");
  }
  const int rounds = matroid.rank > 0 ? matroid.rank : gv.count();
  SelectionRun run;
  std::vector<int> probe;
  for (int t = 0; t < rounds; ++t) {
    const auto start = Clock::now();
    // Drop every live candidate whose addition would leave the matroid.
    std::vector<int> to_drop;
    for (int j : backend.live().items()) {
      probe = run.chain;
      probe.push_back(j);
      if (!matroid.independent(probe)) to_drop.push_back(j);
    }
    for (int j : to_drop) {
      backend.erase(j);
      ++run.deletes;
    }
    if (backend.live().empty()) break;

    const Eigen::MatrixXd a = chain.current();
    const int j = backend.select(a / h_bound);
    const double gain = quadratic_form(a, gv.vector(j));
    backend.erase(j);
    ++run.deletes;
    run.chain.push_back(j);
    run.gains.push_back(gain);
    run.value += gain;
    chain.add(j);
    run.step_seconds.push_back(seconds_since(start));
  }
  return run;
}

SelectionRun greedy_naive(const DiversityInstance& inst, int k) {
  DiversityChain chain(inst.gv, inst.family());
  return greedy_naive(inst.gv, chain, k);
}

SelectionRun greedy_batch(const DiversityInstance& inst, int k) {
  DiversityChain chain(inst.gv, inst.family());
  return greedy_batch(inst.gv, chain, k);
}

SelectionRun greedy_fast(const DiversityInstance& inst, const GreedyConfig& cfg) {
  return semi_online_run(inst, cfg, nullptr);
}

SelectionRun greedy_lsh(const DiversityInstance& inst, const GreedyConfig& cfg) {
  GreedyConfig lsh_cfg = cfg;
  lsh_cfg.backend = BackendKind::Lsh;
  return semi_online_run(inst, lsh_cfg, nullptr);
}

SelectionRun greedy_matroid(const DiversityInstance& inst, const Matroid& matroid,
                            const GreedyConfig& cfg) {
  const int rounds = matroid.rank > 0 ? matroid.rank : inst.gv.count();
  const auto backend =
      make_backend(cfg, inst.gv, cfg.delta / std::max(1, rounds));
  DiversityChain chain(inst.gv, inst.family());
  return greedy_matroid(inst.gv, chain, matroid, *backend, resolve_h_bound(inst, cfg));
}

SelectionRun knapsack_two_pass(const DiversityInstance& inst,
                               const Eigen::VectorXd& weights, double budget,
                               const GreedyConfig& cfg) {
  const int n = inst.gv.count();
  if (weights.size() != n) {
    throw std::invalid_argument("knapsack: weight vector size != n");
  }
  if (weights.minCoeff() <= 0.0 || !(budget > 0.0)) {
    throw std::invalid_argument("knapsack: weights and budget must be positive");
  }
  const double h_bound = resolve_h_bound(inst, cfg);

  // One pass of Algorithm-style selection: query, keep if it fits, always
  // delete the queried item from the backend.
  const auto pass = [&](const Eigen::MatrixXd& search_points) {
    const double bound = std::max(search_points.rowwise().norm().maxCoeff(),
                                  1e-12);
    GroundVectors search_gv(search_points, bound);
    const auto backend = make_backend(cfg, search_gv, cfg.delta / n);
    DiversityChain chain(inst.gv, inst.family());
    SelectionRun run;
    double used = 0.0;
    while (!backend->live().empty()) {
      const auto start = Clock::now();
      const Eigen::MatrixXd a = chain.current();
      const int j = backend->select(a / h_bound);
      if (used + weights(j) <= budget + 1e-12) {
        const double gain = quadratic_form(a, inst.gv.vector(j));
        used += weights(j);
        run.chain.push_back(j);
        run.gains.push_back(gain);
        run.value += gain;
        chain.add(j);
      }
      backend->erase(j);
      ++run.deletes;
      run.step_seconds.push_back(seconds_since(start));
    }
    run.fallbacks = backend->fallbacks();
    return run;
  };

  const SelectionRun uniform_cost = pass(inst.gv.matrix());
  Eigen::MatrixXd scaled = inst.gv.matrix();
  for (int i = 0; i < n; ++i) scaled.row(i) /= std::sqrt(weights(i));
  const SelectionRun cost_benefit = pass(scaled);
  return uniform_cost.value >= cost_benefit.value ? uniform_cost : cost_benefit;
}

SelectionRun semi_online_run(const DiversityInstance& inst,
                             const GreedyConfig& cfg, const Adversary& adversary) {
  GroundVectors gv = inst.gv;
  const auto backend = make_backend(cfg, gv, cfg.delta / std::max(1, cfg.k));
  DiversityChain chain(gv, inst.family());
  return backend_loop(gv, chain, cfg.k, *backend, resolve_h_bound(inst, cfg),
                      adversary ? &adversary : nullptr);
}

}  // namespace submax
