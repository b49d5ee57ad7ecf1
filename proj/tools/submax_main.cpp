#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include "submax/audit.hpp"
#include "submax/common.hpp"
#include "submax/core.hpp"
#include "submax/instance_io.hpp"
#include "submax/maximizers.hpp"
#include "submax/oracle.hpp"

namespace {

using namespace submax;

constexpr int kCsvVersion = 1;

const char* kCsvHeader =
    "csv_version,row_kind,seed,algo,n,d,k,eps,delta,repeat,f_value,opt,ratio,"
    "steps,per_step_ms,total_ms,fallbacks,deletes";

struct RunRow {
  std::string row_kind = "raw";
  std::uint64_t seed = 0;
  std::string algo;
  int n = 0, d = 0, k = 0;
  double eps = 0.0, delta = 0.0;
  int repeat = 0;
  double f_value = 0.0;
  std::optional<double> opt;
  int steps = 0;
  double per_step_ms = 0.0;
  double total_ms = 0.0;
  long fallbacks = 0;
  long deletes = 0;

  std::string csv() const {
    std::ostringstream os;
    os << kCsvVersion << ',' << row_kind << ',' << seed << ',' << algo << ','
       << n << ',' << d << ',' << k << ',' << format_double(eps) << ','
       << format_double(delta) << ',' << repeat << ',' << format_double(f_value)
       << ',';
    if (opt) os << format_double(*opt);
    os << ',';
    if (opt && *opt != 0.0) os << format_double(f_value / *opt);
    os << ',' << steps << ',' << format_double(per_step_ms) << ','
       << format_double(total_ms) << ',' << fallbacks << ',' << deletes;
    return os.str();
  }
};

struct RunRequest {
  std::string algo = "naive";
  GreedyConfig cfg;
  int repeats = 1;
  // matroid
  int parts = 2;
  int cap = 1;
  // knapsack
  double budget_frac = 0.5;
  // online
  std::string adversary = "null";
  double sigma = 0.1;
};

BackendKind backend_for(const std::string& algo) {
  if (algo == "fast-columns") return BackendKind::SketchColumns;
  if (algo == "lsh") return BackendKind::Lsh;
  return BackendKind::SketchFlat;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + v.size() / 2;
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

std::vector<RunRow> execute_run(const DiversityInstance& inst,
                                const RunRequest& req) {
  const int n = inst.gv.count();
  const int d = inst.gv.dim();
  std::vector<RunRow> rows;

  Matroid matroid;
  Eigen::VectorXd weights;
  double budget = 0.0;
  if (req.algo == "matroid") {
    std::vector<int> block_of(n);
    for (int i = 0; i < n; ++i) block_of[i] = i % std::max(1, req.parts);
    matroid = make_partition_matroid(
        block_of, std::vector<int>(std::max(1, req.parts), req.cap));
  } else if (req.algo == "knapsack") {
    Rng wrng(substream(req.cfg.seed, 0x37e1ULL));
    weights.resize(n);
    for (int i = 0; i < n; ++i) weights(i) = 0.5 + wrng.next_double();
    budget = req.budget_frac * weights.sum();
  }

  Adversary adversary;
  if (req.algo == "online") {
    if (req.adversary == "null") {
      adversary = null_adversary();
    } else if (req.adversary == "perturb") {
      adversary = random_perturb_adversary(req.sigma,
                                           substream(req.cfg.seed, 0xad7ULL));
    } else if (req.adversary == "spoiler") {
      adversary = greedy_spoiler_adversary();
    } else {
      throw std::invalid_argument("unknown adversary '" + req.adversary + "'");
    }
  }

  std::optional<double> opt;
  if (n <= 20) {
    Constraint constraint = Cardinality{req.cfg.k};
    if (req.algo == "matroid") constraint = matroid;
    if (req.algo == "knapsack") constraint = Knapsack{weights, budget};
    opt = brute_force_opt(inst.gv, inst.oracle(), constraint).best_value;
  }

  for (int rep = 0; rep < req.repeats; ++rep) {
    const auto start = std::chrono::steady_clock::now();
    SelectionRun run;
    if (req.algo == "naive") {
      run = greedy_naive(inst, req.cfg.k);
    } else if (req.algo == "batch") {
      run = greedy_batch(inst, req.cfg.k);
    } else if (req.algo == "fast-flat" || req.algo == "fast-columns") {
      GreedyConfig cfg = req.cfg;
      cfg.backend = backend_for(req.algo);
      run = greedy_fast(inst, cfg);
    } else if (req.algo == "lsh") {
      run = greedy_lsh(inst, req.cfg);
    } else if (req.algo == "matroid") {
      run = greedy_matroid(inst, matroid, req.cfg);
    } else if (req.algo == "knapsack") {
      run = knapsack_two_pass(inst, weights, budget, req.cfg);
    } else if (req.algo == "online") {
      GreedyConfig cfg = req.cfg;
      cfg.backend = backend_for("fast-flat");
      run = semi_online_run(inst, cfg, adversary);
    } else {
      throw std::invalid_argument("unknown algorithm '" + req.algo + "'");
    }
    const double total_ms =
        1e3 * std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                            start)
                  .count();
    RunRow row;
    row.seed = req.cfg.seed;
    row.algo = req.algo;
    row.n = n;
    row.d = d;
    row.k = req.cfg.k;
    row.eps = req.cfg.eps;
    row.delta = req.cfg.delta;
    row.repeat = rep;
    row.f_value = run.value;
    row.opt = opt;
    row.steps = static_cast<int>(run.chain.size());
    row.per_step_ms = 1e3 * median(run.step_seconds);
    row.total_ms = total_ms;
    row.fallbacks = run.fallbacks;
    row.deletes = run.deletes;
    rows.push_back(std::move(row));
  }

  RunRow med = rows.front();
  med.row_kind = "median";
  med.repeat = -1;
  std::vector<double> totals, steps;
  for (const auto& r : rows) {
    totals.push_back(r.total_ms);
    steps.push_back(r.per_step_ms);
  }
  med.total_ms = median(totals);
  med.per_step_ms = median(steps);
  rows.push_back(std::move(med));
  return rows;
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + path + " for writing");
  return file;
}

int run_audit(const std::string& battery, double eps, double delta, int trials,
              std::uint64_t seed, bool with_scaling) {
  std::vector<audit::BatteryResult> results;
  const bool all = battery == "all";
  const auto want = [&](const char* name) { return all || battery == name; };

  if (want("identities")) results.push_back(audit::exact_identities(trials, seed));
  if (want("greedy")) results.push_back(audit::greedy_ratio(trials, 12, 4, seed));
  if (want("mock")) results.push_back(audit::mock_oracle_bound(trials, eps, seed));
  if (want("ipe")) {
    results.push_back(
        audit::ipe_contract(100, 20, 200, 16, 1.0, eps, delta, 0.03, seed));
  }
  if (want("ipe-update")) {
    results.push_back(
        audit::ipe_update_contract(100, 100, 16, eps, delta, 0.03, seed));
  }
  if (want("qfs")) {
    results.push_back(audit::qfs_contract(QfsVariant::Flat, trials, 60, 6, eps,
                                          delta, 0.03, seed));
    results.push_back(audit::qfs_contract(QfsVariant::Columns, trials, 60, 6,
                                          eps, delta, 0.03, seed));
  }
  if (want("chain")) results.push_back(audit::chain_equality(trials, seed));
  if (want("matroid")) results.push_back(audit::matroid_bound(trials, seed));
  if (want("knapsack")) results.push_back(audit::knapsack_bound(trials, seed));
  if (want("lsh")) {
    results.push_back(audit::lsh_recall(trials, 100, 32, 0.8, 0.9, delta, 0.05, seed));
  }
  if (want("lsh-delete")) {
    results.push_back(audit::lsh_delete_exactness(trials, seed));
  }
  if (want("online")) {
    results.push_back(audit::null_adversary_equality(std::min(trials, 25), seed));
  }

  bool ok = true;
  for (const auto& r : results) {
    std::cout << "AUDIT " << r.line() << '\n';
    ok = ok && r.pass();
  }
  if (with_scaling) {
    const auto report = audit::scaling_probe(5000, 10, {32, 64, 128}, 0.2, 0.1, seed);
    std::cout << "AUDIT scaling: " << report.detail
              << "naive_growth=" << report.naive_growth
              << " crossover_d=" << report.crossover_dim << '\n';
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Submodular maximization benchmark harness"};
  app.require_subcommand(1);

  // ---- gen ----
  auto* gen = app.add_subcommand("gen", "Generate a DiversityFamily instance");
  int gen_n = 100, gen_d = 8;
  double gen_lambda_scale = 0.5, gen_norm = 1.0;
  std::uint64_t gen_seed = 1;
  std::string gen_base = "identity", gen_out;
  gen->add_option("--n", gen_n, "ground set size")->required();
  gen->add_option("--d", gen_d, "embedding dimension")->required();
  gen->add_option("--seed", gen_seed, "generation seed");
  gen->add_option("--lambda-scale", gen_lambda_scale,
                  "penalty as a fraction of the monotone cap (0 = modular)");
  gen->add_option("--D", gen_norm, "vector norm bound");
  gen->add_option("--base", gen_base, "base matrix kind: identity | random-spd");
  gen->add_option("--out", gen_out, "output file (default stdout)");

  // ---- run ----
  auto* run = app.add_subcommand("run", "Run one algorithm on an instance");
  RunRequest req;
  std::string run_instance, run_out;
  int run_n = 0, run_d = 8;
  std::uint64_t run_gen_seed = 1;
  double run_lambda_scale = 0.5;
  run->add_option("--instance", run_instance, "instance file (from gen)");
  run->add_option("--n", run_n, "generate an instance of this size instead");
  run->add_option("--d", run_d, "generated instance dimension");
  run->add_option("--gen-seed", run_gen_seed, "generated instance seed");
  run->add_option("--lambda-scale", run_lambda_scale, "generated instance penalty");
  run->add_option("--algo", req.algo,
                  "naive | batch | fast-flat | fast-columns | lsh | matroid | "
                  "knapsack | online")
      ->required();
  run->add_option("--k", req.cfg.k, "cardinality");
  run->add_option("--eps", req.cfg.eps, "backend accuracy");
  run->add_option("--delta", req.cfg.delta, "backend failure probability");
  run->add_option("--seed", req.cfg.seed, "run seed");
  run->add_option("--repeats", req.repeats, "timing repeats");
  run->add_option("--lsh-c", req.cfg.lsh_c, "LSH approximation ratio");
  run->add_option("--lsh-tau", req.cfg.lsh_tau, "LSH threshold");
  run->add_option("--parts", req.parts, "partition matroid blocks");
  run->add_option("--cap", req.cap, "partition matroid per-block capacity");
  run->add_option("--budget-frac", req.budget_frac,
                  "knapsack budget as a fraction of total weight");
  run->add_option("--adversary", req.adversary, "online: null | perturb | spoiler");
  run->add_option("--sigma", req.sigma, "perturb adversary scale");
  run->add_option("--ade-sketches", req.cfg.ade.sketches, "override ensemble size L");
  run->add_option("--ade-proj-dim", req.cfg.ade.proj_dim, "override sketch dim m");
  run->add_option("--ade-samples", req.cfg.ade.query_samples,
                  "override per-query samples r");
  run->add_option("--out", run_out, "CSV output (default stdout)");

  // ---- audit ----
  auto* aud = app.add_subcommand("audit", "Statistical guarantee audits");
  std::string audit_battery = "all";
  double audit_eps = 0.1, audit_delta = 0.05;
  int audit_trials = 100;
  std::uint64_t audit_seed = 7;
  bool audit_scaling = false;
  aud->add_option("--battery", audit_battery,
                  "all | identities | greedy | mock | ipe | ipe-update | qfs | "
                  "chain | matroid | knapsack | lsh | lsh-delete | online");
  aud->add_option("--eps", audit_eps, "accuracy under audit");
  aud->add_option("--delta", audit_delta, "failure budget under audit");
  aud->add_option("--trials", audit_trials, "trials per battery");
  aud->add_option("--seed", audit_seed, "audit seed");
  aud->add_flag("--scaling", audit_scaling, "also run the timing probe (slow)");

  // ---- sweep ----
  auto* sweep = app.add_subcommand("sweep", "Cartesian parameter grid");
  std::vector<int> sweep_n{100}, sweep_d{8}, sweep_k{5};
  std::vector<std::string> sweep_algos{"naive"};
  double sweep_eps = 0.1, sweep_delta = 0.05, sweep_lambda = 0.5;
  std::uint64_t sweep_seed = 1;
  int sweep_repeats = 1, sweep_jobs = 1;
  std::string sweep_out;
  sweep->add_option("--n", sweep_n, "ground set sizes")->delimiter(',');
  sweep->add_option("--d", sweep_d, "dimensions")->delimiter(',');
  sweep->add_option("--k", sweep_k, "cardinalities")->delimiter(',');
  sweep->add_option("--algo", sweep_algos, "algorithms")->delimiter(',');
  sweep->add_option("--eps", sweep_eps, "backend accuracy");
  sweep->add_option("--delta", sweep_delta, "backend failure probability");
  sweep->add_option("--lambda-scale", sweep_lambda, "instance penalty scale");
  sweep->add_option("--seed", sweep_seed, "base seed");
  sweep->add_option("--repeats", sweep_repeats, "timing repeats per cell");
  sweep->add_option("--jobs", sweep_jobs, "parallel worker threads");
  sweep->add_option("--out", sweep_out, "CSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) {
      const BaseKind kind =
          gen_base == "random-spd" ? BaseKind::RandomSpd : BaseKind::Identity;
      if (gen_base != "identity" && gen_base != "random-spd") {
        throw std::invalid_argument("unknown base kind '" + gen_base + "'");
      }
      const auto inst = make_diversity_instance(gen_n, gen_d, gen_seed,
                                                gen_lambda_scale, gen_norm, kind);
      std::ofstream file;
      save_instance(open_output(file, gen_out), inst);
      return 0;
    }

    if (run->parsed()) {
      DiversityInstance inst;
      if (!run_instance.empty()) {
        inst = load_instance(run_instance);
      } else if (run_n > 0) {
        inst = make_diversity_instance(run_n, run_d, run_gen_seed,
                                       run_lambda_scale);
      } else {
        throw std::invalid_argument("run: provide --instance or --n");
      }
      if (req.cfg.k <= 0) req.cfg.k = std::min(5, inst.gv.count());
      if (req.repeats < 1) throw std::invalid_argument("run: repeats >= 1");
      std::ofstream file;
      auto& out = open_output(file, run_out);
      out << kCsvHeader << '\n';
      for (const auto& row : execute_run(inst, req)) out << row.csv() << '\n';
      return 0;
    }

    if (aud->parsed()) {
      return run_audit(audit_battery, audit_eps, audit_delta, audit_trials,
                       audit_seed, audit_scaling);
    }

    if (sweep->parsed()) {
      struct Cell {
        int n, d, k;
        std::string algo;
      };
      std::vector<Cell> cells;
      for (int n : sweep_n) {
        for (int d : sweep_d) {
          for (int k : sweep_k) {
            for (const auto& algo : sweep_algos) cells.push_back({n, d, k, algo});
          }
        }
      }
      std::vector<std::vector<RunRow>> results(cells.size());
      std::atomic<std::size_t> next{0};
      const int jobs = std::max(1, sweep_jobs);
      auto worker = [&] {
        for (std::size_t c = next.fetch_add(1); c < cells.size();
             c = next.fetch_add(1)) {
          const Cell& cell = cells[c];
          const std::uint64_t cell_seed = substream(sweep_seed, c);
          const auto inst = make_diversity_instance(cell.n, cell.d, cell_seed,
                                                    sweep_lambda);
          RunRequest cell_req;
          cell_req.algo = cell.algo;
          cell_req.cfg.k = std::min(cell.k, cell.n);
          cell_req.cfg.eps = sweep_eps;
          cell_req.cfg.delta = sweep_delta;
          cell_req.cfg.seed = cell_seed;
          cell_req.repeats = sweep_repeats;
          results[c] = execute_run(inst, cell_req);
        }
      };
      std::vector<std::thread> pool;
      for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
      worker();
      for (auto& t : pool) t.join();

      std::ofstream file;
      auto& out = open_output(file, sweep_out);
      out << kCsvHeader << '\n';
      for (const auto& rows : results) {
        for (const auto& row : rows) out << row.csv() << '\n';
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
