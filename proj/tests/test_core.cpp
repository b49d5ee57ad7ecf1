#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "submax/common.hpp"
#include "submax/core.hpp"

using namespace submax;

namespace {

DiversityInstance parallel_pair_instance(double lambda) {
  Eigen::MatrixXd vectors(2, 2);
  vectors << 1, 0, 1, 0;
  return DiversityInstance{GroundVectors(vectors, 1.0),
                           Eigen::MatrixXd::Identity(2, 2), lambda};
}

}  // namespace

TEST_CASE("marginal gain matches direct expansion") {
  Eigen::MatrixXd vectors(1, 2);
  vectors << 1, 2;
  GroundVectors gv(vectors, 3.0);
  Eigen::MatrixXd h(2, 2);
  h << 1, 0, 0, 3;
  MarginalOracle oracle;
  oracle.evaluate = [h](const std::vector<int>&) { return h; };
  CHECK(marginal_gain(gv, oracle, {}, 0) == doctest::Approx(13.0));
}

TEST_CASE("marginal gain of the zero vector is zero") {
  Eigen::MatrixXd vectors = Eigen::MatrixXd::Zero(1, 3);
  GroundVectors gv(vectors, 1.0);
  MarginalOracle oracle;
  oracle.evaluate = [](const std::vector<int>&) {
    Eigen::MatrixXd h(3, 3);
    h.setRandom();
    return h;
  };
  CHECK(marginal_gain(gv, oracle, {}, 0) == 0.0);
}

TEST_CASE("diversity family closed form on parallel unit vectors") {
  const auto inst = parallel_pair_instance(0.5);
  const MarginalOracle oracle = inst.oracle();
  // S = {1}, query 0: 1 - 2*0.5*<u0,u1>^2 = 0.
  CHECK(marginal_gain(inst.gv, oracle, {1}, 0) == doctest::Approx(0.0));
}

TEST_CASE("marginal gain rejects bad indices") {
  const auto inst = make_diversity_instance(4, 2, 99, 0.5);
  const MarginalOracle oracle = inst.oracle();
  CHECK_THROWS_AS(marginal_gain(inst.gv, oracle, {}, 7), std::out_of_range);
  CHECK_THROWS_AS(marginal_gain(inst.gv, oracle, {2}, 2), std::invalid_argument);
}

TEST_CASE("evaluate_f of the empty chain is zero") {
  const auto inst = make_diversity_instance(3, 2, 1, 0.3);
  CHECK(evaluate_f(inst.gv, inst.oracle(), {}) == 0.0);
}

TEST_CASE("evaluate_f is modular at lambda zero") {
  const auto inst = make_diversity_instance(6, 3, 2, 0.0);
  const std::vector<int> chain{4, 1, 3};
  double expected = 0.0;
  for (int i : chain) expected += inst.gv.vector(i).squaredNorm();
  CHECK(evaluate_f(inst.gv, inst.oracle(), chain) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("evaluate_f rejects duplicate chain entries") {
  const auto inst = make_diversity_instance(4, 2, 3, 0.4);
  CHECK_THROWS_AS(evaluate_f(inst.gv, inst.oracle(), {1, 2, 1}),
                  std::invalid_argument);
}

TEST_CASE("evaluate_f is permutation invariant on diversity instances") {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 4 + rng.next_index(6);
    const auto inst =
        make_diversity_instance(n, 2 + rng.next_index(3), rng.next_u64(),
                                rng.next_double());
    const MarginalOracle oracle = inst.oracle();
    std::vector<int> chain(n);
    std::iota(chain.begin(), chain.end(), 0);
    const int len = 2 + rng.next_index(n - 1);
    chain.resize(len);
    const double reference = evaluate_f(inst.gv, oracle, chain);
    for (int p = 0; p < 5; ++p) {
      for (int i = len - 1; i > 0; --i) {
        std::swap(chain[i], chain[rng.next_index(i + 1)]);
      }
      const double shuffled = evaluate_f(inst.gv, oracle, chain);
      CHECK(std::abs(shuffled - reference) <=
            1e-9 * std::max(1.0, std::abs(reference)));
    }
  }
}

TEST_CASE("marginal gain equals the evaluate_f difference") {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 5 + rng.next_index(5);
    const auto inst = make_diversity_instance(n, 3, rng.next_u64(), 0.8);
    const MarginalOracle oracle = inst.oracle();
    std::vector<int> chain;
    for (int i = 1; i < n; i += 2) chain.push_back(i);
    const int probe = 0;
    const double gain = marginal_gain(inst.gv, oracle, chain, probe);
    std::vector<int> extended = chain;
    extended.push_back(probe);
    const double diff = evaluate_f(inst.gv, oracle, extended) -
                        evaluate_f(inst.gv, oracle, chain);
    CHECK(std::abs(gain - diff) <= 1e-9 * std::max(1.0, std::abs(diff)));
  }
}

TEST_CASE("diversity_step with lambda zero leaves h unchanged") {
  const auto inst = make_diversity_instance(4, 3, 5, 0.0);
  DiversityFamily family = inst.family();
  const Eigen::MatrixXd before = family.current();
  diversity_step(family, inst.gv, 2);
  CHECK(family.current() == before);
}

TEST_CASE("diversity_step scalar example") {
  Eigen::MatrixXd vectors(1, 1);
  vectors << 2;
  GroundVectors gv(vectors, 2.0);
  Eigen::MatrixXd base(1, 1);
  base << 3;
  DiversityFamily family(base, 0.25);
  diversity_step(family, gv, 0);
  CHECK(family.current()(0, 0) == doctest::Approx(1.0));  // 3 - 2*0.25*4
}

TEST_CASE("incremental h matches the closed form after several steps") {
  Rng rng(31);
  const auto inst = make_diversity_instance(10, 4, 11, 0.9);
  DiversityFamily family = inst.family();
  std::vector<int> selected;
  for (int step = 0; step < 6; ++step) {
    int j = rng.next_index(10);
    while (std::find(selected.begin(), selected.end(), j) != selected.end()) {
      j = rng.next_index(10);
    }
    selected.push_back(j);
    diversity_step(family, inst.gv, j);
    const Eigen::MatrixXd direct = family.h_of(inst.gv, selected);
    CHECK((family.current() - direct).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("validator is clean on a modular instance") {
  const auto inst = make_diversity_instance(8, 3, 21, 0.0);
  const auto report = validate_instance(inst.gv, inst.oracle(), 200);
  CHECK(report.samples > 0);
  CHECK(report.clean());
}

TEST_CASE("validator is clean on generated monotone instances") {
  const auto inst = make_diversity_instance(10, 4, 22, 1.0);
  const auto report = validate_instance(inst.gv, inst.oracle(), 300);
  CHECK(report.clean());
}

TEST_CASE("validator flags a non-monotone family") {
  // Parallel unit vectors with lambda > 1/2 push a marginal negative.
  const auto inst = parallel_pair_instance(0.6);
  const auto report = validate_instance(inst.gv, inst.oracle(), 300);
  CHECK(report.monotonicity_violations > 0);
  CHECK(report.submodularity_violations == 0);
}

TEST_CASE("validator flags a non-submodular oracle") {
  // Sign-flipped penalty: gains grow with the set, violating submodularity.
  Eigen::MatrixXd vectors(3, 2);
  vectors << 1, 0, 1, 0, 1, 0;
  GroundVectors gv(vectors, 1.0);
  MarginalOracle oracle;
  oracle.evaluate = [&vectors](const std::vector<int>& s) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(2, 2);
    for (int j : s) {
      h += 1.0 * vectors.row(j).transpose() * vectors.row(j);
    }
    return h;
  };
  oracle.frobenius_bound = 10.0;
  const auto report = validate_instance(gv, oracle, 300);
  CHECK(report.submodularity_violations > 0);
}

TEST_CASE("sampled submodularity holds for nonnegative lambda") {
  Rng rng(5150);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst =
        make_diversity_instance(8, 3, rng.next_u64(), rng.next_double());
    const MarginalOracle oracle = inst.oracle();
    const auto report = validate_instance(inst.gv, oracle, 100, rng.next_u64());
    CHECK(report.submodularity_violations == 0);
  }
}

TEST_CASE("ground vectors reject invalid construction") {
  Eigen::MatrixXd ok(2, 2);
  ok << 1, 0, 0, 1;
  CHECK_THROWS_AS(GroundVectors(ok, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(GroundVectors(ok, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(GroundVectors(Eigen::MatrixXd(0, 2), 1.0),
                  std::invalid_argument);
  const GroundVectors gv(ok, 1.0);
  CHECK_THROWS_AS(gv.check_index(2), std::out_of_range);
}

TEST_CASE("generated instances respect the monotone lambda cap") {
  Rng rng(404);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst =
        make_diversity_instance(8, 3, rng.next_u64(), rng.next_double());
    const double cap =
        DiversityFamily::max_monotone_lambda(inst.base, inst.gv);
    CHECK(inst.lambda <= cap * (1.0 + 1e-12));
    // Full-set marginals stay nonnegative at the cap.
    const MarginalOracle oracle = inst.oracle();
    for (int i = 0; i < inst.gv.count(); ++i) {
      std::vector<int> rest;
      for (int j = 0; j < inst.gv.count(); ++j) {
        if (j != i) rest.push_back(j);
      }
      CHECK(marginal_gain(inst.gv, oracle, rest, i) >= -1e-9);
    }
  }
}

TEST_CASE("partition matroid basics") {
  const Matroid m = make_partition_matroid({0, 0, 1, 1, 1}, {1, 2});
  CHECK(m.rank == 3);
  CHECK(m.independent({}));
  CHECK(m.independent({0, 2, 3}));
  CHECK_FALSE(m.independent({0, 1}));
  CHECK_FALSE(m.independent({2, 3, 4}));
}

TEST_CASE("selection run value equals the gain sum") {
  SelectionRun run;
  run.gains = {1.5, 0.25, 0.125};
  run.value = 1.875;
  const double total =
      std::accumulate(run.gains.begin(), run.gains.end(), 0.0);
  CHECK(std::abs(run.value - total) <= 1e-9 * std::abs(run.value) + 1e-12);
}
