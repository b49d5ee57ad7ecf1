#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "submax/common.hpp"
#include "submax/core.hpp"
#include "submax/oracle.hpp"

using namespace submax;

namespace {

long binomial_prefix(int n, int k) {
  long total = 0;
  for (int j = 0; j <= k; ++j) {
    long c = 1;
    for (int i = 0; i < j; ++i) c = c * (n - i) / (i + 1);
    total += c;
  }
  return total;
}

}  // namespace

TEST_CASE("k = 0 yields the empty set") {
  const auto inst = make_diversity_instance(5, 2, 1, 0.5);
  const auto opt = brute_force_opt(inst.gv, inst.oracle(), Cardinality{0});
  CHECK(opt.best_set.empty());
  CHECK(opt.best_value == 0.0);
  CHECK(opt.enumerated == 1);
}

TEST_CASE("modular optimum is the top-k by base quadratic form") {
  const auto inst = make_diversity_instance(8, 3, 7, 0.0);
  const int k = 3;
  const auto opt = brute_force_opt(inst.gv, inst.oracle(), Cardinality{k});

  std::vector<int> order(8);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return inst.gv.vector(a).squaredNorm() > inst.gv.vector(b).squaredNorm();
  });
  std::vector<int> expected(order.begin(), order.begin() + k);
  std::sort(expected.begin(), expected.end());
  CHECK(opt.best_set == expected);
}

TEST_CASE("oracle self-consistency at k = n") {
  const auto inst = make_diversity_instance(8, 3, 9, 0.7);
  const auto opt = brute_force_opt(inst.gv, inst.oracle(), Cardinality{8});
  std::vector<int> full(8);
  std::iota(full.begin(), full.end(), 0);
  // Monotone instance: the full set is optimal under |S| <= n.
  CHECK(opt.best_set == full);
  CHECK(opt.best_value ==
        doctest::Approx(evaluate_f(inst.gv, inst.oracle(), full)).epsilon(1e-10));
}

TEST_CASE("best value is reproducible through evaluate_f") {
  const auto inst = make_diversity_instance(9, 3, 12, 0.9);
  const auto opt = brute_force_opt(inst.gv, inst.oracle(), Cardinality{4});
  CHECK(std::abs(opt.best_value -
                 evaluate_f(inst.gv, inst.oracle(), opt.best_set)) <= 1e-10);
}

TEST_CASE("unit-weight knapsack enumerates binomial-many sets") {
  const int n = 10, k = 3;
  const auto inst = make_diversity_instance(n, 2, 4, 0.5);
  const Knapsack knap{Eigen::VectorXd::Ones(n), static_cast<double>(k)};
  const auto opt = brute_force_opt(inst.gv, inst.oracle(), knap);
  CHECK(opt.enumerated == binomial_prefix(n, k));

  const auto card = brute_force_opt(inst.gv, inst.oracle(), Cardinality{k});
  CHECK(card.enumerated == opt.enumerated);
  CHECK(card.best_set == opt.best_set);
}

TEST_CASE("matroid constraint restricts the search") {
  const auto inst = make_diversity_instance(6, 2, 15, 0.6);
  const Matroid m = make_partition_matroid({0, 0, 0, 1, 1, 1}, {1, 1});
  const auto opt = brute_force_opt(inst.gv, inst.oracle(), m);
  CHECK(opt.best_set.size() <= 2);
  CHECK(m.independent(opt.best_set));
}

TEST_CASE("size cap is enforced") {
  const auto inst = make_diversity_instance(21, 2, 3, 0.1);
  CHECK_THROWS_AS(brute_force_opt(inst.gv, inst.oracle(), Cardinality{2}),
                  std::invalid_argument);
}

TEST_CASE("exact argmax basics") {
  const auto inst = make_diversity_instance(5, 3, 30, 0.0);
  SUBCASE("single candidate") {
    const auto [idx, value] =
        exact_qf_argmax(inst.gv, Eigen::MatrixXd::Identity(3, 3), {3});
    CHECK(idx == 3);
    CHECK(value == doctest::Approx(inst.gv.vector(3).squaredNorm()));
  }
  SUBCASE("zero matrix ties break to the smallest index") {
    std::vector<int> live{2, 0, 4};
    const auto [idx, value] =
        exact_qf_argmax(inst.gv, Eigen::MatrixXd::Zero(3, 3), live);
    CHECK(idx == 0);
    CHECK(value == 0.0);
  }
  SUBCASE("empty live set is an error") {
    CHECK_THROWS_AS(exact_qf_argmax(inst.gv, Eigen::MatrixXd::Zero(3, 3), {}),
                    std::invalid_argument);
  }
}

TEST_CASE("exact inner products") {
  Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(4, 4);
  const Eigen::VectorXd e1 = Eigen::VectorXd::Unit(4, 0);
  const Eigen::VectorXd w = exact_inner_products(basis, e1);
  CHECK(w(0) == 1.0);
  CHECK(w.tail(3).cwiseAbs().maxCoeff() == 0.0);

  CHECK(exact_inner_products(basis, Eigen::VectorXd::Zero(4)).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK_THROWS_AS(exact_inner_products(basis, Eigen::VectorXd::Zero(3)),
                  std::invalid_argument);

  Rng rng(88);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd a(4), b(4);
    for (int i = 0; i < 4; ++i) {
      a(i) = rng.next_gaussian();
      b(i) = rng.next_gaussian();
    }
    Eigen::MatrixXd single = a.transpose();
    CHECK(exact_inner_products(single, b)(0) ==
          doctest::Approx(exact_inner_products(b.transpose(), a)(0)));
  }
}
