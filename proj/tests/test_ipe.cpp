#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>

#include "submax/audit.hpp"
#include "submax/common.hpp"
#include "submax/ipe.hpp"

using namespace submax;

TEST_CASE("lift identities on random pairs") {
  Rng rng(7);
  for (int t = 0; t < 1000; ++t) {
    const int d = 2 + rng.next_index(8);
    const Eigen::VectorXd a = audit::random_direction(rng, d, rng.next_double());
    const Eigen::VectorXd b = audit::random_direction(rng, d, rng.next_double());
    const Eigen::VectorXd qa = lift_q(a);
    const Eigen::VectorXd pb = lift_p(b);
    CHECK(std::abs(qa.norm() - 1.0) <= 1e-12);
    CHECK(std::abs(pb.norm() - 1.0) <= 1e-12);
    CHECK(std::abs(qa.dot(pb) - a.dot(b)) <= 1e-12);
  }
}

TEST_CASE("lifts reject overlong inputs") {
  Eigen::VectorXd big(3);
  big << 1.0, 1.0, 1.0;
  CHECK_THROWS_AS(lift_p(big), std::invalid_argument);
  CHECK_THROWS_AS(lift_q(big), std::invalid_argument);
}

TEST_CASE("distance-to-inner-product conversion reproduces exact values") {
  Rng rng(13);
  for (int t = 0; t < 1000; ++t) {
    const int d = 2 + rng.next_index(6);
    const double bound = 0.5 + 2.0 * rng.next_double();
    const Eigen::VectorXd x =
        audit::random_direction(rng, d, bound * rng.next_double());
    const Eigen::VectorXd q = audit::random_direction(rng, d, rng.next_double());
    const double dist = (lift_q(x / bound) - lift_p(q)).norm();
    const double truth = q.dot(x);
    CHECK(std::abs(inner_from_distance(bound, dist) - truth) <=
          1e-10 * std::max(1.0, std::abs(truth)));
  }
}

TEST_CASE("unit-norm points lift with zero padding") {
  Eigen::MatrixXd pts(1, 3);
  pts << 0.6, 0.8, 0.0;
  const IpeState ipe(pts, 1.0, 0.1, 0.05, 3);
  REQUIRE(ipe.ade().exact_mode());
  const Eigen::VectorXd lifted = ipe.ade().sketch_matrix(0).row(0).transpose();
  CHECK(lifted.size() == 5);
  CHECK(lifted(0) == doctest::Approx(0.6));
  CHECK(lifted(1) == doctest::Approx(0.8));
  CHECK(std::abs(lifted(3)) <= 1e-12);  // Q padding coordinate
  CHECK(std::abs(lifted(4)) <= 1e-8);   // sqrt(1 - 1) up to rounding
}

TEST_CASE("points are scaled by the norm bound before lifting") {
  Eigen::MatrixXd pts(1, 2);
  pts << 2.0, 0.0;
  const IpeState ipe(pts, 2.0, 0.1, 0.05, 5);
  const Eigen::VectorXd lifted = ipe.ade().sketch_matrix(0).row(0).transpose();
  CHECK(lifted(0) == doctest::Approx(1.0));
  CHECK(std::abs(lifted(1)) <= 1e-12);
  CHECK(std::abs(lifted(2)) <= 1e-12);
  CHECK(std::abs(lifted(3)) <= 1e-8);
}

TEST_CASE("eps prime and the error budget") {
  Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(2, 3);
  const IpeState ipe(pts, 2.0, 0.3, 0.1, 1);
  CHECK(ipe.eps_prime() == doctest::Approx(2.0 * 0.3 / (3.0 * 2.0)));
  CHECK_THROWS_AS(IpeState(pts, 2.0, 3.1, 0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(IpeState(pts, 2.0, 0.3, 1.5, 1), std::invalid_argument);
}

TEST_CASE("norm violations are rejected, not clamped") {
  Eigen::MatrixXd pts(2, 2);
  pts << 0.5, 0.0, 1.2, 0.0;
  CHECK_THROWS_AS(IpeState(pts, 1.0, 0.1, 0.05, 1), std::invalid_argument);

  Eigen::MatrixXd ok(2, 2);
  ok << 0.5, 0.0, 0.9, 0.0;
  IpeState ipe(ok, 1.0, 0.1, 0.05, 1);
  Eigen::VectorXd z(2);
  z << 1.3, 0.0;
  CHECK_THROWS_AS(ipe.update(0, z), std::invalid_argument);
  Eigen::VectorXd q(2);
  q << 1.1, 0.0;
  CHECK_THROWS_AS(ipe.query(q), std::invalid_argument);
}

TEST_CASE("query at an exactly stored direction is exact") {
  Rng rng(17);
  const int d = 8;
  Eigen::MatrixXd pts(3, d);
  const Eigen::VectorXd q = audit::random_direction(rng, d, 1.0);
  pts.row(0) = q.transpose();  // x_0 = q * D with D = 1
  pts.row(1) = audit::random_direction(rng, d, 0.5).transpose();
  pts.row(2).setZero();
  const IpeState ipe(pts, 1.0, 0.1, 0.05, 19);
  const Eigen::VectorXd w = ipe.query(q);
  CHECK(w(0) == doctest::Approx(1.0).epsilon(1e-12));  // <q, q> = 1
  CHECK(std::abs(w(2)) <= 1e-12);                      // zero vector
}

TEST_CASE("orthogonal pair targets zero") {
  const int d = 4;
  Eigen::MatrixXd pts(1, d);
  pts << 0, 1, 0, 0;
  const IpeState ipe(pts, 1.0, 0.1, 0.05, 23);
  Eigen::VectorXd q(d);
  q << 1, 0, 0, 0;
  CHECK(std::abs(ipe.query(q)(0)) <= 0.1);
}

TEST_CASE("estimates track updates") {
  Rng rng(29);
  const int n = 20, d = 8;
  Eigen::MatrixXd pts(n, d);
  for (int i = 0; i < n; ++i) {
    pts.row(i) = audit::random_direction(rng, d, rng.next_double()).transpose();
  }
  IpeState ipe(pts, 1.0, 0.1, 0.05, 31);
  const Eigen::VectorXd q = audit::random_direction(rng, d, 1.0);

  // Copy x_0 into slot 1: both estimates agree with <q, x_0>.
  ipe.update(1, pts.row(0).transpose());
  Eigen::VectorXd w = ipe.query(q);
  const double truth = q.dot(pts.row(0).transpose());
  CHECK(std::abs(w(0) - truth) <= 0.1 + 1e-9);
  CHECK(std::abs(w(1) - truth) <= 0.1 + 1e-9);

  // Zero the slot: estimate near zero.
  ipe.update(2, Eigen::VectorXd::Zero(d));
  w = ipe.query(q);
  CHECK(std::abs(w(2)) <= 0.1 + 1e-9);
}

TEST_CASE("additive contract battery at contract scale") {
  const auto result =
      audit::ipe_contract(20, 10, 100, 16, 1.0, 0.1, 0.05, 0.03, 99);
  CHECK(result.pass());
  CHECK(result.violations == 0);
}

TEST_CASE("additive contract under genuine sketching") {
  // Force m << lifted dimension so the probabilistic path is exercised;
  // a generous eps keeps the battery stable at this ensemble size.
  Rng rng(41);
  const int n = 30, d = 510;
  Eigen::MatrixXd pts(n, d);
  for (int i = 0; i < n; ++i) {
    pts.row(i) = audit::random_direction(rng, d, rng.next_double()).transpose();
  }
  AdeOverrides forced;
  forced.sketches = 48;
  forced.proj_dim = 128;
  forced.query_samples = 25;
  int violated = 0;
  for (int b = 0; b < 10; ++b) {
    const IpeState ipe(pts, 1.0, 0.9, 0.1, substream(4321, b), forced);
    CHECK_FALSE(ipe.ade().exact_mode());
    const Eigen::VectorXd q = audit::random_direction(rng, d, 1.0);
    const Eigen::VectorXd w = ipe.query(q);
    const Eigen::VectorXd truth = pts * q;
    if ((w - truth).cwiseAbs().maxCoeff() > 0.9) ++violated;
  }
  CHECK(violated == 0);
}
