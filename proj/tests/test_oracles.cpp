#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "jointlca/oracles.hpp"
#include "jointlca/solver.hpp"
#include "test_util.hpp"

using namespace jointlca;

TEST_CASE("diag_cca_r1_oracle on a diagonal matrix") {
  Eigen::MatrixXd s(2, 2);
  s << 3, 0, 0, 1;
  const auto res = oracles::diag_cca_r1_oracle(s);
  CHECK(res.value == doctest::Approx(3.0));
  CHECK(std::abs(res.v1(0)) == doctest::Approx(1.0));
  CHECK(std::abs(res.v2(0)) == doctest::Approx(1.0));
  CHECK(res.v1(0) > 0.0); // sign convention: largest-|entry| positive
}

TEST_CASE("diag_cca_r1_oracle on a nilpotent matrix") {
  Eigen::MatrixXd s(2, 2);
  s << 0, 2, 0, 0;
  const auto res = oracles::diag_cca_r1_oracle(s);
  CHECK(res.value == doctest::Approx(2.0));
  CHECK(std::abs(res.v1(0)) == doctest::Approx(1.0));
  CHECK(std::abs(res.v2(1)) == doctest::Approx(1.0));
}

TEST_CASE("diag_cca_r1_oracle rejects the zero matrix") {
  CHECK_THROWS_AS(oracles::diag_cca_r1_oracle(Eigen::MatrixXd::Zero(2, 3)),
                  ValidationError);
}

TEST_CASE("diag_cca_r1_oracle self-check against random unit pairs") {
  Rng rng(1234);
  const Eigen::MatrixXd s = testutil::gaussian(4, 3, rng);
  const auto res = oracles::diag_cca_r1_oracle(s);
  double best = 0.0;
  for (int trial = 0; trial < 100000; ++trial) {
    Eigen::VectorXd v1(4), v2(3);
    for (int i = 0; i < 4; ++i) v1(i) = rng.normal();
    for (int i = 0; i < 3; ++i) v2(i) = rng.normal();
    v1.normalize();
    v2.normalize();
    best = std::max(best, std::abs(v1.dot(s * v2)));
  }
  CHECK(res.value >= best - 1e-6);
  CHECK(res.value <= best + 0.05 * res.value); // sampling slack
}

TEST_CASE("ssqcov_r1_oracle on aligned rank-1 inputs") {
  const Eigen::MatrixXd e = Eigen::MatrixXd::Identity(3, 3).col(0) *
                            Eigen::MatrixXd::Identity(3, 3).col(0).transpose();
  const auto res = oracles::ssqcov_r1_oracle(e, e, e, 50);
  CHECK(res.value == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(std::abs(res.v1(0)) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("ssqcov_r1_oracle on zero inputs") {
  const Eigen::MatrixXd z = Eigen::MatrixXd::Zero(3, 3);
  const auto res = oracles::ssqcov_r1_oracle(z, z, z, 10);
  CHECK(res.value == doctest::Approx(0.0));
}

TEST_CASE("ssqcov_r1_oracle enforces the dimension cap") {
  const Eigen::MatrixXd big = Eigen::MatrixXd::Zero(9, 3);
  CHECK_THROWS_AS(
      oracles::ssqcov_r1_oracle(big, big, Eigen::MatrixXd::Zero(3, 3)),
      ValidationError);
}

TEST_CASE("prox_oracle boundary and identity cases") {
  Eigen::VectorXd y(2);
  y << 3, 4;
  CHECK(oracles::prox_oracle(y, 5.0).norm() == 0.0);
  CHECK((oracles::prox_oracle(y, 0.0) - y).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(oracles::prox_oracle(Eigen::VectorXd::Zero(3), 1.0).norm() == 0.0);
}

TEST_CASE("update_sigma_group matches prox_oracle on random pairs") {
  Rng rng(4321);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 2 + static_cast<int>(rng.below(5));
    Eigen::VectorXd y(dim);
    std::vector<double> w(dim);
    for (int i = 0; i < dim; ++i) {
      y(i) = rng.normal();
      w[i] = rng.uniform(0.2, 3.0);
    }
    Eigen::VectorXd yk(dim);
    for (int i = 0; i < dim; ++i) yk(i) = std::sqrt(w[i]) * y(i);
    // include the exact boundary on a few trials
    const double lambda =
        trial % 10 == 0 ? yk.norm() : rng.uniform(0.0, 1.5) * yk.norm();
    const SigmaGroup g = update_sigma_group(0, y, w, lambda);
    Eigen::VectorXd g_weighted(dim);
    for (int i = 0; i < dim; ++i) g_weighted(i) = std::sqrt(w[i]) * g.values(i);
    const Eigen::VectorXd expect = oracles::prox_oracle(yk, lambda);
    worst = std::max(worst, (g_weighted - expect).norm());
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("refit (I=2, r=1, w=1) agrees with the CCA oracle") {
  Rng rng(2024);
  const Eigen::MatrixXd s = testutil::gaussian(5, 4, rng);
  CrossCovarianceSet cc({5, 4}, {s}, {1.0});
  SolverOptions opts;
  opts.rel_tol = 1e-12;
  opts.max_iters = 2000;
  auto [m, trace] = refit(cc, 1, initialize(cc, 1), opts);
  const auto oracle = oracles::diag_cca_r1_oracle(s);
  const double d1d2 = m.scales[0](0) * m.scales[1](0);
  CHECK(std::abs(d1d2 - oracle.value) <= 1e-5);
  const double cosang = std::abs(m.loadings[0].col(0).dot(oracle.v1));
  CHECK(std::acos(std::min(1.0, cosang)) <= 1e-2);
}
