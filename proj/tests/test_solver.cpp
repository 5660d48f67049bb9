#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "jointlca/solver.hpp"
#include "test_util.hpp"

using namespace jointlca;

namespace {

// ||A - VB||_F for candidate comparison
double procrustes_loss(const Eigen::MatrixXd& A, const Eigen::MatrixXd& V,
                       const Eigen::MatrixXd& B) {
  return (A - V * B).norm();
}

} // namespace

TEST_CASE("orthogonal_procrustes on AB^T = I is the identity") {
  // A = B = I so AB^T = I_2
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd v = orthogonal_procrustes(id, id);
  CHECK((v - id).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("orthogonal_procrustes recovers a rotation") {
  Eigen::MatrixXd rot(2, 2);
  rot << 0, -1, 1, 0;
  // A = rot, B = I_2 -> AB^T = rot, polar factor is rot itself
  const Eigen::MatrixXd v = orthogonal_procrustes(rot, Eigen::MatrixXd::Identity(2, 2));
  CHECK((v - rot).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("orthogonal_procrustes output has orthonormal columns") {
  Rng rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd a = testutil::gaussian(5, 4, rng);
    const Eigen::MatrixXd b = testutil::gaussian(3, 4, rng);
    const Eigen::MatrixXd v = orthogonal_procrustes(a, b);
    CHECK((v.transpose() * v - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <
          1e-10);
  }
}

TEST_CASE("orthogonal_procrustes beats random orthonormal candidates") {
  Rng rng(55);
  const Eigen::MatrixXd a = testutil::gaussian(4, 3, rng);
  const Eigen::MatrixXd b = testutil::gaussian(2, 3, rng);
  const Eigen::MatrixXd v = orthogonal_procrustes(a, b);
  const double best = procrustes_loss(a, v, b);
  for (int c = 0; c < 2000; ++c) {
    const Eigen::MatrixXd w = testutil::random_orthonormal(4, 2, rng);
    CHECK(best <= procrustes_loss(a, w, b) + 1e-12);
  }
}

TEST_CASE("update_loading recovers the true subspace from exact data") {
  Rng rng(7);
  const Eigen::Index r = 2;
  std::vector<Eigen::MatrixXd> loadings = {testutil::random_orthonormal(5, r, rng),
                                           testutil::random_orthonormal(4, r, rng)};
  std::vector<Eigen::VectorXd> scales = {Eigen::VectorXd::Ones(r), Eigen::VectorXd::Ones(r)};
  const CrossCovarianceSet cc = testutil::exact_ccset(loadings, scales, /*unit_weights=*/true);

  JointLCAModel m;
  m.r = r;
  m.loadings = {testutil::random_orthonormal(5, r, rng), loadings[1]};
  m.scales = scales;
  const Eigen::MatrixXd v1 = update_loading(0, cc, m);
  const Eigen::MatrixXd proj_est = v1 * v1.transpose();
  const Eigen::MatrixXd proj_true = loadings[0] * loadings[0].transpose();
  CHECK((proj_est - proj_true).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("update_loading keeps the current loading when D is zero") {
  Rng rng(13);
  JointLCAModel m = testutil::random_model({4, 5}, 2, rng);
  const CrossCovarianceSet cc = testutil::exact_ccset(m.loadings, m.scales);
  for (auto& d : m.scales) d.setZero();
  const Eigen::MatrixXd v0 = update_loading(0, cc, m);
  CHECK((v0 - m.loadings[0]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("a sweep of loading updates does not increase fidelity") {
  Rng rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    JointLCAModel truth = testutil::random_model({5, 6, 4}, 2, rng);
    const CrossCovarianceSet cc = testutil::exact_ccset(truth.loadings, truth.scales);
    JointLCAModel m = testutil::random_model({5, 6, 4}, 2, rng);
    double prev = fidelity(m, cc);
    for (Eigen::Index i = 0; i < 3; ++i) {
      m.loadings[i] = update_loading(i, cc, m);
      const double cur = fidelity(m, cc);
      CHECK(cur <= prev + 1e-10);
      prev = cur;
    }
  }
}

TEST_CASE("rotated_diag extracts the diagonal of V_i^T S_ij V_j") {
  Rng rng(3);
  JointLCAModel m = testutil::random_model({4, 5}, 3, rng);
  // S constructed to diagonalize exactly under the model's loadings
  Eigen::VectorXd lam(3);
  lam << 2.0, -0.5, 0.25;
  Eigen::MatrixXd s = m.loadings[0] * lam.asDiagonal() * m.loadings[1].transpose();
  CrossCovarianceSet cc({4, 5}, {s}, {1.0});
  const Eigen::MatrixXd d = rotated_diag(cc, m);
  REQUIRE(d.rows() == 1);
  REQUIRE(d.cols() == 3);
  CHECK((d.row(0).transpose() - lam).cwiseAbs().maxCoeff() < 1e-10);

  CrossCovarianceSet zero({4, 5}, {Eigen::MatrixXd::Zero(4, 5)}, {1.0});
  CHECK(rotated_diag(zero, m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rotated_diag matches the dense product oracle") {
  Rng rng(37);
  JointLCAModel m = testutil::random_model({5, 6, 4}, 2, rng);
  MultiviewDataset ds = testutil::random_dataset(12, {5, 6, 4}, rng);
  const CrossCovarianceSet cc = cross_covariances(ds);
  const Eigen::MatrixXd d = rotated_diag(cc, m);
  for (Eigen::Index idx = 0; idx < cc.pair_count(); ++idx) {
    auto [i, j] = cc.pair_views(idx);
    const Eigen::MatrixXd full =
        m.loadings[i].transpose() * cc.pair_at(idx) * m.loadings[j];
    CHECK((d.row(idx).transpose() - full.diagonal()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("update_sigma_group thresholds at the boundary") {
  Eigen::VectorXd y(2);
  y << 3, 4;
  const std::vector<double> w = {1.0, 1.0};
  const SigmaGroup zero = update_sigma_group(0, y, w, 5.0);
  CHECK(zero.values(0) == 0.0);
  CHECK(zero.values(1) == 0.0);

  const SigmaGroup half = update_sigma_group(0, y, w, 2.5);
  CHECK(half.values(0) == doctest::Approx(1.5));
  CHECK(half.values(1) == doctest::Approx(2.0));
}

TEST_CASE("update_sigma_group accounts for weights") {
  // Y_k = sqrt(w) .* y; with w = 4 the weighted norm doubles
  Eigen::VectorXd y(1);
  y << 3;
  const SigmaGroup g = update_sigma_group(0, y, {4.0}, 3.0);
  // ||Y|| = 6, shrink factor 1/2, sigma returned in unweighted coordinates
  CHECK(g.values(0) == doctest::Approx(1.5));
}

TEST_CASE("groups zeroed by update_sigma_group are exactly zero") {
  Rng rng(61);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd y(3);
    for (int i = 0; i < 3; ++i) y(i) = rng.normal();
    std::vector<double> w = {rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0),
                             rng.uniform(0.1, 2.0)};
    Eigen::VectorXd yk(3);
    for (int i = 0; i < 3; ++i) yk(i) = std::sqrt(w[i]) * y(i);
    const double lambda = yk.norm() * rng.uniform(1.0, 2.0);
    const SigmaGroup g = update_sigma_group(0, y, w, lambda);
    CHECK(g.values.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("update_d_coordinate unweighted averages the targets") {
  Eigen::VectorXd sigma_hat(3); // pairs (0,1),(0,2),(1,2)
  sigma_hat << 2, 2, 0;
  std::vector<Eigen::VectorXd> d(3, Eigen::VectorXd::Ones(1));
  const std::vector<double> w = {1.0, 1.0, 1.0};
  const double d0 = update_d_coordinate(0, 0, sigma_hat, d, w, false, 3);
  CHECK(d0 == doctest::Approx(2.0));
}

TEST_CASE("update_d_coordinate clamps a negative numerator to zero") {
  Eigen::VectorXd sigma_hat(1);
  sigma_hat << -3;
  std::vector<Eigen::VectorXd> d(2, Eigen::VectorXd::Ones(1));
  CHECK(update_d_coordinate(0, 0, sigma_hat, d, {1.0}, false, 2) == 0.0);
  // zero denominator also yields zero
  d[1](0) = 0.0;
  sigma_hat(0) = 3;
  CHECK(update_d_coordinate(0, 0, sigma_hat, d, {1.0}, false, 2) == 0.0);
}

TEST_CASE("update_d_coordinate matches a dense grid search") {
  Rng rng(71);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::Index I = 3;
    Eigen::VectorXd sigma_hat(3);
    std::vector<Eigen::VectorXd> d;
    for (Eigen::Index i = 0; i < I; ++i) {
      Eigen::VectorXd v(1);
      v << rng.uniform(0.2, 2.0);
      d.push_back(v);
    }
    for (int p = 0; p < 3; ++p) sigma_hat(p) = rng.uniform(0.0, 4.0);
    const std::vector<double> w = {1.0, 1.0, 1.0};
    const double got = update_d_coordinate(0, 0, sigma_hat, d, w, false, I);

    auto loss = [&](double x) {
      // pairs containing view 0: (0,1) index 0 and (0,2) index 1
      const double e1 = x * d[1](0) - sigma_hat(0);
      const double e2 = x * d[2](0) - sigma_hat(1);
      return e1 * e1 + e2 * e2;
    };
    double best = 0.0, bestval = loss(0.0);
    for (double x = 0.0; x <= 10.0; x += 1e-4) {
      const double v = loss(x);
      if (v < bestval) {
        bestval = v;
        best = x;
      }
    }
    CHECK(std::abs(got - best) < 2e-4);
  }
}

TEST_CASE("initialize recovers equal diagonals on noiseless 2-view rank-1 data") {
  Rng rng(83);
  const double d_true = 1.3;
  std::vector<Eigen::MatrixXd> loadings = {testutil::random_orthonormal(5, 1, rng),
                                           testutil::random_orthonormal(6, 1, rng)};
  std::vector<Eigen::VectorXd> scales = {Eigen::VectorXd::Constant(1, d_true),
                                         Eigen::VectorXd::Constant(1, d_true)};
  const CrossCovarianceSet cc = testutil::exact_ccset(loadings, scales);
  const JointLCAModel init = initialize(cc, 1);
  CHECK(std::abs(init.scales[0](0) - d_true) < 1e-6);
  CHECK(std::abs(init.scales[1](0) - d_true) < 1e-6);
}

TEST_CASE("initialize of an all-zero set has zero diagonals") {
  CrossCovarianceSet cc({3, 3}, {Eigen::MatrixXd::Zero(3, 3)}, {1.0});
  const JointLCAModel init = initialize(cc, 2);
  CHECK(init.scales[0].cwiseAbs().maxCoeff() == 0.0);
  CHECK(init.scales[1].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("initialize clamps negative rotated diagonals") {
  // S_12 = -0.3 * v1 v2^T: the sole rotated diagonal is negative up to sign
  Eigen::MatrixXd s(1, 1);
  s << -0.3;
  CrossCovarianceSet cc({1, 1}, {s}, {1.0 / (0.3 * 0.3)});
  const JointLCAModel init = initialize(cc, 1);
  // the init loadings are scalars +-1; whatever the sign outcome, the
  // diagonal is the clamped average of a single (possibly negative) term
  CHECK(init.scales[0](0) >= 0.0);
  CHECK(init.scales[0](0) == init.scales[1](0));
}

TEST_CASE("fit_penalized at huge lambda shrinks everything to zero") {
  Rng rng(91);
  const JointLCAModel truth = testutil::random_model({5, 4, 6}, 2, rng);
  const CrossCovarianceSet cc = testutil::exact_ccset(truth.loadings, truth.scales);
  SolverOptions opts;
  auto [m, trace] = fit_penalized(cc, 1e9, 4, opts);
  CHECK(estimated_rank(m, 0.0) == 0);
}

TEST_CASE("fit_penalized objective trace is non-increasing") {
  Rng rng(97);
  SolverOptions opts;
  opts.max_iters = 60;
  for (int trial = 0; trial < 15; ++trial) {
    const JointLCAModel truth = testutil::random_model({5, 6, 4}, 2, rng);
    CrossCovarianceSet cc = testutil::exact_ccset(truth.loadings, truth.scales);
    const double lambda = rng.uniform(0.0, 1.0);
    auto [m, trace] = fit_penalized(cc, lambda, 3, opts);
    for (std::size_t t = 1; t < trace.objective_values.size(); ++t)
      CHECK(trace.objective_values[t] <= trace.objective_values[t - 1] + 1e-10);
  }
}

TEST_CASE("fit_penalized with small lambda recovers the noiseless rank") {
  Rng rng(103);
  std::vector<Eigen::MatrixXd> loadings = {testutil::random_orthonormal(6, 2, rng),
                                           testutil::random_orthonormal(7, 2, rng),
                                           testutil::random_orthonormal(5, 2, rng)};
  Eigen::VectorXd d(2);
  d << 1.4, 0.9;
  std::vector<Eigen::VectorXd> scales = {d, d, d};
  const CrossCovarianceSet cc = testutil::exact_ccset(loadings, scales);
  SolverOptions opts;
  auto [m, trace] = fit_penalized(cc, 1e-4, 5, opts);
  CHECK(estimated_rank(m) >= 2);

  const JointLCAModel trunc = truncate_components(m, 2);
  auto [rm, rtrace] = refit(cc, 2, m, opts);
  CHECK(fidelity(rm, cc) < 1e-8);
}

TEST_CASE("refit reaches near-zero fidelity on exact rank-r data") {
  Rng rng(111);
  std::vector<Eigen::MatrixXd> loadings = {testutil::random_orthonormal(5, 2, rng),
                                           testutil::random_orthonormal(6, 2, rng)};
  Eigen::VectorXd d(2);
  d << 2.0, 0.8;
  std::vector<Eigen::VectorXd> scales = {d, d};
  const CrossCovarianceSet cc = testutil::exact_ccset(loadings, scales);
  SolverOptions opts;
  const JointLCAModel init = initialize(cc, 2);
  auto [m, trace] = refit(cc, 2, init, opts);
  CHECK(fidelity(m, cc) < 1e-10);
  for (const auto& dd : m.scales) CHECK(dd.minCoeff() >= 0.0);
  for (const auto& v : m.loadings)
    CHECK((v.transpose() * v - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <
          1e-8);
}

TEST_CASE("refit does not increase fidelity relative to the truncated init") {
  Rng rng(113);
  for (int trial = 0; trial < 8; ++trial) {
    MultiviewDataset ds = testutil::random_dataset(15, {5, 6, 4}, rng);
    const CrossCovarianceSet cc = cross_covariances(ds);
    SolverOptions opts;
    JointLCAModel init = initialize(cc, 3);
    sort_components(init, cc.weights());
    const double before = fidelity(truncate_components(init, 2), cc);
    auto [m, trace] = refit(cc, 2, init, opts);
    CHECK(fidelity(m, cc) <= before + 1e-10);
  }
}

TEST_CASE("refit at full p0 is at least as tight as a penalized fit") {
  Rng rng(117);
  MultiviewDataset ds = testutil::random_dataset(20, {5, 6}, rng);
  const CrossCovarianceSet cc = cross_covariances(ds);
  SolverOptions opts;
  const double lambda = 0.2;
  auto [pm, ptrace] = fit_penalized(cc, lambda, 4, opts);
  auto [rm, rtrace] = refit(cc, 4, initialize(cc, 4), opts);
  CHECK(fidelity(rm, cc) <= fidelity(pm, cc) + 1e-10);
}

TEST_CASE("refit with all-zero init components reseeds from the initializer") {
  Rng rng(119);
  const JointLCAModel truth = testutil::random_model({5, 6}, 2, rng);
  const CrossCovarianceSet cc = testutil::exact_ccset(truth.loadings, truth.scales);
  JointLCAModel init = initialize(cc, 2);
  for (auto& d : init.scales) d.setZero(); // pretend the penalty killed everything
  SolverOptions opts;
  auto [m, trace] = refit(cc, 2, init, opts);
  CHECK(fidelity(m, cc) < 1e-8);
}
