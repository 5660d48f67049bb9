#ifndef JOINTLCA_TEST_UTIL_HPP
#define JOINTLCA_TEST_UTIL_HPP

#include <Eigen/Dense>
#include <vector>

#include "jointlca/model.hpp"
#include "jointlca/multiview.hpp"
#include "jointlca/rng.hpp"

namespace testutil {

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, jointlca::Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.normal();
  return m;
}

// Orthonormal columns via QR of a Gaussian draw.
inline Eigen::MatrixXd random_orthonormal(Eigen::Index rows, Eigen::Index cols,
                                          jointlca::Rng& rng) {
  const Eigen::MatrixXd g = gaussian(rows, cols, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
}

// Random centered dataset with I views; pairs are almost surely nondegenerate.
inline jointlca::MultiviewDataset random_dataset(Eigen::Index n,
                                                 const std::vector<Eigen::Index>& dims,
                                                 jointlca::Rng& rng) {
  jointlca::MultiviewDataset ds;
  ds.n = n;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    jointlca::ViewMatrix v;
    v.view_id = static_cast<int>(i);
    v.values = gaussian(n, dims[i], rng);
    ds.views.push_back(jointlca::center_columns(v));
  }
  return ds;
}

// Exact low-rank cross-covariance set S_ij = V_i D_i D_j V_j^T with unit weights
// replaced by the fidelity weights unless unit_weights is set.
inline jointlca::CrossCovarianceSet exact_ccset(
    const std::vector<Eigen::MatrixXd>& loadings,
    const std::vector<Eigen::VectorXd>& scales, bool unit_weights = false) {
  const auto I = static_cast<Eigen::Index>(loadings.size());
  std::vector<Eigen::Index> dims;
  for (const auto& v : loadings) dims.push_back(v.rows());
  std::vector<Eigen::MatrixXd> pairs;
  std::vector<double> weights;
  for (Eigen::Index i = 0; i < I; ++i)
    for (Eigen::Index j = i + 1; j < I; ++j) {
      Eigen::MatrixXd s = loadings[i] * scales[i].cwiseProduct(scales[j]).asDiagonal() *
                          loadings[j].transpose();
      const double fn2 = s.squaredNorm();
      weights.push_back(unit_weights || fn2 == 0.0 ? 1.0 : 1.0 / fn2);
      pairs.push_back(std::move(s));
    }
  return jointlca::CrossCovarianceSet(std::move(dims), std::move(pairs), std::move(weights));
}

// Random valid model: orthonormal loadings, nonnegative scales.
inline jointlca::JointLCAModel random_model(const std::vector<Eigen::Index>& dims,
                                            Eigen::Index r, jointlca::Rng& rng) {
  jointlca::JointLCAModel model;
  model.r = r;
  for (Eigen::Index p : dims) {
    model.loadings.push_back(random_orthonormal(p, r, rng));
    Eigen::VectorXd d(r);
    for (Eigen::Index k = 0; k < r; ++k) d(k) = rng.uniform(0.0, 2.0);
    model.scales.push_back(d);
  }
  return model;
}

} // namespace testutil

#endif
