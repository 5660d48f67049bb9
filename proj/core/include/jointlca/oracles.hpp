#ifndef JOINTLCA_ORACLES_HPP
#define JOINTLCA_ORACLES_HPP

#include <Eigen/Core>
#include <string>
#include <vector>

#include "jointlca/errors.hpp"

namespace jointlca {
namespace oracles {

// Brute-force verifiers, deliberately independent of the solver module.

struct OracleReport {
  std::string name;
  std::string instance;
  double oracle_value = 0.0;
  double solver_value = 0.0;
  double discrepancy = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct Rank1Cca {
  Eigen::VectorXd v1;
  Eigen::VectorXd v2;
  double value = 0.0; // top singular value
};

/// max v1^T S12 v2 over unit vectors, by power iteration from several
/// deterministic starts. Signs follow the largest-|entry| convention.
Rank1Cca diag_cca_r1_oracle(const Eigen::MatrixXd& s12);

struct Rank1Ssqcov {
  Eigen::VectorXd v1, v2, v3;
  double value = 0.0; // max sum of squared pairwise forms
};

/// max sum_{i<j} <S_ij, v_i v_j^T>^2 over unit vectors, via multi-start
/// block coordinate ascent. Dimensions capped at 8.
Rank1Ssqcov ssqcov_r1_oracle(const Eigen::MatrixXd& s12, const Eigen::MatrixXd& s13,
                             const Eigen::MatrixXd& s23, int restarts = 100);

/// Golden-section minimization of (1/2)(||y|| - t)^2 + lambda*t over t >= 0
/// along the direction y (the minimizer is collinear with y by convexity).
Eigen::VectorXd prox_oracle(const Eigen::VectorXd& y, double lambda);

std::string reports_to_json(const std::vector<OracleReport>& reports);

} // namespace oracles
} // namespace jointlca

#endif
