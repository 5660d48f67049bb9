#ifndef JOINTLCA_SOLVER_HPP
#define JOINTLCA_SOLVER_HPP

#include <Eigen/Core>
#include <optional>
#include <utility>
#include <vector>

#include "jointlca/model.hpp"

namespace jointlca {

struct SolverOptions {
  int max_iters = 500;
  double rel_tol = 1e-6; // on the pairwise reconstruction change
  int d_inner_iters = 10;
  std::uint64_t seed = 0; // reserved for tie-breaking randomization
};

struct FitTrace {
  std::vector<double> objective_values; // one entry per outer sweep
  int iterations_used = 0;
  bool converged = false;
};

/// Per-component sigma values sigma_ijk = d_ik * d_jk, flat in pair order.
struct SigmaGroup {
  Eigen::Index k = 0;
  Eigen::VectorXd values; // one per pair (i<j)
};

/// argmin_V ||A - V B||_F over orthonormal-column V, via the SVD of A B^T.
/// Signs are fixed so the largest-|entry| of each left vector is positive.
Eigen::MatrixXd orthogonal_procrustes(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

/// One Procrustes update of V_i with everything else fixed. Returns the
/// current loading unchanged when the target matrix is zero.
Eigen::MatrixXd update_loading(Eigen::Index i, const CrossCovarianceSet& ccset,
                               const JointLCAModel& model);

/// Diagonals of V_i^T S_ij V_j for every pair; row = pair index, col = k.
Eigen::MatrixXd rotated_diag(const CrossCovarianceSet& ccset, const JointLCAModel& model);

/// Group soft-threshold for component k: sigma~ = (1 - lambda/||Y||)_+ Y
/// with Y = sqrt(w) .* y; returns sigma in unweighted coordinates.
SigmaGroup update_sigma_group(Eigen::Index k, const Eigen::VectorXd& y,
                              const std::vector<double>& weights, double lambda);

/// Closed-form coordinate update for d_ik given the other d_jk fixed.
/// sigma_hat holds target values per pair; when weighted, w_ij enters
/// numerator and denominator (the refit form).
double update_d_coordinate(Eigen::Index i, Eigen::Index k, const Eigen::VectorXd& sigma_hat,
                           const std::vector<Eigen::VectorXd>& d_current,
                           const std::vector<double>& weights, bool weighted,
                           Eigen::Index view_count);

/// V_i^(0) from the first p0 left singular vectors of the weighted
/// concatenation S_{i,-i}; equal diagonal entries per component.
JointLCAModel initialize(const CrossCovarianceSet& ccset, Eigen::Index p0);

/// Penalized alternating minimization. Components of the returned model
/// are sorted by descending weighted group norm.
std::pair<JointLCAModel, FitTrace> fit_penalized(
    const CrossCovarianceSet& ccset, double lambda, Eigen::Index p0,
    const SolverOptions& opts, const std::optional<JointLCAModel>& init = std::nullopt);

/// Unpenalized refit at fixed rank r, starting from the top-r components
/// of init. Uses the weighted d-update.
std::pair<JointLCAModel, FitTrace> refit(const CrossCovarianceSet& ccset, Eigen::Index r,
                                         const JointLCAModel& init, const SolverOptions& opts);

} // namespace jointlca

#endif
