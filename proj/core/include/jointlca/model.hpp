#ifndef JOINTLCA_MODEL_HPP
#define JOINTLCA_MODEL_HPP

#include <Eigen/Core>
#include <string>
#include <vector>

#include "jointlca/multiview.hpp"

namespace jointlca {

/// Fitted joint_LCA model: per-view orthonormal loadings V_i (p_i x r)
/// and nonnegative scale diagonals D_i (length r).
struct JointLCAModel {
  std::vector<Eigen::MatrixXd> loadings;
  std::vector<Eigen::VectorXd> scales;
  Eigen::Index r = 0;
  double lambda = 0.0; // penalty weight used; 0 for refit output

  Eigen::Index view_count() const { return static_cast<Eigen::Index>(loadings.size()); }
  double sigma(Eigen::Index i, Eigen::Index j, Eigen::Index k) const {
    return scales[i](k) * scales[j](k);
  }
  void validate() const;
};

/// V_i D_i D_j^T V_j^T for one pair.
Eigen::MatrixXd reconstruct_pair(const JointLCAModel& model, Eigen::Index i, Eigen::Index j);

/// Weighted squared reconstruction loss over all pairs.
double fidelity(const JointLCAModel& model, const CrossCovarianceSet& ccset);

/// sum_k sqrt(sum_{i<j} w_ij sigma_ijk^2).
double penalty_value(const JointLCAModel& model, const std::vector<double>& weights);

/// fidelity + lambda * penalty.
double objective(const JointLCAModel& model, const CrossCovarianceSet& ccset, double lambda);

/// Unweighted per-component group norms sqrt(sum_{i<j} sigma_ijk^2).
Eigen::VectorXd group_norms(const JointLCAModel& model);

/// Weighted variant used for the output component ordering.
Eigen::VectorXd weighted_group_norms(const JointLCAModel& model,
                                     const std::vector<double>& weights);

/// Number of components whose group norm exceeds tol.
Eigen::Index estimated_rank(const JointLCAModel& model, double tol);

/// Relative default threshold: tol = 1e-8 * max group norm.
Eigen::Index estimated_rank(const JointLCAModel& model);

/// Reorders components in place by descending weighted group norm.
void sort_components(JointLCAModel& model, const std::vector<double>& weights);

/// Keeps the first r components (columns) of every view.
JointLCAModel truncate_components(const JointLCAModel& model, Eigen::Index r);

std::string model_to_json(const JointLCAModel& model);
JointLCAModel model_from_json(const std::string& text);
void save_model(const JointLCAModel& model, const std::string& path);
JointLCAModel load_model(const std::string& path);

} // namespace jointlca

#endif
