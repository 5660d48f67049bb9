#ifndef JOINTLCA_RANK_SELECTION_HPP
#define JOINTLCA_RANK_SELECTION_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "jointlca/solver.hpp"

namespace jointlca {

struct CvPlan {
  int K = 5;
  std::vector<int> fold_assignment; // length n
  std::uint64_t seed = 0;
};

struct CvResult {
  std::vector<double> lambdas; // descending
  std::vector<double> mean_score;
  std::vector<double> se;
  double chosen_lambda = 0.0;
  Eigen::Index chosen_rank = 0;
};

struct RankSelectionOptions {
  int K = 5;
  int grid_size = 50;
  std::uint64_t seed = 0;
  Normalization normalization = Normalization::ByN;
  SolverOptions solver;
};

struct SelectRankResult {
  Eigen::Index rank = 0;
  JointLCAModel model; // refit model; r == 0 marks the zero-rank outcome
  CvResult cv;
};

/// Descending log-spaced grid from lambda_max (the largest group norm at
/// the initialization, so the head of the grid shrinks everything to zero)
/// down to lambda_max / 1000.
std::vector<double> lambda_grid(const CrossCovarianceSet& ccset, Eigen::Index p0,
                                int grid_size);

/// Balanced deterministic K-fold split of n samples.
CvPlan split_folds(Eigen::Index n, int K, std::uint64_t seed);

/// sum_ij w_ij || recon_train_ij - S_test_ij ||_F^2 with full-data weights.
double cv_criterion(const JointLCAModel& train_model, const CrossCovarianceSet& test_ccset,
                    const std::vector<double>& weights);

/// Largest lambda whose mean CV score is within one SE of the minimum.
double one_se_select(const std::vector<double>& lambdas, const std::vector<double>& means,
                     const std::vector<double>& ses);

/// Full pipeline: CV over the lambda grid, one-SE selection, penalized fit
/// on the full data, rank readout, unpenalized refit at that rank.
SelectRankResult select_rank(const MultiviewDataset& dataset, Eigen::Index p0,
                             const RankSelectionOptions& opts);

std::string cv_result_to_json(const CvResult& cv);

} // namespace jointlca

#endif
