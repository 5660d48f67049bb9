#ifndef JOINTLCA_SIMULATION_HPP
#define JOINTLCA_SIMULATION_HPP

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

#include "jointlca/multiview.hpp"
#include "jointlca/rng.hpp"

namespace jointlca {

enum class SimCase { I, II };
enum class DiagonalRole { Joint, Individual };

struct SimConfig {
  Eigen::Index n = 100;
  std::vector<Eigen::Index> dims; // p_1..p_I
  Eigen::Index r0 = 2;
  Eigen::Index r_indiv = 1;
  SimCase sim_case = SimCase::I;
  std::uint64_t seed = 0;

  Eigen::Index view_count() const { return static_cast<Eigen::Index>(dims.size()); }
  void validate() const;
};

struct SimGroundTruth {
  Eigen::MatrixXd shared_scores;                // U, n x r0
  std::vector<Eigen::MatrixXd> loadings;        // V_i, p_i x r0
  std::vector<Eigen::VectorXd> scales;          // D_i, r0
  std::vector<Eigen::MatrixXd> indiv_scores;    // U_i0, n x r_i
  std::vector<Eigen::MatrixXd> indiv_loadings;  // V_i0, p_i x r_i
  std::vector<Eigen::VectorXd> indiv_scales;    // D_i0, r_i
  std::vector<Eigen::MatrixXd> signals;         // Z_i
  double noise_sd = 0.0;
};

/// Test hooks: zero_noise drops W_i; orthogonalize_individual makes every
/// U_i0 orthogonal to U and to previously drawn individual scores, so the
/// noiseless cross-covariance identity holds exactly.
struct SimHooks {
  bool zero_noise = false;
  bool orthogonalize_individual = false;
};

/// Gaussian draw, columns centered then orthonormalized (in that order).
Eigen::MatrixXd orthonormal_centered(Eigen::Index nrows, Eigen::Index ncols, Rng& rng);

/// Case I: U[0,1] for both roles. Case II: joint U[0.5*sqrt(5), sqrt(5)],
/// individual U[0.5, 1].
Eigen::VectorXd sample_diagonals(SimCase sim_case, DiagonalRole role, Eigen::Index count,
                                 Rng& rng);

/// sigma with overall SNR = 1: sigma^2 = sum ||Z_i||_F^2 / (n * sum p_i).
double noise_sd(const std::vector<Eigen::MatrixXd>& signals, Eigen::Index n,
                const std::vector<Eigen::Index>& dims);

std::pair<MultiviewDataset, SimGroundTruth> generate(const SimConfig& config,
                                                     const SimHooks& hooks = {});

std::string ground_truth_to_json(const SimGroundTruth& truth);

} // namespace jointlca

#endif
