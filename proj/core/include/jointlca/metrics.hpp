#ifndef JOINTLCA_METRICS_HPP
#define JOINTLCA_METRICS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "jointlca/rank_selection.hpp"
#include "jointlca/simulation.hpp"

namespace jointlca {

struct BenchmarkRecord {
  std::string config_id;
  int replication = 0;
  std::uint64_t seed = 0;
  Eigen::Index true_rank = 0;
  Eigen::Index estimated = 0;
  double subspace_err = 0.0;
  double lambda = 0.0;
  double wall_time_s = 0.0; // kept in memory only; not serialized (not reproducible)
  bool failed = false;
  std::string error;
};

struct BenchmarkCell {
  SimConfig config;
  std::string id;
};

struct BenchmarkSummaryCell {
  std::string config_id;
  int replications = 0;
  int failures = 0;
  double accuracy = 0.0;
  double err_min = 0.0, err_q1 = 0.0, err_median = 0.0, err_q3 = 0.0, err_max = 0.0;
};

/// Projection-distance error sum_i ||V_i V_i^T - Vhat_i Vhat_i^T||_F^2 / (I r).
/// Estimates may have a different column count than the truths.
double subspace_error(const std::vector<Eigen::MatrixXd>& estimates,
                      const std::vector<Eigen::MatrixXd>& truths);

/// Fraction of records with estimated == true rank (failed runs count as misses).
double rank_accuracy(const std::vector<BenchmarkRecord>& records);

struct BenchmarkOptions {
  int replications = 1;
  std::uint64_t master_seed = 0;
  int threads = 1;
  RankSelectionOptions selection;
  SimHooks hooks;
};

std::vector<BenchmarkRecord> run_benchmark(const std::vector<BenchmarkCell>& grid,
                                           const BenchmarkOptions& opts);

std::vector<BenchmarkSummaryCell> summarize(const std::vector<BenchmarkCell>& grid,
                                            const std::vector<BenchmarkRecord>& records);

std::string benchmark_records_csv(const std::vector<BenchmarkRecord>& records);
std::string benchmark_summary_json(const std::vector<BenchmarkSummaryCell>& cells);

} // namespace jointlca

#endif
