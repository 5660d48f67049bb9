#include "jointlca/rank_selection.hpp"

#include <algorithm>
#include <numeric>
#include <cmath>

#include <json.hpp>

#include "jointlca/rng.hpp"

namespace jointlca {

std::vector<double> lambda_grid(const CrossCovarianceSet& ccset, Eigen::Index p0,
                                int grid_size) {
  if (grid_size < 2) throw ValidationError("lambda_grid: grid_size must be >= 2");
  const JointLCAModel init = initialize(ccset, p0);
  const Eigen::MatrixXd sd = rotated_diag(ccset, init);
  const std::vector<double>& weights = ccset.weights();
  double lambda_max = 0.0;
  for (Eigen::Index k = 0; k < p0; ++k) {
    double norm2 = 0.0;
    for (Eigen::Index idx = 0; idx < sd.rows(); ++idx)
      norm2 += weights[static_cast<std::size_t>(idx)] * sd(idx, k) * sd(idx, k);
    lambda_max = std::max(lambda_max, std::sqrt(norm2));
  }
  if (lambda_max == 0.0)
    throw ValidationError("lambda_grid: all cross-covariances are zero");

  std::vector<double> grid(static_cast<std::size_t>(grid_size));
  const double log_max = std::log(lambda_max);
  const double log_min = std::log(lambda_max * 1e-3);
  for (int g = 0; g < grid_size; ++g)
    grid[static_cast<std::size_t>(g)] =
        std::exp(log_max + (log_min - log_max) * g / (grid_size - 1));
  grid.front() = lambda_max; // exact endpoints
  grid.back() = lambda_max * 1e-3;
  return grid;
}

CvPlan split_folds(Eigen::Index n, int K, std::uint64_t seed) {
  if (K < 2) throw ValidationError("split_folds: K must be >= 2");
  if (n < K) throw ValidationError("split_folds: need n >= K, got n=" + std::to_string(n) +
                                   ", K=" + std::to_string(K));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  // Fisher-Yates with a pinned stream
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  CvPlan plan;
  plan.K = K;
  plan.seed = seed;
  plan.fold_assignment.assign(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n; ++i)
    plan.fold_assignment[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] =
        static_cast<int>(i % K);
  return plan;
}

double cv_criterion(const JointLCAModel& train_model, const CrossCovarianceSet& test_ccset,
                    const std::vector<double>& weights) {
  if (train_model.view_count() != test_ccset.view_count())
    throw ValidationError("cv_criterion: view count mismatch");
  double total = 0.0;
  for (Eigen::Index idx = 0; idx < test_ccset.pair_count(); ++idx) {
    auto [i, j] = test_ccset.pair_views(idx);
    if (train_model.loadings[i].rows() != test_ccset.pair_at(idx).rows() ||
        train_model.loadings[j].rows() != test_ccset.pair_at(idx).cols())
      throw ValidationError("cv_criterion: dimension mismatch at pair (" +
                            std::to_string(i) + "," + std::to_string(j) + ")");
    total += weights[static_cast<std::size_t>(idx)] *
             (reconstruct_pair(train_model, i, j) - test_ccset.pair_at(idx)).squaredNorm();
  }
  return total;
}

double one_se_select(const std::vector<double>& lambdas, const std::vector<double>& means,
                     const std::vector<double>& ses) {
  if (lambdas.empty() || lambdas.size() != means.size() || lambdas.size() != ses.size())
    throw ValidationError("one_se_select: inconsistent input sizes");
  std::size_t opt = 0;
  for (std::size_t g = 1; g < means.size(); ++g)
    if (means[g] < means[opt]) opt = g;
  const double threshold = means[opt] + ses[opt];
  // grid is descending, so the first qualifying entry is the largest lambda
  for (std::size_t g = 0; g < means.size(); ++g)
    if (means[g] <= threshold) return lambdas[g];
  return lambdas[opt];
}

namespace {

MultiviewDataset subset_rows(const MultiviewDataset& dataset,
                             const std::vector<Eigen::Index>& rows) {
  MultiviewDataset out;
  out.n = static_cast<Eigen::Index>(rows.size());
  for (const auto& view : dataset.views) {
    ViewMatrix v;
    v.view_id = view.view_id;
    v.values.resize(out.n, view.values.cols());
    for (Eigen::Index r = 0; r < out.n; ++r)
      v.values.row(r) = view.values.row(rows[static_cast<std::size_t>(r)]);
    out.views.push_back(std::move(v));
  }
  return out;
}

MultiviewDataset center_views(const MultiviewDataset& dataset) {
  MultiviewDataset out;
  out.n = dataset.n;
  for (const auto& view : dataset.views) out.views.push_back(center_columns(view));
  return out;
}

} // namespace

SelectRankResult select_rank(const MultiviewDataset& dataset, Eigen::Index p0,
                             const RankSelectionOptions& opts) {
  dataset.validate();
  const MultiviewDataset centered = center_views(dataset);
  const CrossCovarianceSet ccset_full = cross_covariances(centered, opts.normalization);
  const std::vector<double>& full_weights = ccset_full.weights();

  const std::vector<double> grid = lambda_grid(ccset_full, p0, opts.grid_size);
  const CvPlan plan = split_folds(dataset.n, opts.K, opts.seed);

  std::vector<std::vector<double>> scores(
      static_cast<std::size_t>(opts.K),
      std::vector<double>(grid.size(), 0.0));

  for (int fold = 0; fold < opts.K; ++fold) {
    std::vector<Eigen::Index> train_rows, test_rows;
    for (Eigen::Index r = 0; r < dataset.n; ++r) {
      if (plan.fold_assignment[static_cast<std::size_t>(r)] == fold)
        test_rows.push_back(r);
      else
        train_rows.push_back(r);
    }
    const MultiviewDataset train = center_views(subset_rows(dataset, train_rows));
    const MultiviewDataset test = center_views(subset_rows(dataset, test_rows));
    const CrossCovarianceSet cc_train = cross_covariances(train, opts.normalization);
    const CrossCovarianceSet cc_test = cross_covariances(test, opts.normalization);

    // Walk the grid from the smallest lambda upward with warm starts: each
    // fit continues from the previous solution, components shrink away
    // monotonically as lambda grows (zero groups are absorbing), and the
    // rank path over the grid is stable instead of jumping between local
    // optima of independent from-scratch fits.
    // The grid head is fit from the initialization itself: lambda_max is
    // defined to zero every init group, which keeps the all-zero model in
    // the comparison (a warm-started solution could survive lambda_max).
    const JointLCAModel fold_init = initialize(cc_train, p0);
    JointLCAModel warm = fold_init;
    for (std::size_t g = grid.size(); g-- > 0;) {
      auto [model, trace] =
          fit_penalized(cc_train, grid[g], p0, opts.solver, g == 0 ? fold_init : warm);
      scores[static_cast<std::size_t>(fold)][g] = cv_criterion(model, cc_test, full_weights);
      warm = std::move(model);
    }
  }

  CvResult cv;
  cv.lambdas = grid;
  cv.mean_score.resize(grid.size());
  cv.se.resize(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double mean = 0.0;
    for (int fold = 0; fold < opts.K; ++fold)
      mean += scores[static_cast<std::size_t>(fold)][g];
    cv.mean_score[g] = mean / opts.K;
  }
  // Each fold's test criterion carries a large fold-specific offset (the
  // held-out covariances themselves differ in scale), which is common
  // across lambda. Standard errors are computed on fold-centered scores
  // (each fold's mean over the grid removed), so they measure fold
  // disagreement about the curve rather than the offsets; raw per-fold
  // spreads would make the one-SE rule drastically over-shrink.
  std::vector<double> fold_offset(static_cast<std::size_t>(opts.K), 0.0);
  for (int fold = 0; fold < opts.K; ++fold) {
    double a = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g)
      a += scores[static_cast<std::size_t>(fold)][g];
    fold_offset[static_cast<std::size_t>(fold)] = a / static_cast<double>(grid.size());
  }
  const double grand =
      std::accumulate(fold_offset.begin(), fold_offset.end(), 0.0) / opts.K;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double var = 0.0;
    for (int fold = 0; fold < opts.K; ++fold) {
      const double d = scores[static_cast<std::size_t>(fold)][g] -
                       fold_offset[static_cast<std::size_t>(fold)] + grand -
                       cv.mean_score[g];
      var += d * d;
    }
    var /= (opts.K - 1);
    cv.se[g] = std::sqrt(var / opts.K);
  }
  cv.chosen_lambda = one_se_select(cv.lambdas, cv.mean_score, cv.se);

  // Same warm-started walk on the full data, stopping at the chosen lambda.
  const JointLCAModel full_init = initialize(ccset_full, p0);
  JointLCAModel full_model = full_init;
  for (std::size_t g = grid.size(); g-- > 0;) {
    auto [m, tr] =
        fit_penalized(ccset_full, grid[g], p0, opts.solver, g == 0 ? full_init : full_model);
    full_model = std::move(m);
    if (grid[g] == cv.chosen_lambda) break;
  }
  const Eigen::Index r_hat = estimated_rank(full_model);
  cv.chosen_rank = r_hat;

  SelectRankResult result;
  result.rank = r_hat;
  result.cv = cv;
  if (r_hat > 0) {
    auto [refit_model, refit_trace] = refit(ccset_full, r_hat, full_model, opts.solver);
    result.model = std::move(refit_model);
  } else {
    // explicit zero-rank marker: empty loadings, r == 0
    result.model.r = 0;
    result.model.lambda = cv.chosen_lambda;
    for (Eigen::Index i = 0; i < ccset_full.view_count(); ++i) {
      result.model.loadings.emplace_back(ccset_full.dims()[static_cast<std::size_t>(i)], 0);
      result.model.scales.emplace_back(0);
    }
  }
  return result;
}

std::string cv_result_to_json(const CvResult& cv) {
  nlohmann::json doc;
  doc["lambdas"] = cv.lambdas;
  doc["mean_score"] = cv.mean_score;
  doc["se"] = cv.se;
  doc["chosen_lambda"] = cv.chosen_lambda;
  doc["chosen_rank"] = cv.chosen_rank;
  return doc.dump(2);
}

} // namespace jointlca
