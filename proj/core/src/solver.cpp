#include "jointlca/solver.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace jointlca {

namespace {

// Flip signs so the largest-|entry| of each left vector is positive.
void fix_signs(Eigen::MatrixXd& U, Eigen::MatrixXd* V) {
  for (Eigen::Index c = 0; c < U.cols(); ++c) {
    Eigen::Index imax = 0;
    U.col(c).cwiseAbs().maxCoeff(&imax);
    if (U(imax, c) < 0.0) {
      U.col(c) = -U.col(c);
      if (V) V->col(c) = -V->col(c);
    }
  }
}

// Orthonormal polar factor of M via SVD, with the deterministic sign fix.
Eigen::MatrixXd polar_orthonormal(const Eigen::MatrixXd& M) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::MatrixXd u = svd.matrixU();
  Eigen::MatrixXd v = svd.matrixV();
  fix_signs(u, &v);
  return u * v.transpose();
}

Eigen::Index pair_linear_index(Eigen::Index i, Eigen::Index j, Eigen::Index I) {
  if (i > j) std::swap(i, j);
  return i * I - i * (i + 1) / 2 + (j - i - 1);
}

// Objective share of component k: weighted squared loss on the rotated
// diagonals plus the group penalty term.
double component_contribution(const JointLCAModel& model, const Eigen::VectorXd& sd_k,
                              const std::vector<double>& weights, double lambda,
                              Eigen::Index k) {
  const Eigen::Index I = model.view_count();
  double fid = 0.0, pen = 0.0;
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < I; ++i)
    for (Eigen::Index j = i + 1; j < I; ++j, ++idx) {
      const double w = weights[static_cast<std::size_t>(idx)];
      const double s = model.sigma(i, j, k);
      const double e = sd_k(idx) - s;
      fid += w * e * e;
      pen += w * s * s;
    }
  return fid + lambda * std::sqrt(pen);
}

std::vector<Eigen::MatrixXd> reconstruct_all(const JointLCAModel& model,
                                             const CrossCovarianceSet& ccset) {
  std::vector<Eigen::MatrixXd> recon;
  recon.reserve(static_cast<std::size_t>(ccset.pair_count()));
  for (Eigen::Index idx = 0; idx < ccset.pair_count(); ++idx) {
    auto [i, j] = ccset.pair_views(idx);
    recon.push_back(reconstruct_pair(model, i, j));
  }
  return recon;
}

// Equal-diagonal least squares fit from the rotated diagonals, clamped at 0.
Eigen::VectorXd init_diagonal(const Eigen::MatrixXd& sd, Eigen::Index npairs) {
  Eigen::VectorXd d(sd.cols());
  for (Eigen::Index k = 0; k < sd.cols(); ++k) {
    double acc = 0.0;
    for (Eigen::Index idx = 0; idx < sd.rows(); ++idx) acc += std::max(sd(idx, k), 0.0);
    d(k) = std::sqrt(acc / static_cast<double>(npairs));
  }
  return d;
}

// Flip loading-column signs (views 1..I-1, relative to view 0) so the
// rotated diagonal of pair (0,i) is nonnegative for the given components.
// Left singular vectors are sign-ambiguous; without this the clamped
// diagonal init can zero a component and the zero is absorbing.
void align_component_signs(JointLCAModel& model, const CrossCovarianceSet& ccset,
                           const std::vector<Eigen::Index>& components) {
  const Eigen::Index I = model.view_count();
  for (Eigen::Index i = 1; i < I; ++i) {
    const Eigen::MatrixXd t = ccset.pair(0, i) * model.loadings[i];
    for (Eigen::Index k : components) {
      const double diag = model.loadings[0].col(k).dot(t.col(k));
      if (diag < 0.0) model.loadings[i].col(k) = -model.loadings[i].col(k);
    }
  }
}

} // namespace

Eigen::MatrixXd orthogonal_procrustes(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  if (A.cols() != B.cols())
    throw ValidationError("orthogonal_procrustes: A and B must share column count");
  if (B.rows() > A.rows())
    throw ValidationError("orthogonal_procrustes: r must not exceed p");
  return polar_orthonormal(A * B.transpose());
}

Eigen::MatrixXd update_loading(Eigen::Index i, const CrossCovarianceSet& ccset,
                               const JointLCAModel& model) {
  const Eigen::Index I = model.view_count();
  if (I < 2) throw ValidationError("update_loading: need at least 2 views");
  if (i < 0 || i >= I) throw std::out_of_range("update_loading: view index out of range");
  const Eigen::Index p_i = model.loadings[i].rows();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(p_i, model.r);
  for (Eigen::Index j = 0; j < I; ++j) {
    if (j == i) continue;
    const double w = ccset.weight(std::min(i, j), std::max(i, j));
    if (i < j)
      M.noalias() += w * (ccset.pair(i, j) * model.loadings[j]) * model.scales[j].asDiagonal();
    else
      M.noalias() += w * (ccset.pair(j, i).transpose() * model.loadings[j]) *
                     model.scales[j].asDiagonal();
  }
  M = M * model.scales[i].asDiagonal();
  if (M.squaredNorm() == 0.0) return model.loadings[i]; // degenerate: keep current
  return polar_orthonormal(M);
}

Eigen::MatrixXd rotated_diag(const CrossCovarianceSet& ccset, const JointLCAModel& model) {
  const Eigen::Index npairs = ccset.pair_count();
  Eigen::MatrixXd sd(npairs, model.r);
  for (Eigen::Index idx = 0; idx < npairs; ++idx) {
    auto [i, j] = ccset.pair_views(idx);
    const Eigen::MatrixXd t = ccset.pair_at(idx) * model.loadings[j];
    sd.row(idx) = (model.loadings[i].array() * t.array()).colwise().sum();
  }
  return sd;
}

SigmaGroup update_sigma_group(Eigen::Index k, const Eigen::VectorXd& y,
                              const std::vector<double>& weights, double lambda) {
  if (lambda < 0.0) throw ValidationError("update_sigma_group: lambda must be nonnegative");
  SigmaGroup group;
  group.k = k;
  double norm2 = 0.0;
  for (Eigen::Index idx = 0; idx < y.size(); ++idx)
    norm2 += weights[static_cast<std::size_t>(idx)] * y(idx) * y(idx);
  const double norm = std::sqrt(norm2);
  if (norm <= lambda) {
    group.values = Eigen::VectorXd::Zero(y.size());
  } else {
    group.values = (1.0 - lambda / norm) * y;
  }
  return group;
}

double update_d_coordinate(Eigen::Index i, Eigen::Index k, const Eigen::VectorXd& sigma_hat,
                           const std::vector<Eigen::VectorXd>& d_current,
                           const std::vector<double>& weights, bool weighted,
                           Eigen::Index view_count) {
  double num = 0.0, den = 0.0;
  for (Eigen::Index j = 0; j < view_count; ++j) {
    if (j == i) continue;
    const Eigen::Index idx = pair_linear_index(i, j, view_count);
    const double w = weighted ? weights[static_cast<std::size_t>(idx)] : 1.0;
    const double dj = d_current[static_cast<std::size_t>(j)](k);
    num += w * dj * sigma_hat(idx);
    den += w * dj * dj;
  }
  if (num > 0.0 && den != 0.0) return num / den;
  return 0.0;
}

JointLCAModel initialize(const CrossCovarianceSet& ccset, Eigen::Index p0) {
  const Eigen::Index I = ccset.view_count();
  const auto& dims = ccset.dims();
  Eigen::Index pmin = dims[0];
  for (Eigen::Index p : dims) pmin = std::min(pmin, p);
  if (p0 < 1 || p0 > pmin)
    throw ValidationError("initialize: p0 must be in [1, min_i p_i] = [1, " +
                          std::to_string(pmin) + "], got " + std::to_string(p0));

  JointLCAModel model;
  model.r = p0;
  model.loadings.resize(static_cast<std::size_t>(I));
  model.scales.assign(static_cast<std::size_t>(I), Eigen::VectorXd::Zero(p0));

  for (Eigen::Index i = 0; i < I; ++i) {
    Eigen::Index m = 0;
    for (Eigen::Index j = 0; j < I; ++j)
      if (j != i) m += dims[j];
    Eigen::MatrixXd concat(dims[i], m);
    Eigen::Index col = 0;
    for (Eigen::Index j = 0; j < I; ++j) {
      if (j == i) continue;
      const double sw = std::sqrt(ccset.weight(std::min(i, j), std::max(i, j)));
      if (i < j)
        concat.middleCols(col, dims[j]) = sw * ccset.pair(i, j);
      else
        concat.middleCols(col, dims[j]) = sw * ccset.pair(j, i).transpose();
      col += dims[j];
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(concat, Eigen::ComputeThinU);
    Eigen::MatrixXd u = svd.matrixU().leftCols(p0);
    fix_signs(u, nullptr);
    model.loadings[i] = std::move(u);
  }

  std::vector<Eigen::Index> all(static_cast<std::size_t>(p0));
  for (Eigen::Index k = 0; k < p0; ++k) all[static_cast<std::size_t>(k)] = k;
  align_component_signs(model, ccset, all);

  const Eigen::MatrixXd sd = rotated_diag(ccset, model);
  const Eigen::VectorXd d = init_diagonal(sd, ccset.pair_count());
  for (Eigen::Index i = 0; i < I; ++i) model.scales[i] = d;
  return model;
}

std::pair<JointLCAModel, FitTrace> fit_penalized(const CrossCovarianceSet& ccset,
                                                 double lambda, Eigen::Index p0,
                                                 const SolverOptions& opts,
                                                 const std::optional<JointLCAModel>& init) {
  if (lambda < 0.0) throw ValidationError("fit_penalized: lambda must be nonnegative");
  if (opts.max_iters < 1 || !(opts.rel_tol > 0.0))
    throw ValidationError("fit_penalized: bad solver options");

  JointLCAModel model = init ? *init : initialize(ccset, p0);
  if (model.r != p0) throw ValidationError("fit_penalized: init rank does not match p0");
  const Eigen::Index I = ccset.view_count();
  const std::vector<double>& weights = ccset.weights();

  FitTrace trace;
  std::vector<Eigen::MatrixXd> recon_prev = reconstruct_all(model, ccset);
  std::vector<double> d_saved(static_cast<std::size_t>(I));

  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    // sigma/d phase (V fixed)
    const Eigen::MatrixXd sd = rotated_diag(ccset, model);
    for (Eigen::Index k = 0; k < model.r; ++k) {
      const Eigen::VectorXd sd_k = sd.col(k);
      const SigmaGroup group = update_sigma_group(k, sd_k, weights, lambda);
      const double before = component_contribution(model, sd_k, weights, lambda, k);
      for (Eigen::Index i = 0; i < I; ++i)
        d_saved[static_cast<std::size_t>(i)] = model.scales[i](k);
      for (int pass = 0; pass < opts.d_inner_iters; ++pass) {
        double max_change = 0.0;
        for (Eigen::Index i = 0; i < I; ++i) {
          const double nd = update_d_coordinate(i, k, group.values, model.scales, weights,
                                                /*weighted=*/false, I);
          max_change = std::max(max_change, std::abs(nd - model.scales[i](k)));
          model.scales[i](k) = nd;
        }
        if (max_change < 1e-10) break;
      }
      const double after = component_contribution(model, sd_k, weights, lambda, k);
      if (after > before) { // guard: keep the previous diagonals for this component
        for (Eigen::Index i = 0; i < I; ++i)
          model.scales[i](k) = d_saved[static_cast<std::size_t>(i)];
      }
    }

    // loading phase
    for (Eigen::Index i = 0; i < I; ++i)
      model.loadings[i] = update_loading(i, ccset, model);

    trace.objective_values.push_back(objective(model, ccset, lambda));
    trace.iterations_used = iter;

    double num = 0.0, den = 0.0;
    for (Eigen::Index idx = 0; idx < ccset.pair_count(); ++idx) {
      auto [i, j] = ccset.pair_views(idx);
      Eigen::MatrixXd r_new = reconstruct_pair(model, i, j);
      num += ccset.weight_at(idx) * (r_new - recon_prev[static_cast<std::size_t>(idx)]).squaredNorm();
      den += ccset.weight_at(idx) * r_new.squaredNorm();
      recon_prev[static_cast<std::size_t>(idx)] = std::move(r_new);
    }
    if (num / (den + 1e-12) < opts.rel_tol) {
      trace.converged = true;
      break;
    }
  }

  model.lambda = lambda;
  sort_components(model, weights);
  return {std::move(model), std::move(trace)};
}

std::pair<JointLCAModel, FitTrace> refit(const CrossCovarianceSet& ccset, Eigen::Index r,
                                         const JointLCAModel& init, const SolverOptions& opts) {
  if (r < 1 || r > init.r)
    throw ValidationError("refit: r must be in [1, p0]");
  const Eigen::Index I = ccset.view_count();
  const std::vector<double>& weights = ccset.weights();

  JointLCAModel sorted = init;
  sort_components(sorted, weights);
  JointLCAModel model = truncate_components(sorted, r);
  model.lambda = 0.0;

  // Components whose scales were fully shrunk carry no usable diagonal;
  // re-seed them from the rotated-diagonal average.
  {
    std::vector<Eigen::Index> dead;
    for (Eigen::Index k = 0; k < r; ++k) {
      bool all_zero = true;
      for (Eigen::Index i = 0; i < I; ++i)
        if (model.scales[i](k) != 0.0) all_zero = false;
      if (all_zero) dead.push_back(k);
    }
    if (!dead.empty()) {
      align_component_signs(model, ccset, dead);
      const Eigen::MatrixXd sd = rotated_diag(ccset, model);
      const Eigen::VectorXd d0 = init_diagonal(sd, ccset.pair_count());
      for (Eigen::Index k : dead)
        for (Eigen::Index i = 0; i < I; ++i) model.scales[i](k) = d0(k);
    }
  }

  FitTrace trace;
  std::vector<Eigen::MatrixXd> recon_prev = reconstruct_all(model, ccset);

  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    for (Eigen::Index i = 0; i < I; ++i)
      model.loadings[i] = update_loading(i, ccset, model);

    const Eigen::MatrixXd sd = rotated_diag(ccset, model);
    for (int pass = 0; pass < opts.d_inner_iters; ++pass) {
      double max_change = 0.0;
      for (Eigen::Index k = 0; k < r; ++k) {
        for (Eigen::Index i = 0; i < I; ++i) {
          const double nd = update_d_coordinate(i, k, sd.col(k), model.scales, weights,
                                                /*weighted=*/true, I);
          max_change = std::max(max_change, std::abs(nd - model.scales[i](k)));
          model.scales[i](k) = nd;
        }
      }
      if (max_change < 1e-10) break;
    }

    trace.objective_values.push_back(fidelity(model, ccset));
    trace.iterations_used = iter;

    double num = 0.0, den = 0.0;
    for (Eigen::Index idx = 0; idx < ccset.pair_count(); ++idx) {
      auto [i, j] = ccset.pair_views(idx);
      Eigen::MatrixXd r_new = reconstruct_pair(model, i, j);
      num += ccset.weight_at(idx) * (r_new - recon_prev[static_cast<std::size_t>(idx)]).squaredNorm();
      den += ccset.weight_at(idx) * r_new.squaredNorm();
      recon_prev[static_cast<std::size_t>(idx)] = std::move(r_new);
    }
    if (num / (den + 1e-12) < opts.rel_tol) {
      trace.converged = true;
      break;
    }
  }

  sort_components(model, weights);
  return {std::move(model), std::move(trace)};
}

} // namespace jointlca
