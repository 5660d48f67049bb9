#include "jointlca/simulation.hpp"

#include <Eigen/QR>
#include <cmath>

#include <json.hpp>

namespace jointlca {

void SimConfig::validate() const {
  if (dims.size() < 2) throw ValidationError("simulation needs at least 2 views");
  if (n < 2) throw ValidationError("simulation needs n >= 2");
  if (r0 < 1) throw ValidationError("joint rank r0 must be >= 1");
  if (r_indiv < 0) throw ValidationError("individual rank must be >= 0");
  Eigen::Index pmin = dims[0];
  for (Eigen::Index p : dims) {
    if (p < 1) throw ValidationError("view dimensions must be positive");
    pmin = std::min(pmin, p);
  }
  if (r0 + r_indiv > std::min(n, pmin))
    throw ValidationError("r0 + r_indiv = " + std::to_string(r0 + r_indiv) +
                          " exceeds min(n, min p_i) = " +
                          std::to_string(std::min(n, pmin)));
  // centering removes one dimension from the score space
  if (r0 + static_cast<Eigen::Index>(dims.size()) * r_indiv > n - 1)
    throw ValidationError("not enough samples for the requested score ranks");
}

namespace {

// Thin QR with the R-diagonal sign fix for a deterministic basis.
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& m) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
  const Eigen::MatrixXd r = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    if (r(c, c) < 0.0) q.col(c) = -q.col(c);
  return q;
}

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.normal();
  return m;
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json out;
  out["rows"] = m.rows();
  out["cols"] = m.cols();
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  out["values"] = std::move(flat);
  return out;
}

} // namespace

Eigen::MatrixXd orthonormal_centered(Eigen::Index nrows, Eigen::Index ncols, Rng& rng) {
  if (ncols > nrows - 1)
    throw ValidationError("orthonormal_centered: need ncols <= nrows - 1, got " +
                          std::to_string(ncols) + " x " + std::to_string(nrows));
  Eigen::MatrixXd g = gaussian_matrix(nrows, ncols, rng);
  g.rowwise() -= g.colwise().mean();
  return orthonormalize(g);
}

Eigen::VectorXd sample_diagonals(SimCase sim_case, DiagonalRole role, Eigen::Index count,
                                 Rng& rng) {
  if (count < 1) throw ValidationError("sample_diagonals: count must be >= 1");
  double lo = 0.0, hi = 1.0;
  if (sim_case == SimCase::II) {
    if (role == DiagonalRole::Joint) {
      lo = 0.5 * std::sqrt(5.0);
      hi = std::sqrt(5.0);
    } else {
      lo = 0.5;
      hi = 1.0;
    }
  }
  Eigen::VectorXd d(count);
  for (Eigen::Index k = 0; k < count; ++k) d(k) = rng.uniform(lo, hi);
  return d;
}

double noise_sd(const std::vector<Eigen::MatrixXd>& signals, Eigen::Index n,
                const std::vector<Eigen::Index>& dims) {
  double total = 0.0;
  for (const auto& z : signals) total += z.squaredNorm();
  if (total == 0.0) throw ValidationError("noise_sd: all signal matrices are zero");
  Eigen::Index psum = 0;
  for (Eigen::Index p : dims) psum += p;
  return std::sqrt(total / (static_cast<double>(n) * static_cast<double>(psum)));
}

std::pair<MultiviewDataset, SimGroundTruth> generate(const SimConfig& config,
                                                     const SimHooks& hooks) {
  config.validate();
  Rng rng(config.seed);
  const Eigen::Index I = config.view_count();

  SimGroundTruth truth;
  truth.shared_scores = orthonormal_centered(config.n, config.r0, rng);

  // Accumulated basis for the orthogonalization hook.
  Eigen::MatrixXd basis = truth.shared_scores;

  for (Eigen::Index i = 0; i < I; ++i) {
    truth.loadings.push_back(orthonormal_centered(config.dims[i], config.r0, rng));
    truth.scales.push_back(sample_diagonals(config.sim_case, DiagonalRole::Joint,
                                            config.r0, rng));
    if (config.r_indiv > 0) {
      Eigen::MatrixXd u0 = orthonormal_centered(config.n, config.r_indiv, rng);
      if (hooks.orthogonalize_individual) {
        u0 -= basis * (basis.transpose() * u0);
        u0 = orthonormalize(u0);
        Eigen::MatrixXd grown(config.n, basis.cols() + u0.cols());
        grown << basis, u0;
        basis = std::move(grown);
      }
      truth.indiv_scores.push_back(std::move(u0));
      truth.indiv_loadings.push_back(
          orthonormal_centered(config.dims[i], config.r_indiv, rng));
      truth.indiv_scales.push_back(sample_diagonals(config.sim_case, DiagonalRole::Individual,
                                                    config.r_indiv, rng));
    } else {
      truth.indiv_scores.emplace_back(config.n, 0);
      truth.indiv_loadings.emplace_back(config.dims[i], 0);
      truth.indiv_scales.emplace_back(0);
    }
  }

  for (Eigen::Index i = 0; i < I; ++i) {
    Eigen::MatrixXd z = truth.shared_scores *
                        (truth.loadings[i] * truth.scales[i].asDiagonal()).transpose();
    if (config.r_indiv > 0)
      z += truth.indiv_scores[i] *
           (truth.indiv_loadings[i] * truth.indiv_scales[i].asDiagonal()).transpose();
    truth.signals.push_back(std::move(z));
  }

  truth.noise_sd = hooks.zero_noise ? 0.0 : noise_sd(truth.signals, config.n, config.dims);

  MultiviewDataset dataset;
  dataset.n = config.n;
  for (Eigen::Index i = 0; i < I; ++i) {
    ViewMatrix view;
    view.view_id = static_cast<int>(i);
    view.values = truth.signals[static_cast<std::size_t>(i)];
    if (truth.noise_sd > 0.0)
      view.values += truth.noise_sd * gaussian_matrix(config.n, config.dims[i], rng);
    dataset.views.push_back(std::move(view));
  }
  return {std::move(dataset), std::move(truth)};
}

std::string ground_truth_to_json(const SimGroundTruth& truth) {
  nlohmann::json doc;
  doc["noise_sd"] = truth.noise_sd;
  doc["shared_scores"] = matrix_json(truth.shared_scores);
  doc["views"] = nlohmann::json::array();
  for (std::size_t i = 0; i < truth.loadings.size(); ++i) {
    nlohmann::json v;
    v["loading"] = matrix_json(truth.loadings[i]);
    v["scale"] = std::vector<double>(truth.scales[i].data(),
                                     truth.scales[i].data() + truth.scales[i].size());
    v["indiv_scores"] = matrix_json(truth.indiv_scores[i]);
    v["indiv_loading"] = matrix_json(truth.indiv_loadings[i]);
    v["indiv_scale"] =
        std::vector<double>(truth.indiv_scales[i].data(),
                            truth.indiv_scales[i].data() + truth.indiv_scales[i].size());
    doc["views"].push_back(std::move(v));
  }
  return doc.dump(2);
}

} // namespace jointlca
