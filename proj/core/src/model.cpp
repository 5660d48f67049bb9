#include "jointlca/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

namespace jointlca {

void JointLCAModel::validate() const {
  if (loadings.size() != scales.size())
    throw ValidationError("loadings/scales count mismatch");
  for (std::size_t i = 0; i < loadings.size(); ++i) {
    if (loadings[i].cols() != r)
      throw ValidationError("view " + std::to_string(i) + " loading has " +
                            std::to_string(loadings[i].cols()) + " columns, expected r=" +
                            std::to_string(r));
    if (scales[i].size() != r)
      throw ValidationError("view " + std::to_string(i) + " scale diagonal length mismatch");
    if ((scales[i].array() < 0.0).any())
      throw ValidationError("view " + std::to_string(i) + " has a negative scale entry");
    if (r > 0) {
      Eigen::MatrixXd g = loadings[i].transpose() * loadings[i];
      g.diagonal().array() -= 1.0;
      if (g.cwiseAbs().maxCoeff() > 1e-8)
        throw ValidationError("view " + std::to_string(i) + " loading is not orthonormal");
    }
  }
}

Eigen::MatrixXd reconstruct_pair(const JointLCAModel& model, Eigen::Index i, Eigen::Index j) {
  const Eigen::Index I = model.view_count();
  if (i < 0 || j <= i || j >= I)
    throw std::out_of_range("reconstruct_pair: bad pair (" + std::to_string(i) + "," +
                            std::to_string(j) + ")");
  const Eigen::VectorXd dd = model.scales[i].cwiseProduct(model.scales[j]);
  return model.loadings[i] * dd.asDiagonal() * model.loadings[j].transpose();
}

double fidelity(const JointLCAModel& model, const CrossCovarianceSet& ccset) {
  if (model.view_count() != ccset.view_count())
    throw ValidationError("fidelity: view count mismatch");
  double total = 0.0;
  for (Eigen::Index idx = 0; idx < ccset.pair_count(); ++idx) {
    auto [i, j] = ccset.pair_views(idx);
    if (model.loadings[i].rows() != ccset.pair_at(idx).rows() ||
        model.loadings[j].rows() != ccset.pair_at(idx).cols())
      throw ValidationError("fidelity: dimension mismatch at pair (" + std::to_string(i) +
                            "," + std::to_string(j) + ")");
    total += ccset.weight_at(idx) *
             (ccset.pair_at(idx) - reconstruct_pair(model, i, j)).squaredNorm();
  }
  return total;
}

double penalty_value(const JointLCAModel& model, const std::vector<double>& weights) {
  const Eigen::Index I = model.view_count();
  double total = 0.0;
  for (Eigen::Index k = 0; k < model.r; ++k) {
    double g = 0.0;
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < I; ++i)
      for (Eigen::Index j = i + 1; j < I; ++j, ++idx) {
        const double s = model.sigma(i, j, k);
        g += weights[static_cast<std::size_t>(idx)] * s * s;
      }
    total += std::sqrt(g);
  }
  return total;
}

double objective(const JointLCAModel& model, const CrossCovarianceSet& ccset, double lambda) {
  if (lambda < 0.0) throw ValidationError("objective: lambda must be nonnegative");
  return fidelity(model, ccset) + lambda * penalty_value(model, ccset.weights());
}

namespace {

Eigen::VectorXd group_norms_impl(const JointLCAModel& model, const std::vector<double>* weights) {
  const Eigen::Index I = model.view_count();
  Eigen::VectorXd norms = Eigen::VectorXd::Zero(model.r);
  for (Eigen::Index k = 0; k < model.r; ++k) {
    double g = 0.0;
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < I; ++i)
      for (Eigen::Index j = i + 1; j < I; ++j, ++idx) {
        const double s = model.sigma(i, j, k);
        const double w = weights ? (*weights)[static_cast<std::size_t>(idx)] : 1.0;
        g += w * s * s;
      }
    norms(k) = std::sqrt(g);
  }
  return norms;
}

} // namespace

Eigen::VectorXd group_norms(const JointLCAModel& model) {
  return group_norms_impl(model, nullptr);
}

Eigen::VectorXd weighted_group_norms(const JointLCAModel& model,
                                     const std::vector<double>& weights) {
  return group_norms_impl(model, &weights);
}

Eigen::Index estimated_rank(const JointLCAModel& model, double tol) {
  if (tol < 0.0) throw ValidationError("estimated_rank: tol must be nonnegative");
  const Eigen::VectorXd norms = group_norms(model);
  return (norms.array() > tol).count();
}

Eigen::Index estimated_rank(const JointLCAModel& model) {
  if (model.r == 0) return 0;
  const Eigen::VectorXd norms = group_norms(model);
  const double maxn = norms.maxCoeff();
  if (maxn == 0.0) return 0;
  return (norms.array() > 1e-8 * maxn).count();
}

void sort_components(JointLCAModel& model, const std::vector<double>& weights) {
  if (model.r <= 1) return;
  const Eigen::VectorXd norms = weighted_group_norms(model, weights);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(model.r));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return norms(a) > norms(b); });
  for (std::size_t i = 0; i < model.loadings.size(); ++i) {
    Eigen::MatrixXd v(model.loadings[i].rows(), model.r);
    Eigen::VectorXd d(model.r);
    for (Eigen::Index k = 0; k < model.r; ++k) {
      v.col(k) = model.loadings[i].col(order[static_cast<std::size_t>(k)]);
      d(k) = model.scales[i](order[static_cast<std::size_t>(k)]);
    }
    model.loadings[i] = std::move(v);
    model.scales[i] = std::move(d);
  }
}

JointLCAModel truncate_components(const JointLCAModel& model, Eigen::Index r) {
  if (r < 0 || r > model.r)
    throw ValidationError("truncate_components: r out of range");
  JointLCAModel out;
  out.r = r;
  out.lambda = model.lambda;
  out.loadings.reserve(model.loadings.size());
  out.scales.reserve(model.scales.size());
  for (std::size_t i = 0; i < model.loadings.size(); ++i) {
    out.loadings.push_back(model.loadings[i].leftCols(r));
    out.scales.push_back(model.scales[i].head(r));
  }
  return out;
}

std::string model_to_json(const JointLCAModel& model) {
  nlohmann::json doc;
  doc["r"] = model.r;
  doc["lambda"] = model.lambda;
  doc["views"] = nlohmann::json::array();
  for (std::size_t i = 0; i < model.loadings.size(); ++i) {
    nlohmann::json v;
    v["rows"] = model.loadings[i].rows();
    v["cols"] = model.loadings[i].cols();
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(model.loadings[i].size()));
    for (Eigen::Index rr = 0; rr < model.loadings[i].rows(); ++rr)
      for (Eigen::Index cc = 0; cc < model.loadings[i].cols(); ++cc)
        flat.push_back(model.loadings[i](rr, cc));
    v["loading"] = flat;
    v["scale"] = std::vector<double>(model.scales[i].data(),
                                     model.scales[i].data() + model.scales[i].size());
    doc["views"].push_back(std::move(v));
  }
  return doc.dump(2);
}

JointLCAModel model_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid model JSON: ") + e.what());
  }
  JointLCAModel model;
  try {
    model.r = doc.at("r").get<Eigen::Index>();
    model.lambda = doc.at("lambda").get<double>();
    for (const auto& v : doc.at("views")) {
      const auto rows = v.at("rows").get<Eigen::Index>();
      const auto cols = v.at("cols").get<Eigen::Index>();
      const auto flat = v.at("loading").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(flat.size()) != rows * cols)
        throw ValidationError("model JSON: loading size mismatch");
      Eigen::MatrixXd m(rows, cols);
      for (Eigen::Index rr = 0; rr < rows; ++rr)
        for (Eigen::Index cc = 0; cc < cols; ++cc)
          m(rr, cc) = flat[static_cast<std::size_t>(rr * cols + cc)];
      const auto scale = v.at("scale").get<std::vector<double>>();
      model.loadings.push_back(std::move(m));
      model.scales.push_back(Eigen::Map<const Eigen::VectorXd>(
          scale.data(), static_cast<Eigen::Index>(scale.size())));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid model JSON: ") + e.what());
  }
  model.validate();
  return model;
}

void save_model(const JointLCAModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << model_to_json(model) << '\n';
}

JointLCAModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return model_from_json(text);
}

} // namespace jointlca
