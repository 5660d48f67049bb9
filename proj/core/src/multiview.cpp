#include "jointlca/multiview.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace jointlca {

void MultiviewDataset::validate() const {
  if (views.size() < 2)
    throw ValidationError("dataset must contain at least 2 views, got " +
                          std::to_string(views.size()));
  for (std::size_t i = 0; i < views.size(); ++i) {
    const auto& v = views[i];
    if (v.view_id != static_cast<int>(i))
      throw ValidationError("view ids must be 0..I-1 in order; view at position " +
                            std::to_string(i) + " has id " + std::to_string(v.view_id));
    if (v.values.rows() != n)
      throw ValidationError("view " + std::to_string(i) + " has " +
                            std::to_string(v.values.rows()) + " rows, expected " +
                            std::to_string(n));
    if (v.values.cols() < 1)
      throw ValidationError("view " + std::to_string(i) + " has no columns");
    if (!v.values.allFinite())
      throw ValidationError("view " + std::to_string(i) + " contains non-finite entries");
  }
  if (n < 2) throw ValidationError("need at least 2 samples");
}

CrossCovarianceSet::CrossCovarianceSet(std::vector<Eigen::Index> dims,
                                       std::vector<Eigen::MatrixXd> pairs,
                                       std::vector<double> weights)
    : dims_(std::move(dims)), pairs_(std::move(pairs)), weights_(std::move(weights)) {
  const Eigen::Index I = view_count();
  const std::size_t expected = static_cast<std::size_t>(I * (I - 1) / 2);
  if (pairs_.size() != expected)
    throw ValidationError("expected " + std::to_string(expected) + " pairs, got " +
                          std::to_string(pairs_.size()));
  if (weights_.size() != expected)
    throw ValidationError("weights size mismatch");
  for (Eigen::Index idx = 0; idx < pair_count(); ++idx) {
    auto [i, j] = pair_views(idx);
    if (pairs_[idx].rows() != dims_[i] || pairs_[idx].cols() != dims_[j])
      throw ValidationError("pair (" + std::to_string(i) + "," + std::to_string(j) +
                            ") has wrong shape");
    if (!(weights_[idx] > 0.0) || !std::isfinite(weights_[idx]))
      throw ValidationError("weight for pair (" + std::to_string(i) + "," +
                            std::to_string(j) + ") must be positive and finite");
  }
}

Eigen::Index CrossCovarianceSet::pair_index(Eigen::Index i, Eigen::Index j) const {
  const Eigen::Index I = view_count();
  if (i < 0 || j <= i || j >= I)
    throw std::out_of_range("bad pair (" + std::to_string(i) + "," + std::to_string(j) + ")");
  // lexicographic: pairs before row i, then offset within row i
  return i * I - i * (i + 1) / 2 + (j - i - 1);
}

std::pair<Eigen::Index, Eigen::Index> CrossCovarianceSet::pair_views(Eigen::Index idx) const {
  const Eigen::Index I = view_count();
  Eigen::Index i = 0, base = 0;
  while (base + (I - 1 - i) <= idx) {
    base += I - 1 - i;
    ++i;
  }
  return {i, i + 1 + (idx - base)};
}

void CrossCovarianceSet::set_weights(std::vector<double> w) {
  if (w.size() != weights_.size()) throw ValidationError("weights size mismatch");
  weights_ = std::move(w);
}

namespace {

double parse_cell(const std::string& cell, std::size_t line_no, std::size_t col_no,
                  const std::string& path) {
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (*(last - 1) == ' ' || *(last - 1) == '\t' || *(last - 1) == '\r'))
    --last;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw ValidationError(path + ": non-numeric cell at line " + std::to_string(line_no) +
                          ", column " + std::to_string(col_no));
  return value;
}

} // namespace

ViewMatrix load_view_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t ncols = 0;
  bool skipped_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (options.has_header && !skipped_header) {
      skipped_header = true;
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col_no = 0;
    while (std::getline(ss, cell, options.delimiter)) {
      ++col_no;
      row.push_back(parse_cell(cell, line_no, col_no, path));
    }
    if (rows.empty()) {
      ncols = row.size();
    } else if (row.size() != ncols) {
      throw ValidationError(path + ": ragged row at line " + std::to_string(line_no) +
                            " (got " + std::to_string(row.size()) + " cells, expected " +
                            std::to_string(ncols) + ")");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError(path + ": empty file");

  ViewMatrix view;
  view.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ncols));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < ncols; ++c)
      view.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return view;
}

void write_view_csv(const Eigen::MatrixXd& values, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write file: " + path);
  char buf[40];
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", values(r, c));
      if (c) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

ViewMatrix center_columns(const ViewMatrix& view) {
  ViewMatrix out = view;
  out.values.rowwise() -= view.values.colwise().mean();
  return out;
}

CrossCovarianceSet cross_covariances(const MultiviewDataset& dataset,
                                     Normalization normalization) {
  dataset.validate();
  const Eigen::Index I = dataset.view_count();
  double c = 1.0;
  switch (normalization) {
    case Normalization::None: c = 1.0; break;
    case Normalization::ByN: c = 1.0 / static_cast<double>(dataset.n); break;
    case Normalization::ByNMinus1: c = 1.0 / static_cast<double>(dataset.n - 1); break;
  }

  std::vector<Eigen::Index> dims(I);
  for (Eigen::Index i = 0; i < I; ++i) dims[i] = dataset.views[i].values.cols();

  std::vector<Eigen::MatrixXd> pairs;
  std::vector<double> weights;
  pairs.reserve(static_cast<std::size_t>(I * (I - 1) / 2));
  for (Eigen::Index i = 0; i < I; ++i) {
    for (Eigen::Index j = i + 1; j < I; ++j) {
      Eigen::MatrixXd s = c * (dataset.views[i].values.transpose() * dataset.views[j].values);
      const double fn2 = s.squaredNorm();
      if (fn2 == 0.0)
        throw ValidationError("degenerate pair (" + std::to_string(i) + "," +
                              std::to_string(j) + "): cross-covariance has zero norm");
      pairs.push_back(std::move(s));
      weights.push_back(1.0 / fn2);
    }
  }
  return CrossCovarianceSet(std::move(dims), std::move(pairs), std::move(weights));
}

std::vector<double> fidelity_weights(const CrossCovarianceSet& ccset) {
  std::vector<double> w(static_cast<std::size_t>(ccset.pair_count()));
  for (Eigen::Index idx = 0; idx < ccset.pair_count(); ++idx) {
    const double fn2 = ccset.pair_at(idx).squaredNorm();
    if (fn2 == 0.0) {
      auto [i, j] = ccset.pair_views(idx);
      throw ValidationError("degenerate pair (" + std::to_string(i) + "," +
                            std::to_string(j) + "): zero Frobenius norm");
    }
    w[static_cast<std::size_t>(idx)] = 1.0 / fn2;
  }
  return w;
}

} // namespace jointlca
