#ifndef JOINTLCA_MULTIVIEW_HPP
#define JOINTLCA_MULTIVIEW_HPP

#include <Eigen/Core>
#include <string>
#include <vector>

#include "jointlca/errors.hpp"

namespace jointlca {

/// One data view: n samples (rows) by p_i features (columns).
struct ViewMatrix {
  Eigen::MatrixXd values;
  int view_id = 0;
};

/// Sample-aligned collection of views; every view has exactly n rows.
struct MultiviewDataset {
  std::vector<ViewMatrix> views;
  Eigen::Index n = 0;

  Eigen::Index view_count() const { return static_cast<Eigen::Index>(views.size()); }
  /// Throws ValidationError on row-count mismatch, I < 2, or bad view ids.
  void validate() const;
};

enum class Normalization { None, ByN, ByNMinus1 };

/// All pairwise cross-covariances S_ij (i<j) with fidelity weights
/// w_ij = 1 / ||S_ij||_F^2, stored flat in lexicographic pair order.
class CrossCovarianceSet {
public:
  CrossCovarianceSet() = default;
  CrossCovarianceSet(std::vector<Eigen::Index> dims,
                     std::vector<Eigen::MatrixXd> pairs,
                     std::vector<double> weights);

  Eigen::Index view_count() const { return static_cast<Eigen::Index>(dims_.size()); }
  Eigen::Index pair_count() const { return static_cast<Eigen::Index>(pairs_.size()); }
  const std::vector<Eigen::Index>& dims() const { return dims_; }

  /// Linear index of pair (i,j), i<j, in lexicographic order.
  Eigen::Index pair_index(Eigen::Index i, Eigen::Index j) const;
  const Eigen::MatrixXd& pair(Eigen::Index i, Eigen::Index j) const {
    return pairs_[pair_index(i, j)];
  }
  const Eigen::MatrixXd& pair_at(Eigen::Index idx) const { return pairs_[idx]; }
  double weight(Eigen::Index i, Eigen::Index j) const {
    return weights_[pair_index(i, j)];
  }
  double weight_at(Eigen::Index idx) const { return weights_[idx]; }
  const std::vector<double>& weights() const { return weights_; }
  void set_weights(std::vector<double> w);

  /// Enumerates (i,j) for a linear pair index.
  std::pair<Eigen::Index, Eigen::Index> pair_views(Eigen::Index idx) const;

private:
  std::vector<Eigen::Index> dims_;
  std::vector<Eigen::MatrixXd> pairs_;
  std::vector<double> weights_;
};

struct CsvOptions {
  char delimiter = ',';
  bool has_header = false;
};

/// Reads a rectangular numeric table; reports ragged rows and bad cells
/// with their row/column location.
ViewMatrix load_view_csv(const std::string& path, const CsvOptions& options = {});

void write_view_csv(const Eigen::MatrixXd& values, const std::string& path);

/// Subtracts each column mean. Idempotent.
ViewMatrix center_columns(const ViewMatrix& view);

/// S_ij = c * X_i^T X_j for every i<j; c depends on the normalization.
/// Columns are assumed already centered. Throws ValidationError when a
/// pair has zero Frobenius norm (weight undefined).
CrossCovarianceSet cross_covariances(const MultiviewDataset& dataset,
                                     Normalization normalization = Normalization::None);

/// w_ij = 1 / ||S_ij||_F^2 for every pair of the set.
std::vector<double> fidelity_weights(const CrossCovarianceSet& ccset);

} // namespace jointlca

#endif
