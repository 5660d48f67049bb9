#include "jointlca/oracles.hpp"

#include <cmath>

#include <json.hpp>

#include "jointlca/rng.hpp"

namespace jointlca {
namespace oracles {

namespace {

Eigen::VectorXd random_unit(Eigen::Index dim, Rng& rng) {
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = rng.normal();
  const double n = v.norm();
  return n > 0.0 ? Eigen::VectorXd(v / n) : Eigen::VectorXd::Unit(dim, 0);
}

void sign_normalize(Eigen::VectorXd& lead, Eigen::VectorXd& follow) {
  Eigen::Index imax = 0;
  lead.cwiseAbs().maxCoeff(&imax);
  if (lead(imax) < 0.0) {
    lead = -lead;
    follow = -follow;
  }
}

} // namespace

Rank1Cca diag_cca_r1_oracle(const Eigen::MatrixXd& s12) {
  if (s12.squaredNorm() == 0.0) throw ValidationError("diag_cca_r1_oracle: zero matrix");

  Rank1Cca best;
  Rng rng(0x0c0ffeeULL);
  for (int start = 0; start < 5; ++start) {
    Eigen::VectorXd v2 = random_unit(s12.cols(), rng);
    double prev = -1.0;
    for (int iter = 0; iter < 5000; ++iter) {
      Eigen::VectorXd w = s12.transpose() * (s12 * v2);
      const double n = w.norm();
      if (n == 0.0) break;
      v2 = w / n;
      const double value = (s12 * v2).norm();
      if (std::abs(value - prev) < 1e-15 * std::max(1.0, value)) break;
      prev = value;
    }
    Eigen::VectorXd u = s12 * v2;
    const double value = u.norm();
    if (value > best.value) {
      best.value = value;
      best.v1 = u / value;
      best.v2 = v2;
    }
  }
  sign_normalize(best.v1, best.v2);
  return best;
}

Rank1Ssqcov ssqcov_r1_oracle(const Eigen::MatrixXd& s12, const Eigen::MatrixXd& s13,
                             const Eigen::MatrixXd& s23, int restarts) {
  const Eigen::Index p1 = s12.rows(), p2 = s12.cols(), p3 = s13.cols();
  if (s13.rows() != p1 || s23.rows() != p2 || s23.cols() != p3)
    throw ValidationError("ssqcov_r1_oracle: inconsistent matrix shapes");
  if (p1 > 8 || p2 > 8 || p3 > 8)
    throw ValidationError("ssqcov_r1_oracle: dimensions capped at 8");

  auto value_at = [&](const Eigen::VectorXd& v1, const Eigen::VectorXd& v2,
                      const Eigen::VectorXd& v3) {
    const double c12 = v1.dot(s12 * v2);
    const double c13 = v1.dot(s13 * v3);
    const double c23 = v2.dot(s23 * v3);
    return c12 * c12 + c13 * c13 + c23 * c23;
  };
  // top eigenvector of a a^T + b b^T by power iteration
  auto top_dir = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                    const Eigen::VectorXd& fallback) {
    Eigen::VectorXd x = a + b;
    if (x.norm() < 1e-300) x = fallback;
    for (int it = 0; it < 200; ++it) {
      Eigen::VectorXd y = a * a.dot(x) + b * b.dot(x);
      const double n = y.norm();
      if (n < 1e-300) return fallback;
      x = y / n;
    }
    return x;
  };

  Rank1Ssqcov best;
  Rng rng(0x55c0cULL);
  for (int start = 0; start < restarts; ++start) {
    Eigen::VectorXd v1 = random_unit(p1, rng);
    Eigen::VectorXd v2 = random_unit(p2, rng);
    Eigen::VectorXd v3 = random_unit(p3, rng);
    double prev = -1.0;
    for (int iter = 0; iter < 500; ++iter) {
      v1 = top_dir(s12 * v2, s13 * v3, v1);
      v2 = top_dir(s12.transpose() * v1, s23 * v3, v2);
      v3 = top_dir(s13.transpose() * v1, s23.transpose() * v2, v3);
      const double value = value_at(v1, v2, v3);
      if (value - prev < 1e-14 * std::max(1.0, value)) break;
      prev = value;
    }
    const double value = value_at(v1, v2, v3);
    if (value > best.value) {
      best.value = value;
      best.v1 = v1;
      best.v2 = v2;
      best.v3 = v3;
    }
  }
  return best;
}

Eigen::VectorXd prox_oracle(const Eigen::VectorXd& y, double lambda) {
  if (lambda < 0.0) throw ValidationError("prox_oracle: lambda must be nonnegative");
  const double norm = y.norm();
  if (norm == 0.0) return Eigen::VectorXd::Zero(y.size());

  // f(t) = (1/2)(norm - t)^2 + lambda t. Direct evaluation of f near the
  // minimum drowns in cancellation, so compare points through the exact
  // pairwise difference f(t1) - f(t2) = (t1 - t2)(lambda - norm + (t1+t2)/2).
  auto f_diff = [&](double t1, double t2) {
    return (t1 - t2) * (lambda - norm + 0.5 * (t1 + t2));
  };
  double a = 0.0, b = norm;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  while (b - a > 1e-13 * std::max(1.0, norm)) {
    const double c = b - gr * (b - a);
    const double d = a + gr * (b - a);
    if (f_diff(c, d) < 0.0)
      b = d;
    else
      a = c;
  }
  double t = 0.5 * (a + b);
  if (f_diff(0.0, t) <= 0.0) t = 0.0; // boundary wins at the threshold
  return (t / norm) * y;
}

std::string reports_to_json(const std::vector<OracleReport>& reports) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& r : reports) {
    doc.push_back({{"name", r.name},
                   {"instance", r.instance},
                   {"oracle_value", r.oracle_value},
                   {"solver_value", r.solver_value},
                   {"discrepancy", r.discrepancy},
                   {"tolerance", r.tolerance},
                   {"pass", r.pass}});
  }
  return doc.dump(2);
}

} // namespace oracles
} // namespace jointlca
