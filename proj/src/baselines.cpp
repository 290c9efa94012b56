#include "smsl/baselines.hpp"

#include <algorithm>

namespace smsl::baselines {

namespace {

void require_pair(const ViewSet& views) {
  if (views.size() != 2) throw ConfigError("classical baselines take exactly two views");
}

Eigen::LLT<Matrix> factor(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success)
    throw DataError("covariance is singular or indefinite; raise the ridge (--ridge)");
  return llt;
}

// Symmetric power cov^p via eigendecomposition, eigenvalues clamped at `floor`.
Matrix sym_power(const Matrix& cov, double p, double floor) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw DataError("eigendecomposition failed");
  if (!(floor > 0.0) && eig.eigenvalues().minCoeff() <= 0.0)
    throw DataError("covariance is singular; raise the ridge (--ridge)");
  const Vector vals = eig.eigenvalues().cwiseMax(floor).array().pow(p);
  return eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
}

DetectionMap residual_scores(const Matrix& target, const Matrix& predicted, const ViewSet& views) {
  const Vector s = (target - predicted).colwise().squaredNorm().transpose();
  return make_detection_map(s, views.height(), views.width());
}

}  // namespace

double default_ridge(const Matrix& cov) {
  return cov.rows() == 0 ? 0.0 : 1e-6 * cov.trace() / static_cast<double>(cov.rows());
}

CovModel CovModel::fit(const Matrix& x, std::optional<double> ridge) {
  CovModel m;
  m.mean = x.rowwise().mean();
  const Matrix centered = x.colwise() - m.mean;
  m.cov = centered * centered.transpose() / static_cast<double>(x.cols());
  m.ridge = ridge.value_or(default_ridge(m.cov));
  if (!(m.ridge >= 0.0)) throw ConfigError("ridge must be nonnegative");
  return m;
}

Matrix CovModel::regularized() const {
  Matrix r = cov;
  r.diagonal().array() += ridge;
  return r;
}

DetectionMap rx_difference(const ViewSet& views, Ridge ridge) {
  require_pair(views);
  const auto x = views.flattened();
  const Matrix diff = x[1] - x[0];
  const auto model = CovModel::fit(diff, ridge);
  const Matrix centered = diff.colwise() - model.mean;
  const Matrix whitened = factor(model.regularized()).matrixL().solve(centered);
  const Vector s = whitened.colwise().squaredNorm().transpose();
  return make_detection_map(s, views.height(), views.width());
}

DetectionMap chronochrome(const ViewSet& views, Ridge ridge) {
  require_pair(views);
  const auto x = views.flattened();
  const auto m1 = CovModel::fit(x[0], ridge);
  const Vector mean2 = x[1].rowwise().mean();
  const Matrix c1 = x[0].colwise() - m1.mean;
  const Matrix c2 = x[1].colwise() - mean2;
  const Matrix cross = c2 * c1.transpose() / static_cast<double>(x[0].cols());  // Sigma_21
  // Sigma_21 (Sigma_11 + ridge I)^{-1}, via the symmetric solve of the transpose.
  const Matrix gain = factor(m1.regularized()).solve(cross.transpose()).transpose();
  const Matrix predicted = (gain * c1).colwise() + mean2;
  return residual_scores(x[1], predicted, views);
}

DetectionMap covariance_equalization(const ViewSet& views, Ridge ridge) {
  require_pair(views);
  const auto x = views.flattened();
  const auto m1 = CovModel::fit(x[0], ridge);
  const auto m2 = CovModel::fit(x[1], ridge);
  const Matrix whiten = sym_power(m1.regularized(), -0.5, m1.ridge);
  const Matrix dewhiten = sym_power(m2.regularized(), 0.5, m2.ridge);
  const Matrix predicted = ((dewhiten * whiten) * (x[0].colwise() - m1.mean)).colwise() + m2.mean;
  return residual_scores(x[1], predicted, views);
}

DetectionMap run(const std::string& method, const ViewSet& views, Ridge ridge) {
  if (method == "rx") return rx_difference(views, ridge);
  if (method == "cc") return chronochrome(views, ridge);
  if (method == "ce") return covariance_equalization(views, ridge);
  throw ConfigError("unknown baseline method '" + method + "' (expected rx|cc|ce)");
}

}  // namespace smsl::baselines
