#include "smsl/prox.hpp"

#include <algorithm>
#include <cmath>

namespace smsl::prox {

namespace {

void require_same_shape(const Matrix& u, const Matrix& v, const char* what) {
  if (u.rows() != v.rows() || u.cols() != v.cols())
    throw ConfigError(std::string(what) + ": shape mismatch");
}

}  // namespace

double soft_threshold(double x, double tau) {
  return std::max(x - tau, 0.0) + std::min(x + tau, 0.0);
}

Matrix svt(const Matrix& m, double tau) {
  if (tau < 0.0) throw ConfigError("svt: threshold must be nonnegative");
  if (!m.allFinite()) throw DataError("svt: input contains non-finite values");
  if (m.size() == 0) return m;
  // Every singular value is bounded by the Frobenius norm.
  if (m.norm() <= tau) return Matrix::Zero(m.rows(), m.cols());

  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw DataError("svt: SVD did not converge");
  const Vector& sigma = svd.singularValues();
  const double floor = 1e-12 * sigma(0);
  Vector shrunk(sigma.size());
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    shrunk(i) = sigma(i) < floor ? 0.0 : soft_threshold(sigma(i), tau);
    if (shrunk(i) > 0.0) rank = i + 1;
  }
  if (rank == 0) return Matrix::Zero(m.rows(), m.cols());
  return svd.matrixU().leftCols(rank) * shrunk.head(rank).asDiagonal() *
         svd.matrixV().leftCols(rank).transpose();
}

Matrix l21_shrink(const Matrix& q, double threshold) {
  if (!(threshold > 0.0)) throw ConfigError("l21_shrink: threshold must be positive");
  Matrix w(q.rows(), q.cols());
  for (Eigen::Index i = 0; i < q.cols(); ++i) {
    const double norm = q.col(i).norm();
    if (norm > threshold) {
      w.col(i) = ((norm - threshold) / norm) * q.col(i);
    } else {
      w.col(i).setZero();
    }
  }
  return w;
}

double exclusivity(const Matrix& u, const Matrix& v) {
  require_same_shape(u, v, "exclusivity");
  return u.cwiseProduct(v).cwiseAbs().sum();
}

Matrix exclusivity_grad(const Matrix& u, const Matrix& v) {
  require_same_shape(u, v, "exclusivity_grad");
  // Eigen's sign() maps 0 to 0.
  return u.cwiseAbs().cwiseProduct(v.cwiseSign());
}

}  // namespace smsl::prox
