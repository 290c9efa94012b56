#pragma once

#include "smsl/common.hpp"

namespace smsl::prox {

/// max(x - tau, 0) + min(x + tau, 0).
double soft_threshold(double x, double tau);

/// Singular value thresholding: the minimizer of tau*||J||_* + 0.5*||J - m||_F^2.
/// Singular values below 1e-12 * sigma_max are treated as zero.
Matrix svt(const Matrix& m, double tau);

/// Column-wise l2,1 shrinkage: the minimizer of threshold*||W||_{2,1} + 0.5*||W - q||_F^2.
Matrix l21_shrink(const Matrix& q, double threshold);

/// Relaxed exclusivity ||u .* v||_1.
double exclusivity(const Matrix& u, const Matrix& v);

/// Gradient of exclusivity(u, v) with respect to v: |u| .* sign(v), sign(0) = 0.
Matrix exclusivity_grad(const Matrix& u, const Matrix& v);

}  // namespace smsl::prox
