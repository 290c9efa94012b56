#pragma once

#include "smsl/common.hpp"
#include "smsl/cube.hpp"

#include <optional>
#include <string>

namespace smsl::baselines {

/// Sample mean and 1/N covariance of the columns of a data matrix.
struct CovModel {
  Vector mean;
  Matrix cov;
  double ridge = 0.0;

  static CovModel fit(const Matrix& x, std::optional<double> ridge = std::nullopt);
  /// cov + ridge * I.
  Matrix regularized() const;
};

/// 1e-6 * trace(cov) / L.
double default_ridge(const Matrix& cov);

/// Ridge handling shared by all baselines: nullopt selects default_ridge.
using Ridge = std::optional<double>;

DetectionMap rx_difference(const ViewSet& views, Ridge ridge = std::nullopt);
DetectionMap chronochrome(const ViewSet& views, Ridge ridge = std::nullopt);
DetectionMap covariance_equalization(const ViewSet& views, Ridge ridge = std::nullopt);

/// Dispatch on "rx", "cc" or "ce"; throws ConfigError for anything else.
DetectionMap run(const std::string& method, const ViewSet& views, Ridge ridge = std::nullopt);

}  // namespace smsl::baselines
