#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace smsl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Invalid parameters or usage. The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed, missing or inconsistent data. The CLI maps this to exit code 1.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown inside the optimizer.
class SolverError : public std::runtime_error {
 public:
  SolverError(int iteration, std::string variable, const std::string& what)
      : std::runtime_error(what), iteration_(iteration), variable_(std::move(variable)) {}

  int iteration() const { return iteration_; }
  const std::string& variable() const { return variable_; }

 private:
  int iteration_;
  std::string variable_;
};

}  // namespace smsl
