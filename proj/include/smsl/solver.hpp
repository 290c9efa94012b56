#pragma once

#include "smsl/common.hpp"
#include "smsl/cube.hpp"
#include "smsl/sketch.hpp"

#include <functional>
#include <iosfwd>
#include <vector>

namespace smsl {

/// Trade-off weights and ALM schedule. Defaults are the recommended settings
/// (lambda2 = lambda3 = 10, lambda1 in [1, 10]) and the standard ALM schedule.
struct SolverConfig {
  double lambda1 = 1.0;   // nuclear norm on the consistent coefficients C
  double lambda2 = 10.0;  // Frobenius penalty on each specific block D^s
  double lambda3 = 10.0;  // relaxed exclusivity between specific blocks
  double mu0 = 1e-5;
  double mu_max = 1e5;
  double rho = 1.1;
  int max_iter = 60;
  double epsilon = 1e-5;

  void validate() const;
};

/// The four constraint violations, each an infinity norm maximized over views.
struct Residuals {
  double reconstruction = 0.0;  // X^s - H(C + D^s) - E^s
  double error_split = 0.0;     // E^s - W^s
  double sum_to_one = 0.0;      // (C + D^s)^T 1 - 1
  double consensus = 0.0;       // C - J

  double max() const;
  bool below(double epsilon) const;
};

struct IterationRecord {
  int iteration = 0;  // 1-based
  Residuals residuals;
  double mu = 0.0;  // penalty used during this iteration
};

struct SolverState {
  Matrix c;                  // N_H x N
  Matrix j;                  // N_H x N
  std::vector<Matrix> d;     // S x (N_H x N)
  std::vector<Matrix> e;     // S x (L x N)
  std::vector<Matrix> w;     // S x (L x N)
  std::vector<Matrix> y1;    // S x (L x N)
  std::vector<RowVector> y2; // S x (1 x N)
  std::vector<Matrix> y3;    // S x (L x N)
  Matrix y4;                 // N_H x N
  double mu = 0.0;
  int iter = 0;
  std::vector<IterationRecord> history;

  static SolverState zeros(int views, int bands, int pixels, int n_h, double mu0);
};

struct SolveResult {
  SolverState state;
  bool converged = false;
  int iterations_run = 0;

  const std::vector<IterationRecord>& residual_history() const { return state.history; }
};

/// Flattened views plus the dictionary and the iteration-invariant products
/// H^T H, H^T X^s and the Cholesky factor of S H^T H + S 11^T + I.
class Problem {
 public:
  Problem(std::vector<Matrix> views, Matrix h);
  Problem(const ViewSet& views, const SketchedDictionary& dict);

  int views() const { return static_cast<int>(x_.size()); }
  int bands() const { return static_cast<int>(h_.rows()); }
  int pixels() const { return static_cast<int>(x_.front().cols()); }
  int atoms() const { return static_cast<int>(h_.cols()); }

  const Matrix& x(int s) const { return x_[static_cast<std::size_t>(s)]; }
  const Matrix& h() const { return h_; }
  const Matrix& hth() const { return hth_; }
  const Matrix& htx(int s) const { return htx_[static_cast<std::size_t>(s)]; }

  /// S H^T H + S 11^T + I.
  Matrix c_system() const;
  const Eigen::LLT<Matrix>& c_factor() const { return c_factor_; }

  /// lambda2 I + mu (H^T H + 11^T).
  Matrix d_system(double lambda2, double mu) const;
  /// Throws ConfigError when the D-system is not positive definite.
  Eigen::LLT<Matrix> d_factor(double lambda2, double mu) const;

 private:
  std::vector<Matrix> x_;
  Matrix h_;
  Matrix hth_;
  std::vector<Matrix> htx_;
  Eigen::LLT<Matrix> c_factor_;
};

SolverState initial_state(const Problem& problem, const SolverConfig& cfg);

/// Right-hand side B of the C normal equations A C = B.
Matrix c_rhs(const SolverState& state, const Problem& problem);
Matrix update_c(const SolverState& state, const Problem& problem);

/// svt(C + Y4/mu, lambda1/mu).
Matrix update_j(const SolverState& state, const SolverConfig& cfg);

/// Right-hand side of the D^s system, using the current D^t for t != s.
Matrix d_rhs(const SolverState& state, const Problem& problem, const SolverConfig& cfg, int s);
/// Closed-form D^s before the nonnegative projection.
Matrix update_d_unprojected(const SolverState& state, const Problem& problem,
                            const SolverConfig& cfg, int s, const Eigen::LLT<Matrix>& factor);
Matrix update_d(const SolverState& state, const Problem& problem, const SolverConfig& cfg, int s,
                const Eigen::LLT<Matrix>& factor);
Matrix update_d(const SolverState& state, const Problem& problem, const SolverConfig& cfg, int s);

Matrix update_e(const SolverState& state, const Problem& problem, int s);
Matrix update_w(const SolverState& state, int s);

/// Y1^s, Y2^s, Y3^s ascent steps for one view.
void update_view_multipliers(SolverState& state, const Problem& problem, int s);
/// Y4 ascent step followed by mu <- min(rho mu, mu_max).
void update_consensus_multiplier(SolverState& state, const SolverConfig& cfg);
/// All multipliers and mu.
void update_multipliers(SolverState& state, const Problem& problem, const SolverConfig& cfg);

Residuals residuals(const SolverState& state, const Problem& problem);

using IterationObserver = std::function<void(const IterationRecord&)>;

/// Alternating ALM iterations from the all-zero state: C, J, then for each view
/// D^s, E^s, W^s and its multipliers, then Y4 and mu. Stops when all four
/// residuals drop below epsilon or after max_iter iterations.
SolveResult solve(const Problem& problem, const SolverConfig& cfg,
                  const IterationObserver& observer = {});
SolveResult solve(const ViewSet& views, const SketchedDictionary& dict, const SolverConfig& cfg);

/// CSV trace with header "iteration,r1,r2,r3,r4,mu".
void write_residual_csv(std::ostream& out, const std::vector<IterationRecord>& history);

}  // namespace smsl
