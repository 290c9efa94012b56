#pragma once

// Shared helpers and independent oracles for the test suites. Nothing here
// calls into the code paths it is used to check.

#include "smsl/common.hpp"
#include "smsl/cube.hpp"
#include "smsl/solver.hpp"

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace smsl::testing {

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                            double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const char* base = std::getenv("SMSL_TEST_TMP");
  const auto root = base ? std::filesystem::path(base) : std::filesystem::temp_directory_path() / "smsl-tests";
  const auto dir = root / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Pairwise Mann-Whitney statistic, ties counted 1/2.
inline double mann_whitney(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

/// Generic dense solve through full-pivoting LU.
inline Matrix dense_solve(const Matrix& a, const Matrix& b) { return a.fullPivLu().solve(b); }

/// A random ALM state with every block populated.
inline SolverState random_state(std::mt19937_64& rng, int views, int bands, int pixels, int atoms,
                                double mu) {
  SolverState st = SolverState::zeros(views, bands, pixels, atoms, mu);
  st.c = random_matrix(rng, atoms, pixels);
  st.j = random_matrix(rng, atoms, pixels);
  st.y4 = random_matrix(rng, atoms, pixels);
  for (int s = 0; s < views; ++s) {
    st.d[s] = random_matrix(rng, atoms, pixels, 0.0, 1.0);
    st.e[s] = random_matrix(rng, bands, pixels);
    st.w[s] = random_matrix(rng, bands, pixels);
    st.y1[s] = random_matrix(rng, bands, pixels);
    st.y2[s] = random_matrix(rng, 1, pixels);
    st.y3[s] = random_matrix(rng, bands, pixels);
  }
  return st;
}

/// Builds the C normal equations term by term from the Lagrangian: the gradient
/// in C of the three quadratic penalties is mu * (A C - B).
inline std::pair<Matrix, Matrix> c_normal_equations(const SolverState& st, const std::vector<Matrix>& x,
                                                    const Matrix& h) {
  const auto n_h = h.cols();
  const auto n = x.front().cols();
  const Matrix ones = Matrix::Ones(n_h, 1);
  Matrix a = Matrix::Identity(n_h, n_h);
  Matrix b = st.j - st.y4 / st.mu;
  for (std::size_t s = 0; s < x.size(); ++s) {
    a += h.transpose() * h + ones * ones.transpose();
    b += h.transpose() * (x[s] - h * st.d[s] - st.e[s] + st.y1[s] / st.mu);
    b -= ones * (ones.transpose() * st.d[s] - Matrix::Ones(1, n) + st.y2[s] / st.mu);
  }
  return {a, b};
}

/// The D^s normal equations with the exclusivity weight |D^t| frozen.
inline std::pair<Matrix, Matrix> d_normal_equations(const SolverState& st, const std::vector<Matrix>& x,
                                                    const Matrix& h, double lambda2, double lambda3,
                                                    std::size_t s) {
  const auto n_h = h.cols();
  const auto n = x.front().cols();
  const Matrix ones = Matrix::Ones(n_h, 1);
  const double mu = st.mu;
  Matrix a = lambda2 * Matrix::Identity(n_h, n_h) + mu * h.transpose() * h + mu * ones * ones.transpose();
  Matrix b = mu * h.transpose() * (x[s] - h * st.c - st.e[s] + st.y1[s] / mu) -
             mu * ones * (ones.transpose() * st.c - Matrix::Ones(1, n) + st.y2[s] / mu);
  for (std::size_t t = 0; t < x.size(); ++t)
    if (t != s) b -= lambda3 * st.d[t].cwiseAbs();
  return {a, b};
}

}  // namespace smsl::testing
