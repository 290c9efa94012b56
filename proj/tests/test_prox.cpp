#include "smsl/prox.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace smsl;
using namespace smsl::prox;

namespace {

double nuclear_objective(const Matrix& j, const Matrix& m, double tau) {
  Eigen::JacobiSVD<Matrix> svd(j);
  return tau * svd.singularValues().sum() + 0.5 * (j - m).squaredNorm();
}

double l21_objective(const Matrix& w, const Matrix& q, double threshold) {
  return threshold * w.colwise().norm().sum() + 0.5 * (w - q).squaredNorm();
}

}  // namespace

TEST_CASE("soft_threshold") {
  CHECK(soft_threshold(3.0, 1.0) == 2.0);
  CHECK(soft_threshold(-0.5, 1.0) == 0.0);
  CHECK(soft_threshold(-5.0, 2.0) == -3.0);
  CHECK(soft_threshold(1.0, 1.0) == 0.0);
  for (double x : {-3.0, -0.2, 0.0, 0.7, 4.0}) CHECK(soft_threshold(-x, 0.5) == -soft_threshold(x, 0.5));
}

TEST_CASE("svt with zero threshold is the identity") {
  std::mt19937_64 rng(1);
  const Matrix m = testing::random_matrix(rng, 6, 9);
  CHECK((svt(m, 0.0) - m).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("svt on a nonnegative diagonal matrix") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 3.0;
  m(1, 1) = 1.0;
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 0) = 1.0;
  CHECK((svt(m, 2.0) - expected).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(svt(m, 5.0).isZero(0.0));
}

TEST_CASE("svt shrinks each singular value and drops the rank accordingly") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = testing::random_matrix(rng, 5 + trial % 3, 8);
    const double tau = 0.3 + 0.1 * (trial % 5);
    const Vector sigma = Eigen::JacobiSVD<Matrix>(m).singularValues();
    const Vector out_sigma = Eigen::JacobiSVD<Matrix>(svt(m, tau)).singularValues();
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
      CHECK(std::abs(out_sigma(i) - soft_threshold(sigma(i), tau)) <= 1e-10);
  }
}

TEST_CASE("svt output minimizes the nuclear-norm proximal objective") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  const Matrix m = testing::random_matrix(rng, 6, 4);
  const double tau = 0.7;
  const Matrix j = svt(m, tau);
  const double best = nuclear_objective(j, m, tau);
  for (int k = 0; k < 1000; ++k) {
    Matrix p = j;
    const double scale = std::pow(10.0, -1.0 - 3.0 * (k % 4) / 3.0);
    for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] += scale * z(rng);
    CHECK(best <= nuclear_objective(p, m, tau) + 1e-12);
  }
}

TEST_CASE("svt is nonexpansive") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix a = testing::random_matrix(rng, 5, 7);
    const Matrix b = testing::random_matrix(rng, 5, 7);
    CHECK((svt(a, 0.4) - svt(b, 0.4)).norm() <= (a - b).norm() + 1e-12);
  }
}

TEST_CASE("svt handles wide and tall inputs and rejects non-finite ones") {
  std::mt19937_64 rng(5);
  const Matrix wide = testing::random_matrix(rng, 3, 40);
  const Matrix tall = wide.transpose();
  CHECK((svt(wide, 0.5).transpose() - svt(tall, 0.5)).cwiseAbs().maxCoeff() <= 1e-12);
  Matrix bad = wide;
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(svt(bad, 0.1), DataError);
  CHECK_THROWS_AS(svt(wide, -1.0), ConfigError);
}

TEST_CASE("l21_shrink column rule") {
  Matrix q(2, 1);
  q << 3.0, 4.0;
  const Matrix w = l21_shrink(q, 1.0);
  CHECK(w(0, 0) == doctest::Approx(2.4).epsilon(1e-14));
  CHECK(w(1, 0) == doctest::Approx(3.2).epsilon(1e-14));

  Matrix small(2, 1);
  small << 0.3, 0.4;  // norm 0.5
  CHECK(l21_shrink(small, 1.0).isZero(0.0));
  CHECK_THROWS_AS(l21_shrink(q, 0.0), ConfigError);
}

TEST_CASE("l21_shrink output minimizes the group-lasso proximal objective") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> z;
  const Matrix q = testing::random_matrix(rng, 8, 5, -1.0, 1.0);
  const double threshold = 1.0;
  const Matrix w = l21_shrink(q, threshold);
  const double best = l21_objective(w, q, threshold);
  for (int k = 0; k < 1000; ++k) {
    Matrix p = w;
    const double scale = std::pow(10.0, -1.0 - (k % 4));
    for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] += scale * z(rng);
    CHECK(best <= l21_objective(p, q, threshold) + 1e-12);
  }
}

TEST_CASE("exclusivity value and symmetry") {
  Matrix u(1, 2), v(1, 2);
  u << 1.0, -2.0;
  v << 3.0, -4.0;
  CHECK(exclusivity(u, v) == 11.0);
  Matrix a(1, 2), b(1, 2);
  a << 1.0, 0.0;
  b << 0.0, 5.0;
  CHECK(exclusivity(a, b) == 0.0);

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = testing::random_matrix(rng, 4, 6);
    const Matrix y = testing::random_matrix(rng, 4, 6);
    CHECK(exclusivity(x, y) == exclusivity(y, x));
  }
  CHECK_THROWS_AS(exclusivity(u, Matrix::Zero(2, 1)), ConfigError);
}

TEST_CASE("exclusivity_grad") {
  Matrix u(1, 2), v(1, 2);
  u << 1.0, -2.0;
  v << 3.0, -4.0;
  Matrix expected(1, 2);
  expected << 1.0, -2.0;
  CHECK(exclusivity_grad(u, v) == expected);
  CHECK(exclusivity_grad(u, Matrix::Zero(1, 2)).isZero(0.0));
  CHECK_THROWS_AS(exclusivity_grad(u, Matrix::Zero(2, 2)), ConfigError);
}

TEST_CASE("exclusivity_grad matches central finite differences away from zero") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> mag(0.1, 2.0);
  std::bernoulli_distribution flip(0.5);
  const double h = 1e-6;
  for (int trial = 0; trial < 10; ++trial) {
    Matrix u(3, 4), v(3, 4);
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      u.data()[i] = (flip(rng) ? -1 : 1) * mag(rng);
      v.data()[i] = (flip(rng) ? -1 : 1) * mag(rng);
    }
    const Matrix g = exclusivity_grad(u, v);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      Matrix vp = v, vm = v;
      vp.data()[i] += h;
      vm.data()[i] -= h;
      const double fd = (exclusivity(u, vp) - exclusivity(u, vm)) / (2 * h);
      CHECK(std::abs(fd - g.data()[i]) <= 1e-5 * std::abs(g.data()[i]));
    }
  }
}
