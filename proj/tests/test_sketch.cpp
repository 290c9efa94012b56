#include "smsl/sketch.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace smsl;

namespace {

ViewSet random_views(std::mt19937_64& rng, int views, int bands, int h, int w) {
  std::vector<HyperCube> cubes;
  for (int s = 0; s < views; ++s)
    cubes.push_back(HyperCube::from_matrix(testing::random_matrix(rng, bands, h * w, 0.0, 1.0), h, w));
  return ViewSet(std::move(cubes));
}

Matrix concat(const ViewSet& vs) {
  const auto x = vs.flattened();
  Matrix out(vs.bands(), static_cast<Eigen::Index>(vs.size()) * vs.pixels());
  for (int s = 0; s < vs.size(); ++s) out.middleCols(static_cast<Eigen::Index>(s) * vs.pixels(), vs.pixels()) = x[s];
  return out;
}

}  // namespace

TEST_CASE("GaussianStream has standard normal moments") {
  GaussianStream g(42);
  const int n = 200000;
  double m1 = 0, m2 = 0, m4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = g.next();
    m1 += z;
    m2 += z * z;
    m4 += z * z * z * z;
  }
  m1 /= n;
  m2 /= n;
  m4 /= n;
  CHECK(std::abs(m1) < 0.01);
  CHECK(m2 == doctest::Approx(1.0).epsilon(0.01));
  CHECK(m4 == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("jlt_matrix is deterministic in its seed") {
  const Matrix a = jlt_matrix(50, 7, 123);
  const Matrix b = jlt_matrix(50, 7, 123);
  CHECK(a == b);
  CHECK(a != jlt_matrix(50, 7, 124));
  CHECK_THROWS_AS(jlt_matrix(10, 0, 1), ConfigError);
}

TEST_CASE("jlt_matrix entries are N(0, 1/n_h)") {
  const Matrix r = jlt_matrix(10000, 100, 7);
  const double mean = r.mean();
  const double var = (r.array() - mean).square().sum() / static_cast<double>(r.size() - 1);
  CHECK(std::abs(mean) <= 0.01);
  CHECK(std::abs(var - 0.01) <= 0.1 * 0.01);
}

TEST_CASE("jlt_matrix preserves squared norms on average") {
  const int n = 400, n_h = 200;
  const Matrix r = jlt_matrix(n, n_h, 99);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  double total = 0.0;
  for (int k = 0; k < 1000; ++k) {
    Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = z(rng);
    x.normalize();
    total += (r.transpose() * x).squaredNorm();
  }
  CHECK(std::abs(total / 1000.0 - 1.0) <= 0.05);
}

TEST_CASE("build_dictionary equals concat(X) times the projection matrix") {
  std::mt19937_64 rng(3);
  const auto vs = random_views(rng, 2, 5, 9, 31);  // 279 pixels, crosses the block boundary
  SketchConfig cfg{.n_h = 13, .seed = 2024, .repeats = 1};
  const auto dict = build_dictionary(vs, cfg);
  const Matrix expected = concat(vs) * jlt_matrix(2L * vs.pixels(), 13, 2024);
  REQUIRE(dict.h.rows() == 5);
  REQUIRE(dict.h.cols() == 13);
  CHECK((dict.h - expected).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + expected.cwiseAbs().maxCoeff()));
  CHECK(build_dictionary(vs, cfg).h == dict.h);
}

TEST_CASE("build_dictionary of zero views is zero") {
  const ViewSet vs({HyperCube::zeros(3, 4, 4), HyperCube::zeros(3, 4, 4)});
  const auto dict = build_dictionary(vs, {.n_h = 8, .seed = 1, .repeats = 3});
  CHECK(dict.h.isZero(0.0));
}

TEST_CASE("dictionary averaging is the elementwise mean of the per-seed dictionaries") {
  std::mt19937_64 rng(4);
  const auto vs = random_views(rng, 2, 4, 5, 5);
  SketchConfig cfg{.n_h = 6, .seed = 77, .repeats = 2, .average_mode = AverageMode::kDictionary};
  const auto avg = build_dictionary(vs, cfg);
  const auto parts = build_dictionaries(vs, cfg);
  REQUIRE(parts.size() == 2);
  CHECK(parts[0].config.seed == 77);
  CHECK(parts[1].config.seed == repeat_seed(77, 1));
  CHECK(parts[0].config.seed != parts[1].config.seed);
  CHECK((avg.h - 0.5 * (parts[0].h + parts[1].h)).cwiseAbs().maxCoeff() <= 1e-14);

  SketchConfig single = cfg;
  single.repeats = 1;
  CHECK(build_dictionary(vs, single).h == parts[0].h);
}

TEST_CASE("averaged dictionary entries have 1/k of the single-draw variance") {
  std::mt19937_64 rng(8);
  const auto vs = random_views(rng, 2, 4, 40, 40);
  const int k = 4;
  SketchConfig one{.n_h = 2000, .seed = 5, .repeats = 1};
  SketchConfig avg = one;
  avg.repeats = k;
  // Entries are zero-mean, so the second moment is the variance.
  const double v1 = build_dictionary(vs, one).h.squaredNorm();
  const double vk = build_dictionary(vs, avg).h.squaredNorm();
  CHECK(vk / v1 == doctest::Approx(1.0 / k).epsilon(0.15));
}

TEST_CASE("sketch configuration is validated") {
  std::mt19937_64 rng(9);
  const auto vs = random_views(rng, 2, 3, 2, 2);  // S*N = 8
  CHECK_THROWS_AS(build_dictionary(vs, {.n_h = 9, .seed = 0, .repeats = 1}), ConfigError);
  CHECK_THROWS_AS(build_dictionary(vs, {.n_h = 0, .seed = 0, .repeats = 1}), ConfigError);
  CHECK_THROWS_AS(build_dictionary(vs, {.n_h = 4, .seed = 0, .repeats = 0}), ConfigError);
  CHECK(build_dictionary(vs, {.n_h = 8, .seed = 0, .repeats = 1}).h.cols() == 8);
  CHECK(parse_average_mode("scores") == AverageMode::kScores);
  CHECK_THROWS_AS(parse_average_mode("median"), ConfigError);
}
