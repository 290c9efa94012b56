#include "smsl/eval.hpp"

#include "smsl/baselines.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace smsl;
using namespace smsl::eval;

namespace {

SynthSpec tiny_spec() {
  SynthSpec spec;
  spec.height = 10;
  spec.width = 10;
  spec.bands = 6;
  spec.n_anomalies = 5;
  spec.anomaly_magnitude = 0.3;
  spec.seed = 4;
  return spec;
}

DetectorConfig tiny_config() {
  DetectorConfig cfg;
  cfg.sketch.n_h = 20;
  cfg.sketch.repeats = 1;
  cfg.solver.max_iter = 10;
  return cfg;
}

}  // namespace

TEST_CASE("roc on hand fixtures") {
  CHECK(roc(std::vector<double>{0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}).auc == 1.0);
  CHECK(roc(std::vector<double>{0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}).auc == 0.5);
  CHECK(roc(std::vector<double>{0.9, 0.4, 0.6, 0.1}, {1, 1, 0, 0}).auc == 0.75);

  const auto curve = roc(std::vector<double>{0.9, 0.4, 0.6, 0.1}, {1, 1, 0, 0});
  REQUIRE(curve.points.size() == 5);
  CHECK(curve.points.front().fpr == 0.0);
  CHECK(curve.points.front().tpr == 0.0);
  CHECK(curve.points.back().fpr == 1.0);
  CHECK(curve.points.back().tpr == 1.0);

  CHECK_THROWS_AS(roc(std::vector<double>{1.0, 2.0}, {1, 1}), DataError);
  CHECK_THROWS_AS(roc(std::vector<double>{1.0, 2.0}, {0, 0}), DataError);
  CHECK_THROWS_AS(roc(std::vector<double>{1.0, 2.0}, {0, 1, 0}), DataError);
}

TEST_CASE("roc on maps checks the grid") {
  const DetectionMap map{1, 4, {0.9, 0.4, 0.6, 0.1}};
  const GroundTruthMask mask{1, 4, {1, 1, 0, 0}};
  CHECK(roc(map, mask).auc == 0.75);
  const GroundTruthMask wrong{2, 2, {1, 1, 0, 0}};
  CHECK_THROWS_AS(roc(map, wrong), DataError);
}

TEST_CASE("AUC equals the Mann-Whitney statistic on random instances") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> size(2, 1000);
  std::uniform_int_distribution<int> level(0, 20);  // coarse levels force ties
  for (int trial = 0; trial < 100; ++trial) {
    const int n = size(rng);
    std::vector<double> s(n);
    std::vector<std::uint8_t> y(n);
    for (int i = 0; i < n; ++i) {
      s[i] = trial % 2 ? level(rng) / 20.0 : std::uniform_real_distribution<double>()(rng);
      y[i] = std::bernoulli_distribution(0.3)(rng);
    }
    y[0] = 1;
    y[1] = 0;
    const double auc = roc(s, y).auc;
    CHECK(std::abs(auc - testing::mann_whitney(s, y)) <= 1e-12);

    std::vector<double> neg(n), cubed(n);
    for (int i = 0; i < n; ++i) {
      neg[i] = -s[i];
      cubed[i] = std::exp(3.0 * s[i]) - 7.0;
    }
    CHECK(std::abs(roc(neg, y).auc - (1.0 - auc)) <= 1e-12);
    CHECK(roc(cubed, y).auc == auc);

    const auto curve = roc(s, y);
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
      CHECK(curve.points[i].fpr >= curve.points[i - 1].fpr);
      CHECK(curve.points[i].tpr >= curve.points[i - 1].tpr);
    }
  }
}

TEST_CASE("ROC CSV") {
  std::ostringstream out;
  write_roc_csv(out, roc(std::vector<double>{0.9, 0.1}, {1, 0}));
  CHECK(out.str().rfind("fpr,tpr\n", 0) == 0);
}

TEST_CASE("synth_scene plants the requested anomalies deterministically") {
  SynthSpec spec = tiny_spec();
  spec.n_anomalies = 20;
  const auto a = synth_scene(spec);
  CHECK(a.mask.positives() == 20);
  CHECK(a.views.size() == 2);
  CHECK(a.views.bands() == 6);
  const auto b = synth_scene(spec);
  CHECK(a.mask.labels == b.mask.labels);
  CHECK(a.views.flattened()[1] == b.views.flattened()[1]);

  // Only the anomaly view changes at planted pixels.
  SynthSpec clean = spec;
  clean.anomaly_magnitude = 0.0;
  const auto c = synth_scene(clean);
  CHECK(a.views.flattened()[0] == c.views.flattened()[0]);
  const Matrix delta = a.views.flattened()[1] - c.views.flattened()[1];
  for (int i = 0; i < 100; ++i) CHECK((delta.col(i).norm() > 0.0) == static_cast<bool>(a.mask.labels[i]));

  spec.n_anomalies = 0;
  const auto empty = synth_scene(spec);
  CHECK(empty.mask.positives() == 0);

  spec.n_anomalies = 100;
  CHECK_THROWS_AS(synth_scene(spec), ConfigError);
}

TEST_CASE("noise-free, change-free views differ only by a gain") {
  SynthSpec spec = tiny_spec();
  spec.noise_sigma = 0.0;
  spec.anomaly_magnitude = 0.0;
  const auto scene = synth_scene(spec);
  const auto x = scene.views.flattened();
  const double ratio = x[1](0, 0) / x[0](0, 0);
  CHECK(std::abs(ratio - 1.0) <= spec.gain_spread * 2.0);
  CHECK((x[1] - ratio * x[0]).cwiseAbs().maxCoeff() <= 1e-12);
  // A linear predictor explains the second view completely.
  for (double s : baselines::chronochrome(scene.views).scores) CHECK(s <= 1e-8);
}

TEST_CASE("parse_grid") {
  const auto g = parse_grid("lambda2=0.1,1,10; lambda3=1");
  REQUIRE(g.size() == 2);
  CHECK(g[0].name == "lambda2");
  CHECK(g[0].values == std::vector<double>{0.1, 1.0, 10.0});
  CHECK(g[1].values == std::vector<double>{1.0});
  CHECK_THROWS_AS(parse_grid(""), ConfigError);
  CHECK_THROWS_AS(parse_grid("lambda2"), ConfigError);
  CHECK_THROWS_AS(parse_grid("lambda2=a,b"), ConfigError);
  CHECK_THROWS_AS(parse_grid("gamma=1"), ConfigError);
  CHECK_THROWS_AS(parse_grid("lambda2=1;lambda2=2"), ConfigError);
  CHECK_THROWS_AS(parse_grid("lambda2="), ConfigError);

  DetectorConfig cfg;
  apply_parameter(cfg, "sketch_size", 123);
  apply_parameter(cfg, "max_iter", 7);
  apply_parameter(cfg, "lambda3", 0.5);
  CHECK(cfg.sketch.n_h == 123);
  CHECK(cfg.solver.max_iter == 7);
  CHECK(cfg.solver.lambda3 == 0.5);
  CHECK_THROWS_AS(apply_parameter(cfg, "max_iter", 2.5), ConfigError);
}

TEST_CASE("sweep of a single point equals a direct run") {
  const auto scene = synth_scene(tiny_spec());
  const auto cfg = tiny_config();
  const auto table = sweep(scene.views, scene.mask, cfg, parse_grid("lambda2=10"));
  REQUIRE(table.rows.size() == 1);
  CHECK(table.rows[0].auc == roc(detect(scene.views, cfg), scene.mask).auc);
}

TEST_CASE("sweep enumerates a 2x2 grid in lexicographic order") {
  const auto scene = synth_scene(tiny_spec());
  const auto grid = parse_grid("lambda2=1,10;sketch_size=10,20");
  const auto serial = sweep(scene.views, scene.mask, tiny_config(), grid, 1);
  const auto parallel = sweep(scene.views, scene.mask, tiny_config(), grid, 3);
  REQUIRE(serial.rows.size() == 4);
  const std::vector<std::vector<double>> expected{{1, 10}, {1, 20}, {10, 10}, {10, 20}};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(serial.rows[i].values == expected[i]);
    CHECK(parallel.rows[i].values == expected[i]);
    CHECK(parallel.rows[i].auc == serial.rows[i].auc);
  }
  std::ostringstream out;
  write_sweep_csv(out, serial);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "lambda2,sketch_size,auc");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 4);
}
