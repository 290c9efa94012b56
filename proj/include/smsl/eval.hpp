#pragma once

#include "smsl/common.hpp"
#include "smsl/cube.hpp"
#include "smsl/detector.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace smsl::eval {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

/// Operating points from threshold +inf down to -inf, one per distinct score.
struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

/// Tied scores form a single operating point, so the trapezoidal AUC equals the
/// Mann-Whitney statistic with ties counted one half.
RocCurve roc(const DetectionMap& scores, const GroundTruthMask& mask);
RocCurve roc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels);

void write_roc_csv(std::ostream& out, const RocCurve& curve);

struct SynthSpec {
  int height = 64;
  int width = 64;
  int bands = 16;
  int views = 2;
  int n_endmembers = 4;
  int n_anomalies = 20;
  double anomaly_magnitude = 0.1;
  double noise_sigma = 0.02;
  double gain_spread = 0.05;  // per-view gain drawn uniformly from [1 - spread, 1 + spread]
  int anomaly_view = 1;       // 0-based; 1 = appear-type change in the second view
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthScene {
  ViewSet views;
  GroundTruthMask mask;
};

/// Linear-mixing background (random nonnegative endmembers, Dirichlet(1)
/// abundances) shared by all views up to a per-view gain and Gaussian noise.
/// Each planted pixel gets magnitude * U[-1, 1]^L added in anomaly_view only.
SynthScene synth_scene(const SynthSpec& spec);

struct GridAxis {
  std::string name;
  std::vector<double> values;
};

/// Parses "lambda2=0.1,1,10;lambda3=0.1,1". Throws ConfigError when malformed.
std::vector<GridAxis> parse_grid(const std::string& text);

/// Names accepted on a grid axis.
const std::vector<std::string>& sweep_parameters();

/// Applies one named parameter to a detector config.
void apply_parameter(DetectorConfig& cfg, const std::string& name, double value);

struct SweepRow {
  std::vector<double> values;
  double auc = 0.0;
};

struct SweepTable {
  std::vector<std::string> names;
  std::vector<SweepRow> rows;
};

/// Evaluates detect + roc at every grid point. Rows are in lexicographic order
/// with the first axis varying slowest. Up to `jobs` points run concurrently.
SweepTable sweep(const ViewSet& views, const GroundTruthMask& mask, const DetectorConfig& base,
                 const std::vector<GridAxis>& grid, int jobs = 1);

void write_sweep_csv(std::ostream& out, const SweepTable& table);

}  // namespace smsl::eval
