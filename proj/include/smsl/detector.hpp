#pragma once

#include "smsl/common.hpp"
#include "smsl/cube.hpp"
#include "smsl/sketch.hpp"
#include "smsl/solver.hpp"

#include <cstdint>
#include <vector>

namespace smsl {

struct DetectorConfig {
  SketchConfig sketch;
  SolverConfig solver;
};

/// H * D^s: column i is the specific part of pixel i.
Matrix specific_part(const Matrix& h, const Matrix& d);

/// ||H d2_i - H d1_i||_2 + ||e2_i - e1_i||_2 per pixel.
Vector score_pair(const Matrix& h, const Matrix& d1, const Matrix& d2, const Matrix& e1,
                  const Matrix& e2);

/// Sum of score_pair over consecutive views (s, s+1).
Vector score_multiview(const Matrix& h, const std::vector<Matrix>& d, const std::vector<Matrix>& e);

/// Summary of one sketch + solve pass, recorded in run manifests.
struct PassSummary {
  std::uint64_t seed = 0;
  bool converged = false;
  int iterations = 0;
  Residuals final_residuals;
  std::vector<IterationRecord> history;
};

struct DetectionReport {
  DetectionMap map;
  std::vector<PassSummary> passes;
};

DetectionReport detect_with_report(const ViewSet& views, const DetectorConfig& cfg);

/// Score-averaging over explicit sketch seeds, one full sketch + solve pass per seed.
DetectionReport detect_with_seeds(const ViewSet& views, const DetectorConfig& cfg,
                                  const std::vector<std::uint64_t>& seeds);

DetectionMap detect(const ViewSet& views, const DetectorConfig& cfg);

}  // namespace smsl
