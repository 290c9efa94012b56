#pragma once

#include "smsl/common.hpp"
#include "smsl/cube.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace smsl {

enum class AverageMode { kDictionary, kScores };

std::string to_string(AverageMode mode);
AverageMode parse_average_mode(const std::string& text);

struct SketchConfig {
  int n_h = 500;
  std::uint64_t seed = 0;
  int repeats = 10;
  AverageMode average_mode = AverageMode::kDictionary;

  /// Throws ConfigError unless 1 <= n_h <= total_columns and repeats >= 1.
  void validate(long total_columns) const;
};

struct SketchedDictionary {
  Matrix h;  // L x N_H
  SketchConfig config;
};

/// Standard normal deviates from mt19937_64 through the basic Box-Muller
/// transform, consumed in pairs (cos branch first, then sin branch).
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}
  double next();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Seed used for sketch repeat j: seed ^ (j * 0x9E3779B97F4A7C15). Repeat 0 keeps the base seed.
std::uint64_t repeat_seed(std::uint64_t seed, int j);

/// n x n_h Johnson-Lindenstrauss matrix with i.i.d. N(0, 1/n_h) entries,
/// filled row by row from GaussianStream(seed).
Matrix jlt_matrix(long n, int n_h, std::uint64_t seed);

/// [X^1, ..., X^S] * jlt_matrix(S*N, n_h, seed) without materializing the
/// projection matrix.
Matrix sketch_views(const std::vector<Matrix>& views, int n_h, std::uint64_t seed);

/// The per-repeat dictionaries, one per derived seed.
std::vector<SketchedDictionary> build_dictionaries(const ViewSet& views, const SketchConfig& cfg);

/// Single dictionary. For average_mode=dictionary the repeats are averaged
/// elementwise; for average_mode=scores only repeat 0 is returned (use
/// build_dictionaries for the full list).
SketchedDictionary build_dictionary(const ViewSet& views, const SketchConfig& cfg);

}  // namespace smsl
