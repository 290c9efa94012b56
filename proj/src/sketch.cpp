#include "smsl/sketch.hpp"

#include <cmath>
#include <numbers>

namespace smsl {

std::string to_string(AverageMode mode) {
  return mode == AverageMode::kDictionary ? "dictionary" : "scores";
}

AverageMode parse_average_mode(const std::string& text) {
  if (text == "dictionary") return AverageMode::kDictionary;
  if (text == "scores") return AverageMode::kScores;
  throw ConfigError("unknown sketch averaging mode '" + text + "' (expected dictionary|scores)");
}

void SketchConfig::validate(long total_columns) const {
  if (n_h < 1) throw ConfigError("sketch size must be >= 1");
  if (n_h > total_columns)
    throw ConfigError("sketch size " + std::to_string(n_h) + " exceeds S*N = " +
                      std::to_string(total_columns));
  if (repeats < 1) throw ConfigError("sketch repeats must be >= 1");
}

double GaussianStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // 53-bit uniforms; u1 in (0, 1] keeps the log finite.
  constexpr double kScale = 1.0 / 9007199254740992.0;
  const double u1 = static_cast<double>((engine_() >> 11) + 1) * kScale;
  const double u2 = static_cast<double>(engine_() >> 11) * kScale;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t repeat_seed(std::uint64_t seed, int j) {
  return seed ^ (static_cast<std::uint64_t>(j) * 0x9E3779B97F4A7C15ULL);
}

Matrix jlt_matrix(long n, int n_h, std::uint64_t seed) {
  if (n < 1) throw ConfigError("projection input dimension must be >= 1");
  if (n_h < 1) throw ConfigError("sketch size must be >= 1");
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_h));
  GaussianStream g(seed);
  Matrix r(n, n_h);
  for (long i = 0; i < n; ++i)
    for (int j = 0; j < n_h; ++j) r(i, j) = scale * g.next();
  return r;
}

Matrix sketch_views(const std::vector<Matrix>& views, int n_h, std::uint64_t seed) {
  if (views.empty()) throw ConfigError("no views to sketch");
  if (n_h < 1) throw ConfigError("sketch size must be >= 1");
  const Eigen::Index bands = views.front().rows();
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_h));

  // Rows of R are generated in the same order as jlt_matrix, a block at a time.
  constexpr Eigen::Index kBlock = 256;
  GaussianStream g(seed);
  Matrix h = Matrix::Zero(bands, n_h);
  Matrix r_block(kBlock, n_h);
  for (const auto& x : views) {
    if (x.rows() != bands) throw ConfigError("views disagree on band count");
    for (Eigen::Index start = 0; start < x.cols(); start += kBlock) {
      const Eigen::Index rows = std::min(kBlock, x.cols() - start);
      for (Eigen::Index i = 0; i < rows; ++i)
        for (int j = 0; j < n_h; ++j) r_block(i, j) = scale * g.next();
      h.noalias() += x.middleCols(start, rows) * r_block.topRows(rows);
    }
  }
  return h;
}

std::vector<SketchedDictionary> build_dictionaries(const ViewSet& views, const SketchConfig& cfg) {
  cfg.validate(static_cast<long>(views.size()) * views.pixels());
  const auto x = views.flattened();
  std::vector<SketchedDictionary> out;
  out.reserve(static_cast<std::size_t>(cfg.repeats));
  for (int j = 0; j < cfg.repeats; ++j) {
    SketchConfig c = cfg;
    c.seed = repeat_seed(cfg.seed, j);
    c.repeats = 1;
    out.push_back({sketch_views(x, cfg.n_h, c.seed), c});
  }
  return out;
}

SketchedDictionary build_dictionary(const ViewSet& views, const SketchConfig& cfg) {
  if (cfg.average_mode == AverageMode::kScores) {
    SketchConfig first = cfg;
    first.repeats = 1;
    auto dicts = build_dictionaries(views, first);
    dicts.front().config = cfg;
    return dicts.front();
  }
  cfg.validate(static_cast<long>(views.size()) * views.pixels());
  const auto x = views.flattened();
  Matrix sum = Matrix::Zero(views.bands(), cfg.n_h);
  for (int j = 0; j < cfg.repeats; ++j) sum += sketch_views(x, cfg.n_h, repeat_seed(cfg.seed, j));
  return {sum / static_cast<double>(cfg.repeats), cfg};
}

}  // namespace smsl
