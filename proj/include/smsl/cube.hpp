#pragma once

#include "smsl/common.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace smsl {

/// Hyperspectral cube stored band-sequential (BSQ): value (band, row, col)
/// lives at data[band * height * width + row * width + col].
class HyperCube {
 public:
  HyperCube() = default;
  /// Throws ConfigError on zero dimensions, a size mismatch or non-finite values.
  HyperCube(int bands, int height, int width, std::vector<double> data);

  static HyperCube zeros(int bands, int height, int width);
  /// Inverse of flatten(): column i of `pixels` becomes pixel i in row-major order.
  static HyperCube from_matrix(const Matrix& pixels, int height, int width);

  int bands() const { return bands_; }
  int height() const { return height_; }
  int width() const { return width_; }
  int pixels() const { return height_ * width_; }
  std::span<const double> data() const { return data_; }

  double at(int band, int row, int col) const {
    return data_[static_cast<std::size_t>(band) * pixels() + row * width_ + col];
  }

 private:
  int bands_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

/// L x N matrix whose column i is the spectrum of pixel i (row-major pixel order).
Matrix flatten(const HyperCube& cube);

/// S >= 2 co-registered cubes with identical geometry.
class ViewSet {
 public:
  explicit ViewSet(std::vector<HyperCube> views);

  int size() const { return static_cast<int>(views_.size()); }
  int bands() const { return views_.front().bands(); }
  int height() const { return views_.front().height(); }
  int width() const { return views_.front().width(); }
  int pixels() const { return views_.front().pixels(); }

  const HyperCube& operator[](int s) const { return views_[static_cast<std::size_t>(s)]; }
  const std::vector<HyperCube>& views() const { return views_; }

  /// One L x N matrix per view.
  std::vector<Matrix> flattened() const;

 private:
  std::vector<HyperCube> views_;
};

/// Binary change mask, 1 = anomalous change.
struct GroundTruthMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> labels;

  int positives() const;
};

/// Per-pixel nonnegative anomaly scores in row-major pixel order.
struct DetectionMap {
  int height = 0;
  int width = 0;
  std::vector<double> scores;

  /// Throws DataError if any score is negative or non-finite.
  void validate() const;
};

DetectionMap make_detection_map(const Vector& scores, int height, int width);

HyperCube load_cube(const std::filesystem::path& header_path);
void save_cube(const HyperCube& cube, const std::filesystem::path& header_path);

GroundTruthMask load_mask(const std::filesystem::path& path);
void save_mask(const GroundTruthMask& mask, const std::filesystem::path& path);

DetectionMap load_scores(const std::filesystem::path& header_path);
void save_scores(const DetectionMap& map, const std::filesystem::path& header_path);

/// Min-max normalized 8-bit PGM rendering of a score map.
void save_heatmap(const DetectionMap& map, const std::filesystem::path& path);

/// Throws DataError unless the mask matches the views' spatial grid.
void validate_mask(const GroundTruthMask& mask, int height, int width);

}  // namespace smsl
