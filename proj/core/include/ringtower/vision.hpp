#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ringtower/data_model.hpp"
#include "ringtower/image.hpp"

namespace ringtower {

struct Hsv {
  int h = 0;  // [0,179], degrees / 2
  int s = 0;  // [0,255]
  int v = 0;  // [0,255]
  friend bool operator==(const Hsv&, const Hsv&) = default;
};

// Hexcone HSV on the 0-179 / 0-255 / 0-255 scales. Hue and saturation are
// rounded to the nearest integer; hue 180 wraps to 0.
Hsv rgb_to_hsv(Rgb rgb);

class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height) : cells_(width, height, 0) {}

  int width() const { return cells_.width(); }
  int height() const { return cells_.height(); }
  bool get(int x, int y) const { return cells_(x, y) != 0; }
  void set(int x, int y, bool on = true) { cells_(x, y) = on ? 1 : 0; }
  long count() const;

  const Grid<std::uint8_t>& cells() const { return cells_; }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  Grid<std::uint8_t> cells_;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Blob {
  std::vector<std::pair<int, int>> pixels;
  Rect bbox;
  Point centroid;
  long size() const { return static_cast<long>(pixels.size()); }
};

// 4-connected components of the set pixels, in raster order of their first pixel.
std::vector<Blob> connected_components(const BinaryMask& mask);

// Clears every 4-connected component smaller than `min_size`.
BinaryMask remove_small_components(const BinaryMask& mask, long min_size);

// Color gate only, before size filtering.
BinaryMask tower_color_mask(const RgbImage& frame, const DetectorConfig& config);
// Color gate followed by size filtering.
BinaryMask tower_mask(const RgbImage& frame, const DetectorConfig& config);

// Throws InputError when the roi does not lie within the mask.
BinaryMask restrict_roi(const BinaryMask& mask, const Rect& roi);

// Chebyshev (chessboard) distance from every cell to the nearest set cell;
// -1 everywhere when the mask is empty.
Grid<int> chebyshev_distance(const BinaryMask& mask);

// Dark pixels (v <= val_max_ring) in components of at least min_ring_px,
// keeping only pixels within max_ring_tower_dist_px of a tower pixel.
BinaryMask ring_mask(const RgbImage& frame, const BinaryMask& tower, const DetectorConfig& config);

std::optional<Point> ring_centroid(const BinaryMask& mask);

}  // namespace ringtower
