#include "ringtower/vision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ringtower {

Hsv rgb_to_hsv(Rgb rgb) {
  const int r = rgb.r, g = rgb.g, b = rgb.b;
  const int v = std::max({r, g, b});
  const int lo = std::min({r, g, b});
  const int diff = v - lo;
  if (v == 0) return {0, 0, 0};

  const int s = static_cast<int>(std::lround(255.0 * diff / v));
  if (diff == 0) return {0, s, v};

  double deg;
  if (v == r)
    deg = 60.0 * (g - b) / diff;
  else if (v == g)
    deg = 120.0 + 60.0 * (b - r) / diff;
  else
    deg = 240.0 + 60.0 * (r - g) / diff;
  if (deg < 0) deg += 360.0;
  int h = static_cast<int>(std::lround(deg / 2.0));
  if (h >= 180) h -= 180;
  return {h, s, v};
}

long BinaryMask::count() const {
  long n = 0;
  for (auto c : cells_.values()) n += c != 0;
  return n;
}

namespace {

// Labels 4-connected components (1-based, 0 = background); returns per-label sizes
// with sizes[0] unused.
std::vector<long> label_components(const BinaryMask& mask, Grid<int>& labels) {
  const int w = mask.width(), h = mask.height();
  labels = Grid<int>(w, h, 0);
  std::vector<long> sizes{0};
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.get(x, y) || labels(x, y) != 0) continue;
      const int id = static_cast<int>(sizes.size());
      long size = 0;
      labels(x, y) = id;
      stack.push_back({x, y});
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        ++size;
        const int nx[4] = {cx - 1, cx + 1, cx, cx};
        const int ny[4] = {cy, cy, cy - 1, cy + 1};
        for (int k = 0; k < 4; ++k) {
          if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h) continue;
          if (!mask.get(nx[k], ny[k]) || labels(nx[k], ny[k]) != 0) continue;
          labels(nx[k], ny[k]) = id;
          stack.push_back({nx[k], ny[k]});
        }
      }
      sizes.push_back(size);
    }
  }
  return sizes;
}

}  // namespace

std::vector<Blob> connected_components(const BinaryMask& mask) {
  Grid<int> labels;
  const auto sizes = label_components(mask, labels);
  std::vector<Blob> blobs(sizes.size() - 1);
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (int id = labels(x, y)) blobs[static_cast<std::size_t>(id - 1)].pixels.push_back({x, y});

  for (auto& blob : blobs) {
    int x0 = std::numeric_limits<int>::max(), y0 = x0, x1 = -1, y1 = -1;
    double sx = 0, sy = 0;
    for (auto [x, y] : blob.pixels) {
      x0 = std::min(x0, x), x1 = std::max(x1, x);
      y0 = std::min(y0, y), y1 = std::max(y1, y);
      sx += x, sy += y;
    }
    const double n = static_cast<double>(blob.pixels.size());
    blob.bbox = Rect{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
    blob.centroid = Point{sx / n, sy / n};
  }
  return blobs;
}

BinaryMask remove_small_components(const BinaryMask& mask, long min_size) {
  Grid<int> labels;
  const auto sizes = label_components(mask, labels);
  BinaryMask out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (int id = labels(x, y); id != 0 && sizes[static_cast<std::size_t>(id)] >= min_size)
        out.set(x, y);
  return out;
}

BinaryMask tower_color_mask(const RgbImage& frame, const DetectorConfig& config) {
  BinaryMask mask(frame.width(), frame.height());
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) {
      const Rgb p = frame(x, y);
      // v is the max channel; most background pixels are rejected before the full conversion.
      if (std::max({p.r, p.g, p.b}) > config.val_max) continue;
      const Hsv hsv = rgb_to_hsv(p);
      if (hsv.h >= config.hue_min && hsv.h <= config.hue_max && hsv.s >= config.sat_min)
        mask.set(x, y);
    }
  }
  return mask;
}

BinaryMask tower_mask(const RgbImage& frame, const DetectorConfig& config) {
  return remove_small_components(tower_color_mask(frame, config), config.min_blob_px);
}

BinaryMask restrict_roi(const BinaryMask& mask, const Rect& roi) {
  if (roi.x < 0 || roi.y < 0 || roi.width < 0 || roi.height < 0 || roi.right() > mask.width() ||
      roi.bottom() > mask.height())
    throw InputError("roi", "rectangle lies outside the mask");
  BinaryMask out(mask.width(), mask.height());
  for (int y = roi.y; y < roi.bottom(); ++y)
    for (int x = roi.x; x < roi.right(); ++x)
      if (mask.get(x, y)) out.set(x, y);
  return out;
}

Grid<int> chebyshev_distance(const BinaryMask& mask) {
  const int w = mask.width(), h = mask.height();
  const int inf = w + h + 1;
  Grid<int> d(w, h, inf);
  if (mask.count() == 0) return Grid<int>(w, h, -1);

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (mask.get(x, y)) d(x, y) = 0;

  // Two raster passes over the 8-neighborhood with unit steps give the exact
  // chessboard metric.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int best = d(x, y);
      if (x > 0) best = std::min(best, d(x - 1, y) + 1);
      if (y > 0) {
        best = std::min(best, d(x, y - 1) + 1);
        if (x > 0) best = std::min(best, d(x - 1, y - 1) + 1);
        if (x + 1 < w) best = std::min(best, d(x + 1, y - 1) + 1);
      }
      d(x, y) = best;
    }
  }
  for (int y = h - 1; y >= 0; --y) {
    for (int x = w - 1; x >= 0; --x) {
      int best = d(x, y);
      if (x + 1 < w) best = std::min(best, d(x + 1, y) + 1);
      if (y + 1 < h) {
        best = std::min(best, d(x, y + 1) + 1);
        if (x + 1 < w) best = std::min(best, d(x + 1, y + 1) + 1);
        if (x > 0) best = std::min(best, d(x - 1, y + 1) + 1);
      }
      d(x, y) = best;
    }
  }
  return d;
}

BinaryMask ring_mask(const RgbImage& frame, const BinaryMask& tower, const DetectorConfig& config) {
  BinaryMask dark(frame.width(), frame.height());
  for (int y = 0; y < frame.height(); ++y)
    for (int x = 0; x < frame.width(); ++x) {
      const Rgb p = frame(x, y);
      if (std::max({p.r, p.g, p.b}) <= config.val_max_ring) dark.set(x, y);
    }
  dark = remove_small_components(dark, config.min_ring_px);

  BinaryMask out(frame.width(), frame.height());
  if (tower.count() == 0) return out;
  const Grid<int> dist = chebyshev_distance(tower);
  for (int y = 0; y < frame.height(); ++y)
    for (int x = 0; x < frame.width(); ++x)
      if (dark.get(x, y) && dist(x, y) <= config.max_ring_tower_dist_px) out.set(x, y);
  return out;
}

std::optional<Point> ring_centroid(const BinaryMask& mask) {
  double sx = 0, sy = 0;
  long n = 0;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.get(x, y)) sx += x, sy += y, ++n;
  if (n == 0) return std::nullopt;
  return Point{sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

}  // namespace ringtower
