#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

namespace oracle {

Hsv hsv(Rgb p) {
  const double r = p.r / 255.0, g = p.g / 255.0, b = p.b / 255.0;
  const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
  const double delta = mx - mn;
  double hue_deg = 0.0;
  if (delta > 0) {
    if (mx == r)
      hue_deg = 60.0 * std::fmod((g - b) / delta, 6.0);
    else if (mx == g)
      hue_deg = 60.0 * ((b - r) / delta + 2.0);
    else
      hue_deg = 60.0 * ((r - g) / delta + 4.0);
  }
  if (hue_deg < 0) hue_deg += 360.0;
  const int hi = std::max({p.r, p.g, p.b}), span = hi - std::min({p.r, p.g, p.b});
  Hsv out;
  out.h = static_cast<int>(std::lround(hue_deg / 2.0)) % 180;
  // Saturation rounded half up in exact integer arithmetic.
  out.s = hi > 0 ? (2 * 255 * span + hi) / (2 * hi) : 0;
  out.v = static_cast<int>(std::lround(mx * 255.0));
  return out;
}

std::vector<std::vector<double>> gray(const RgbImage& image) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(image.height()),
                                       std::vector<double>(static_cast<std::size_t>(image.width())));
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x) {
      const Rgb p = image(x, y);
      out[y][x] = (0.299 * p.r + 0.587 * p.g + 0.114 * p.b) / 255.0;
    }
  return out;
}

Flow horn_schunck(const std::vector<std::vector<double>>& prev,
                  const std::vector<std::vector<double>>& next, double alpha, int iterations) {
  const int h = static_cast<int>(prev.size()), w = static_cast<int>(prev[0].size());
  auto at = [&](const std::vector<std::vector<double>>& f, int x, int y) {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return f[y][x];
  };
  std::vector<std::vector<double>> ix = prev, iy = prev, it = prev;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      ix[y][x] = ((at(prev, x + 1, y) - at(prev, x - 1, y)) + (at(next, x + 1, y) - at(next, x - 1, y))) / 4.0;
      iy[y][x] = ((at(prev, x, y + 1) - at(prev, x, y - 1)) + (at(next, x, y + 1) - at(next, x, y - 1))) / 4.0;
      it[y][x] = next[y][x] - prev[y][x];
    }
  Flow f;
  f.u.assign(static_cast<std::size_t>(h), std::vector<double>(static_cast<std::size_t>(w), 0.0));
  f.v = f.u;
  for (int n = 0; n < iterations; ++n) {
    auto u = f.u, v = f.v;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        auto mean = [&](const std::vector<std::vector<double>>& g) {
          const double edge = at(g, x - 1, y) + at(g, x + 1, y) + at(g, x, y - 1) + at(g, x, y + 1);
          const double corner =
              at(g, x - 1, y - 1) + at(g, x + 1, y - 1) + at(g, x - 1, y + 1) + at(g, x + 1, y + 1);
          return edge / 6.0 + corner / 12.0;
        };
        const double ub = mean(f.u), vb = mean(f.v);
        const double common = (ix[y][x] * ub + iy[y][x] * vb + it[y][x]) /
                              (alpha * alpha + ix[y][x] * ix[y][x] + iy[y][x] * iy[y][x]);
        u[y][x] = ub - ix[y][x] * common;
        v[y][x] = vb - iy[y][x] * common;
      }
    f.u = std::move(u);
    f.v = std::move(v);
  }
  return f;
}

std::vector<double> dft_db(const std::vector<double>& window) {
  const int n = static_cast<int>(window.size());
  std::vector<double> out;
  for (int k = 0; k <= n / 2; ++k) {
    std::complex<double> sum = 0.0;
    for (int j = 0; j < n; ++j)
      sum += window[j] * std::polar(1.0, -2.0 * std::numbers::pi * k * j / n);
    const double mag = std::abs(sum);
    out.push_back(20.0 * std::log10(mag));
  }
  return out;
}

std::vector<double> moving_average(const std::vector<double>& x, int window) {
  std::vector<double> out;
  const int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    int count = 0;
    for (int j = i - window / 2; j <= i + window / 2; ++j)
      if (j >= 0 && j < n) sum += x[j], ++count;
    out.push_back(sum / count);
  }
  return out;
}

int chebyshev_to_nearest(const BinaryMask& mask, int x, int y) {
  int best = -1;
  for (int yy = 0; yy < mask.height(); ++yy)
    for (int xx = 0; xx < mask.width(); ++xx)
      if (mask.get(xx, yy)) {
        const int d = std::max(std::abs(xx - x), std::abs(yy - y));
        if (best < 0 || d < best) best = d;
      }
  return best;
}

std::vector<long> component_sizes(const BinaryMask& mask) {
  const int w = mask.width(), h = mask.height();
  std::vector<char> seen(static_cast<std::size_t>(w) * h, 0);
  std::vector<long> sizes;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!mask.get(x, y) || seen[static_cast<std::size_t>(y) * w + x]) continue;
      long size = 0;
      std::deque<std::pair<int, int>> queue{{x, y}};
      seen[static_cast<std::size_t>(y) * w + x] = 1;
      while (!queue.empty()) {
        auto [cx, cy] = queue.front();
        queue.pop_front();
        ++size;
        const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int nx = cx + dx[k], ny = cy + dy[k];
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          auto& s = seen[static_cast<std::size_t>(ny) * w + nx];
          if (!s && mask.get(nx, ny)) s = 1, queue.push_back({nx, ny});
        }
      }
      sizes.push_back(size);
    }
  std::sort(sizes.begin(), sizes.end());
  return sizes;
}

VisitTotals per_frame_metrics(const ErrorIntervalSet& labels, const Segmentation& seg,
                              const std::vector<double>& ts) {
  VisitTotals totals;
  for (const auto& s : seg.segments) {
    // Step through the segment one frame pair at a time.
    for (int f = s.start_frame; f < s.end_frame; ++f) totals.completion_time += ts[f + 1] - ts[f];
    const auto& ivs = labels.of(s.tower);
    bool prev_in = false;
    for (int f = s.start_frame; f <= s.end_frame; ++f) {
      bool in = false;
      for (const auto& iv : ivs) in = in || (f >= iv.start_frame && f <= iv.end_frame);
      if (in && !prev_in) ++totals.errors;
      if (in && prev_in) totals.error_time += ts[f] - ts[f - 1];
      prev_in = in;
    }
  }
  return totals;
}

ConfusionCounts per_frame_confusion(const ErrorIntervalSet& pred, const ErrorIntervalSet& truth,
                                    const Segmentation& seg, std::optional<TowerId> only) {
  ConfusionCounts c;
  auto member = [](const std::vector<Interval>& ivs, int f) {
    for (const auto& iv : ivs)
      if (f >= iv.start_frame && f <= iv.end_frame) return true;
    return false;
  };
  for (const auto& s : seg.segments) {
    if (only && s.tower != *only) continue;
    for (int f = s.start_frame; f <= s.end_frame; ++f) {
      bool crash = false;
      for (const auto& k : seg.crashes) crash = crash || (f >= k.start_frame && f <= k.end_frame);
      if (crash) continue;
      const bool p = member(pred.of(s.tower), f), t = member(truth.of(s.tower), f);
      if (p && t) ++c.tp;
      else if (!p && !t) ++c.tn;
      else if (p) ++c.fp;
      else ++c.fn;
    }
  }
  return c;
}

Segmentation random_segmentation(std::mt19937_64& rng, int& frame_count) {
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  Segmentation seg;
  seg.source_id = "visit_" + std::to_string(uni(0, 9999));
  int f = uni(0, 5);
  for (TowerId t : kTowerOrder) {
    const int len = uni(2, 60);
    InteractionSegment s;
    s.tower = t;
    s.start_frame = f;
    s.end_frame = f + len - 1;
    s.roi = {uni(0, 20), uni(0, 20), uni(10, 40), uni(10, 40)};
    if (!is_vertical(t)) s.end_zone_x = uni(s.roi.x, s.roi.right() - 1);
    seg.segments.push_back(s);
    f = s.end_frame + 1 + uni(0, 8);
  }
  frame_count = f + uni(0, 5);
  if (uni(0, 1)) {
    const auto& s = seg.segments[static_cast<std::size_t>(uni(0, 3))];
    const int a = uni(s.start_frame, s.end_frame);
    seg.crashes.push_back({a, std::min(s.end_frame, a + uni(0, 10))});
  }
  return seg;
}

ErrorIntervalSet random_labels(std::mt19937_64& rng, const Segmentation& seg) {
  std::bernoulli_distribution start(0.08), stay(0.8);
  ErrorIntervalSet labels;
  labels.provenance = std::bernoulli_distribution(0.5)(rng) ? Provenance::Auto : Provenance::Corrected;
  for (const auto& s : seg.segments) {
    std::vector<int> frames;
    bool on = false;
    for (int f = s.start_frame; f <= s.end_frame; ++f) {
      on = on ? stay(rng) : start(rng);
      if (on) frames.push_back(f);
    }
    std::vector<Interval> ivs;
    for (int f : frames) {
      if (!ivs.empty() && ivs.back().end_frame + 1 == f)
        ivs.back().end_frame = f;
      else
        ivs.push_back({f, f});
    }
    labels.of(s.tower) = ivs;
  }
  return labels;
}

std::vector<double> random_timestamps(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> step(0.8 / 35.0, 1.2 / 35.0);
  std::vector<double> ts(static_cast<std::size_t>(n));
  double t = std::uniform_real_distribution<double>(0.0, 100.0)(rng);
  for (auto& v : ts) {
    v = t;
    t += step(rng);
  }
  return ts;
}

DetectorConfig random_config(std::mt19937_64& rng) {
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  DetectorConfig c;
  c.hue_min = uni(0, 90);
  c.hue_max = uni(c.hue_min + 1, 179);
  c.sat_min = uni(1, 255);
  c.val_max = uni(1, 255);
  c.min_blob_px = uni(1, 500);
  c.ma_window = 2 * uni(0, 5) + 1;
  c.stft_window = 2 * uni(1, 4) + 1;
  c.db_threshold = std::uniform_real_distribution<double>(0.5, 60.0)(rng);
  c.head_frames = uni(1, 20);
  c.head_confirm = uni(1, 10);
  c.merge_gap = uni(1, 20);
  c.lone_window = uni(1, 10);
  c.tail_frames = uni(1, 20);
  c.val_max_ring = uni(1, 255);
  c.min_ring_px = uni(1, 200);
  c.max_ring_tower_dist_px = uni(1, 100);
  c.flow_smoothness = std::uniform_real_distribution<double>(0.1, 5.0)(rng);
  c.flow_iterations = uni(1, 50);
  return c;
}

}  // namespace oracle
