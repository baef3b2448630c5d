#include "ringtower/optical_flow.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ringtower {

GrayImage to_gray(const RgbImage& image) {
  GrayImage gray(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x) {
      const Rgb p = image(x, y);
      gray(x, y) = (0.299 * p.r + 0.587 * p.g + 0.114 * p.b) / 255.0;
    }
  return gray;
}

namespace {

constexpr double kEdge = 1.0 / 6.0;
constexpr double kCorner = 1.0 / 12.0;

GrayImage crop(const GrayImage& image, const Rect& r) {
  GrayImage out(r.width, r.height);
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x) out(x, y) = image(r.x + x, r.y + y);
  return out;
}

Grid<double> crop(const Grid<double>& g, int ox, int oy, int w, int h) {
  Grid<double> out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out(x, y) = g(ox + x, oy + y);
  return out;
}

}  // namespace

FlowField horn_schunck(const GrayImage& prev, const GrayImage& next, double smoothness,
                       int iterations) {
  if (!prev.same_shape(next)) throw std::invalid_argument("horn_schunck: frame size mismatch");
  if (iterations < 1) throw std::invalid_argument("horn_schunck: iterations must be >= 1");
  if (!(smoothness > 0.0)) throw std::invalid_argument("horn_schunck: smoothness must be positive");

  const int w = prev.width(), h = prev.height();
  Grid<double> ix(w, h), iy(w, h), it(w, h), inv_denom(w, h);
  const double alpha2 = smoothness * smoothness;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx0 = prev.clamped(x + 1, y) - prev.clamped(x - 1, y);
      const double dx1 = next.clamped(x + 1, y) - next.clamped(x - 1, y);
      const double dy0 = prev.clamped(x, y + 1) - prev.clamped(x, y - 1);
      const double dy1 = next.clamped(x, y + 1) - next.clamped(x, y - 1);
      ix(x, y) = 0.25 * (dx0 + dx1);
      iy(x, y) = 0.25 * (dy0 + dy1);
      it(x, y) = next(x, y) - prev(x, y);
      inv_denom(x, y) = 1.0 / (alpha2 + ix(x, y) * ix(x, y) + iy(x, y) * iy(x, y));
    }
  }

  Grid<double> u(w, h, 0.0), v(w, h, 0.0), u_next(w, h), v_next(w, h);
  for (int n = 0; n < iterations; ++n) {
    const double* U = u.values().data();
    const double* V = v.values().data();
    for (int y = 0; y < h; ++y) {
      const std::size_t r0 = static_cast<std::size_t>(y) * w;
      const std::size_t rm = static_cast<std::size_t>(y > 0 ? y - 1 : 0) * w;
      const std::size_t rp = static_cast<std::size_t>(y + 1 < h ? y + 1 : h - 1) * w;
      const double* cix = &ix.values()[r0];
      const double* ciy = &iy.values()[r0];
      const double* cit = &it.values()[r0];
      const double* cden = &inv_denom.values()[r0];
      double* un = &u_next.values()[r0];
      double* vn = &v_next.values()[r0];
      for (int x = 0; x < w; ++x) {
        const int xl = x > 0 ? x - 1 : 0;
        const int xr = x + 1 < w ? x + 1 : w - 1;
        const double ub = (U[r0 + xl] + U[r0 + xr] + U[rm + x] + U[rp + x]) * kEdge +
                          (U[rm + xl] + U[rm + xr] + U[rp + xl] + U[rp + xr]) * kCorner;
        const double vb = (V[r0 + xl] + V[r0 + xr] + V[rm + x] + V[rp + x]) * kEdge +
                          (V[rm + xl] + V[rm + xr] + V[rp + xl] + V[rp + xr]) * kCorner;
        const double t = (cix[x] * ub + ciy[x] * vb + cit[x]) * cden[x];
        un[x] = ub - cix[x] * t;
        vn[x] = vb - ciy[x] * t;
      }
    }
    std::swap(u, u_next);
    std::swap(v, v_next);
  }

  FlowField field{std::move(u), std::move(v), Grid<double>(w, h)};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      field.magnitude(x, y) = std::hypot(field.vx(x, y), field.vy(x, y));
  return field;
}

FlowField horn_schunck(const RgbImage& prev, const RgbImage& next, double smoothness,
                       int iterations) {
  return horn_schunck(to_gray(prev), to_gray(next), smoothness, iterations);
}

FlowField horn_schunck_window(const GrayImage& prev, const GrayImage& next, const Rect& window,
                              double smoothness, int iterations) {
  if (!prev.same_shape(next)) throw std::invalid_argument("horn_schunck: frame size mismatch");
  if (window.x < 0 || window.y < 0 || window.empty() || window.right() > prev.width() ||
      window.bottom() > prev.height())
    throw std::invalid_argument("horn_schunck_window: window outside the frame");

  const int margin = std::max(iterations, 0) + 2;
  const int x0 = std::max(0, window.x - margin);
  const int y0 = std::max(0, window.y - margin);
  const int x1 = std::min(prev.width(), window.right() + margin);
  const int y1 = std::min(prev.height(), window.bottom() + margin);
  const Rect grown{x0, y0, x1 - x0, y1 - y0};

  FlowField full = horn_schunck(crop(prev, grown), crop(next, grown), smoothness, iterations);
  const int ox = window.x - x0, oy = window.y - y0;
  return FlowField{crop(full.vx, ox, oy, window.width, window.height),
                   crop(full.vy, ox, oy, window.width, window.height),
                   crop(full.magnitude, ox, oy, window.width, window.height)};
}

double flow_into_mask_sum(const FlowField& field, const BinaryMask& mask) {
  if (field.width() != mask.width() || field.height() != mask.height())
    throw std::invalid_argument("flow_into_mask_sum: size mismatch");
  double sum = 0.0;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.get(x, y)) sum += field.magnitude(x, y);
  return sum;
}

double flow_into_mask_sum(const FlowField& field, const BinaryMask& mask, const Rect& window) {
  if (field.width() != window.width || field.height() != window.height ||
      window.right() > mask.width() || window.bottom() > mask.height() || window.x < 0 ||
      window.y < 0)
    throw std::invalid_argument("flow_into_mask_sum: window does not match the field");
  double sum = 0.0;
  for (int y = 0; y < window.height; ++y)
    for (int x = 0; x < window.width; ++x)
      if (mask.get(window.x + x, window.y + y)) sum += field.magnitude(x, y);
  return sum;
}

}  // namespace ringtower
