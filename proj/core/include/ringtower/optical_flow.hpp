#pragma once

#include "ringtower/image.hpp"
#include "ringtower/vision.hpp"

namespace ringtower {

// Dense velocities in pixels per frame pair.
struct FlowField {
  Grid<double> vx;
  Grid<double> vy;
  Grid<double> magnitude;

  int width() const { return vx.width(); }
  int height() const { return vx.height(); }
};

// Luminance 0.299R + 0.587G + 0.114B, scaled to [0,1].
GrayImage to_gray(const RgbImage& image);

// Horn-Schunck flow between two frames.
//
// Spatial derivatives are centered differences averaged over both frames, the
// temporal derivative is the forward difference next - prev, and `iterations`
// Jacobi sweeps update
//   u = ū - Ix (Ix ū + Iy v̄ + It) / (α² + Ix² + Iy²)
// (likewise for v) where ū, v̄ are the 1/6 edge, 1/12 corner weighted
// neighborhood means. All stencils clamp at the image border. Flow starts at zero.
//
// Throws std::invalid_argument on size mismatch, iterations < 1 or α <= 0.
FlowField horn_schunck(const GrayImage& prev, const GrayImage& next, double smoothness,
                       int iterations);
FlowField horn_schunck(const RgbImage& prev, const RgbImage& next, double smoothness,
                       int iterations);

// Flow restricted to `window`, computed on a crop grown by iterations + 2
// pixels on each side (clamped to the frame). Stencil influence travels one
// pixel per sweep, so inside `window` the result equals full-frame
// horn_schunck exactly. The returned field has the window's size.
FlowField horn_schunck_window(const GrayImage& prev, const GrayImage& next, const Rect& window,
                              double smoothness, int iterations);

// Σ magnitude over the set pixels of `mask`. Throws std::invalid_argument on size mismatch.
double flow_into_mask_sum(const FlowField& field, const BinaryMask& mask);

// Same sum where the field covers only `window` of the mask's frame.
double flow_into_mask_sum(const FlowField& field, const BinaryMask& mask, const Rect& window);

}  // namespace ringtower
