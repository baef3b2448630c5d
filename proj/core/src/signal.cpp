#include "ringtower/signal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ringtower {

std::vector<double> moving_average(std::span<const double> signal, int window) {
  if (window < 1 || window % 2 == 0)
    throw std::invalid_argument("moving_average: window must be odd and >= 1");
  const long n = static_cast<long>(signal.size());
  const long half = window / 2;
  std::vector<double> out(signal.size());
  for (long i = 0; i < n; ++i) {
    const long lo = std::max(0L, i - half);
    const long hi = std::min(n - 1, i + half);
    double sum = 0.0;
    for (long j = lo; j <= hi; ++j) sum += signal[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

std::vector<double> derivative(std::span<const double> signal) {
  if (signal.size() < 2) throw std::invalid_argument("derivative: need at least 2 samples");
  std::vector<double> out(signal.size() - 1);
  for (std::size_t i = 0; i + 1 < signal.size(); ++i) out[i] = signal[i + 1] - signal[i];
  return out;
}

namespace {

double to_db(double magnitude) {
  return magnitude == 0.0 ? -std::numeric_limits<double>::infinity()
                          : 20.0 * std::log10(magnitude);
}

}  // namespace

Spectrogram stft_db(std::span<const double> signal, int window) {
  if (window < 3 || window % 2 == 0)
    throw std::invalid_argument("stft_db: window must be odd and >= 3");
  if (signal.size() < static_cast<std::size_t>(window))
    throw std::invalid_argument("stft_db: signal shorter than the window");

  const int half = window / 2;
  const int bins = half + 1;
  std::vector<double> cos_tab(static_cast<std::size_t>(window * bins));
  std::vector<double> sin_tab(cos_tab.size());
  for (int k = 0; k < bins; ++k)
    for (int n = 0; n < window; ++n) {
      const double phase = 2.0 * std::numbers::pi * k * n / window;
      cos_tab[static_cast<std::size_t>(k * window + n)] = std::cos(phase);
      sin_tab[static_cast<std::size_t>(k * window + n)] = std::sin(phase);
    }

  Spectrogram spec;
  spec.window = window;
  const std::size_t columns = signal.size() - static_cast<std::size_t>(window) + 1;
  spec.centers.reserve(columns);
  spec.bands.reserve(columns);
  for (std::size_t start = 0; start < columns; ++start) {
    const auto frame = signal.subspan(start, static_cast<std::size_t>(window));
    std::vector<double> column(static_cast<std::size_t>(bins));

    double dc = 0.0;
    for (double x : frame) dc += x;
    column[0] = to_db(std::abs(dc));

    // Bins k >= 1 are taken over the window minus its first sample.
    for (int k = 1; k < bins; ++k) {
      double re = 0.0, im = 0.0;
      for (int n = 1; n < window; ++n) {
        const double x = frame[static_cast<std::size_t>(n)] - frame[0];
        re += x * cos_tab[static_cast<std::size_t>(k * window + n)];
        im -= x * sin_tab[static_cast<std::size_t>(k * window + n)];
      }
      column[static_cast<std::size_t>(k)] = to_db(std::hypot(re, im));
    }
    spec.centers.push_back(static_cast<int>(start) + half);
    spec.bands.push_back(std::move(column));
  }
  return spec;
}

std::vector<bool> threshold_movement(const Spectrogram& spec, std::size_t signal_length,
                                     double db_threshold) {
  std::vector<bool> flags(signal_length, false);
  if (spec.columns() == 0) return flags;
  for (std::size_t c = 0; c < spec.columns(); ++c) {
    const auto center = static_cast<std::size_t>(spec.centers[c]);
    if (center < signal_length) flags[center] = spec.high_band_db(c) > db_threshold;
  }
  const auto first = static_cast<std::size_t>(spec.centers.front());
  const auto last = static_cast<std::size_t>(spec.centers.back());
  for (std::size_t i = 0; i < first && i < signal_length; ++i) flags[i] = flags[first];
  for (std::size_t i = last + 1; i < signal_length; ++i) flags[i] = flags[last];
  return flags;
}

}  // namespace ringtower
