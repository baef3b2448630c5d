#pragma once

#include <span>
#include <vector>

namespace ringtower {

// Centered moving average; near the ends the window is truncated to the
// samples that exist. Throws std::invalid_argument unless window is odd and >= 1.
std::vector<double> moving_average(std::span<const double> signal, int window);

// First difference x[i+1] - x[i]. Throws std::invalid_argument for fewer than 2 samples.
std::vector<double> derivative(std::span<const double> signal);

// Short-time spectrum with a rectangular window and hop 1. Column c is the
// window centred on sample centers[c]; bands[c][k] is 20·log10|X_k| for the
// unique bins k = 0 .. window/2, with -inf for a zero magnitude.
struct Spectrogram {
  int window = 3;
  std::vector<int> centers;
  std::vector<std::vector<double>> bands;

  std::size_t columns() const { return centers.size(); }
  double high_band_db(std::size_t column) const { return bands[column][1]; }
};

// Throws std::invalid_argument if window is even or < 3, or the signal is
// shorter than the window.
Spectrogram stft_db(std::span<const double> signal, int window = 3);

// One flag per sample of the transformed signal: true at a column's center
// iff its high band exceeds `db_threshold` strictly. Samples without a full
// window take the flag of the nearest column.
std::vector<bool> threshold_movement(const Spectrogram& spec, std::size_t signal_length,
                                     double db_threshold = 20.0);

}  // namespace ringtower
