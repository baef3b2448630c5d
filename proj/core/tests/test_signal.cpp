#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ringtower/signal.hpp"

using namespace ringtower;

TEST_CASE("moving average truncates at the ends") {
  const std::vector<double> x{1, 2, 3, 4, 5, 6};
  const auto y = moving_average(x, 5);
  CHECK(y[0] == doctest::Approx(2.0));  // (1+2+3)/3
  CHECK(y[1] == doctest::Approx(2.5));  // (1+2+3+4)/4
  CHECK(y[2] == doctest::Approx(3.0));
  CHECK(y[3] == doctest::Approx(4.0));
  CHECK(y[4] == doctest::Approx(4.5));
  CHECK(y[5] == doctest::Approx(5.0));
  CHECK(moving_average(x, 1) == x);
  CHECK_THROWS_AS(moving_average(x, 4), std::invalid_argument);
  CHECK(moving_average(std::vector<double>{}, 5).empty());
}

TEST_CASE("moving average matches the reference on random signals") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 50.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> x(static_cast<std::size_t>(1 + trial % 40));
    for (auto& v : x) v = g(rng);
    const int w = 2 * (trial % 6) + 1;
    const auto got = moving_average(x, w), want = oracle::moving_average(x, w);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]));
  }
}

TEST_CASE("derivative") {
  const std::vector<double> x{1, 4, 2, 2};
  CHECK(derivative(x) == std::vector<double>{3, -2, 0});
  CHECK_THROWS_AS(derivative(std::vector<double>{1}), std::invalid_argument);
}

TEST_CASE("stft matches a direct 3-point DFT") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-200.0, 200.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::vector<double> w{u(rng), u(rng), u(rng)};
    const Spectrogram s = stft_db(w, 3);
    REQUIRE(s.columns() == 1);
    CHECK(s.centers[0] == 1);
    const auto want = oracle::dft_db(w);
    REQUIRE(s.bands[0].size() == 2);
    CHECK(std::abs(s.bands[0][0] - want[0]) < 1e-9);
    CHECK(std::abs(s.high_band_db(0) - want[1]) < 1e-9);
  }
}

TEST_CASE("stft with wider windows matches the direct DFT") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int window : {5, 7, 9}) {
    std::vector<double> x(30);
    for (auto& v : x) v = u(rng);
    const Spectrogram s = stft_db(x, window);
    REQUIRE(s.columns() == x.size() - static_cast<std::size_t>(window) + 1);
    for (std::size_t c = 0; c < s.columns(); ++c) {
      const std::vector<double> frame(x.begin() + static_cast<long>(c), x.begin() + static_cast<long>(c) + window);
      const auto want = oracle::dft_db(frame);
      REQUIRE(s.bands[c].size() == want.size());
      for (std::size_t k = 0; k < want.size(); ++k) CHECK(std::abs(s.bands[c][k] - want[k]) < 1e-9);
    }
  }
}

TEST_CASE("constant windows have a silent high band") {
  for (double level : {0.0, 1.0, -7.25, 1234.5678, 1e-12}) {
    const std::vector<double> x(6, level);
    const Spectrogram s = stft_db(x, 3);
    for (std::size_t c = 0; c < s.columns(); ++c) {
      CHECK(std::isinf(s.high_band_db(c)));
      CHECK(s.high_band_db(c) < 0);
    }
    for (bool f : threshold_movement(s, x.size())) CHECK_FALSE(f);
  }
  CHECK_THROWS_AS(stft_db(std::vector<double>{1, 2}, 3), std::invalid_argument);
  CHECK_THROWS_AS(stft_db(std::vector<double>{1, 2, 3, 4}, 4), std::invalid_argument);
}

TEST_CASE("threshold is strict and fills the edges") {
  // A step of height a in a 3-point window [0, 0, a] gives |X_1| = a.
  const double at_threshold = std::pow(10.0, 20.0 / 20.0);
  {
    const std::vector<double> x{0, 0, at_threshold, at_threshold, at_threshold};
    const Spectrogram s = stft_db(x, 3);
    CHECK(s.high_band_db(0) == doctest::Approx(20.0));
    const auto flags = threshold_movement(s, x.size(), s.high_band_db(0));
    CHECK_FALSE(flags[1]);
  }
  const std::vector<double> x{0, 0, 0, 0, 50, 50, 50, 50};
  const Spectrogram s = stft_db(x, 3);
  const auto flags = threshold_movement(s, x.size(), 20.0);
  CHECK(flags == std::vector<bool>{false, false, false, true, true, false, false, false});

  const std::vector<double> y{50, 0, 0, 0, 0, 0, 0, 50};
  const auto edge = threshold_movement(stft_db(y, 3), y.size(), 20.0);
  CHECK(edge.front());
  CHECK(edge[1]);
  CHECK(edge[6]);
  CHECK(edge.back());
}
