#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "ringtower/detector.hpp"
#include "ringtower/metrics.hpp"
#include "ringtower/synth.hpp"

using namespace ringtower;

namespace {

InteractionSegment segment(TowerId tower, int start, int end) {
  InteractionSegment s{tower, start, end, {0, 0, 10, 10}, std::nullopt};
  if (!is_vertical(tower)) s.end_zone_x = 5;
  return s;
}

std::vector<bool> flags_at(const InteractionSegment& s, std::initializer_list<Interval> on) {
  std::vector<bool> f(static_cast<std::size_t>(s.length()), false);
  for (const auto& iv : on)
    for (int i = iv.start_frame; i <= iv.end_frame; ++i) f[static_cast<std::size_t>(i - s.start_frame)] = true;
  return f;
}

std::vector<bool> flags_of(const std::vector<Interval>& ivs, const InteractionSegment& s) {
  std::vector<bool> f(static_cast<std::size_t>(s.length()), false);
  for (const auto& iv : ivs)
    for (int i = iv.start_frame; i <= iv.end_frame; ++i) f[static_cast<std::size_t>(i - s.start_frame)] = true;
  return f;
}

}  // namespace

TEST_CASE("cleanup worked examples") {
  const DetectorConfig c;
  const auto rv = segment(TowerId::RV, 0, 99);

  CHECK(cleanup(flags_at(rv, {{5, 8}, {12, 15}}), rv, {}, c) == std::vector<Interval>{{5, 15}});
  CHECK(cleanup(flags_at(rv, {{20, 20}}), rv, {}, c).empty());

  const auto rv_late = segment(TowerId::RV, 50, 200);
  CHECK(cleanup(flags_at(rv_late, {{193, 194}}), rv_late, {}, c) == std::vector<Interval>{{193, 200}});
  const auto lh_late = segment(TowerId::LH, 50, 200);
  CHECK(cleanup(flags_at(lh_late, {{193, 194}}), lh_late, {}, c) == std::vector<Interval>{{193, 194}});
}

TEST_CASE("head detections need confirmation") {
  const DetectorConfig c;
  const auto rv = segment(TowerId::RV, 100, 199);
  // A single flag at the start with nothing after it is dropped.
  CHECK(cleanup(flags_at(rv, {{100, 100}}), rv, {}, c).empty());
  // Confirmed by a run four frames later that is itself confirmed.
  CHECK(cleanup(flags_at(rv, {{101, 101}, {105, 107}}), rv, {}, c) == std::vector<Interval>{{101, 107}});
  // The later run fails its own check, so it cannot confirm the earlier one.
  CHECK(cleanup(flags_at(rv, {{101, 101}, {105, 105}}), rv, {}, c).empty());
  // The confirming flag is six frames away, past the window.
  CHECK(cleanup(flags_at(rv, {{102, 102}, {108, 108}}), rv, {}, c).empty());
  // Outside the head the same pair survives.
  CHECK(cleanup(flags_at(rv, {{130, 130}, {136, 136}}), rv, {}, c) == std::vector<Interval>{{130, 136}});
}

TEST_CASE("merge gap and lone samples") {
  const DetectorConfig c;
  const auto rv = segment(TowerId::RV, 0, 99);
  CHECK(cleanup(flags_at(rv, {{30, 32}, {43, 45}}), rv, {}, c) == std::vector<Interval>{{30, 32}, {43, 45}});
  CHECK(cleanup(flags_at(rv, {{30, 32}, {42, 45}}), rv, {}, c) == std::vector<Interval>{{30, 45}});
  CHECK(cleanup(flags_at(rv, {{30, 30}, {36, 36}}), rv, {}, c) == std::vector<Interval>{{30, 36}});
  CHECK(cleanup(flags_at(rv, {{30, 30}, {36, 37}}), rv, {}, c) == std::vector<Interval>{{30, 37}});
  CHECK(cleanup(flags_at(rv, {{50, 51}}), rv, {}, c) == std::vector<Interval>{{50, 51}});
}

TEST_CASE("crash frames are never flagged and block merges") {
  const DetectorConfig c;
  const auto rv = segment(TowerId::RV, 0, 99);
  const std::vector<CrashInterval> crash{{40, 44}};
  CHECK(cleanup(flags_at(rv, {{30, 50}}), rv, crash, c) == std::vector<Interval>{{30, 39}, {45, 50}});
  CHECK(cleanup(flags_at(rv, {{36, 39}, {45, 47}}), rv, crash, c) == std::vector<Interval>{{36, 39}, {45, 47}});
  // Tail extension stops at crash frames.
  const std::vector<CrashInterval> tail_crash{{95, 97}};
  CHECK(cleanup(flags_at(rv, {{91, 92}}), rv, tail_crash, c) == std::vector<Interval>{{91, 94}, {98, 99}});
  CHECK_THROWS_AS(cleanup(std::vector<bool>(5), rv, {}, c), std::invalid_argument);
}

TEST_CASE("cleanup is idempotent and well formed") {
  const DetectorConfig c;
  std::mt19937_64 rng(12);
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  for (int trial = 0; trial < 10000; ++trial) {
    const TowerId tower = kTowerOrder[static_cast<std::size_t>(uni(0, 3))];
    const int start = uni(0, 50);
    const auto s = segment(tower, start, start + uni(1, 120));
    std::vector<CrashInterval> crashes;
    for (int k = uni(0, 2); k > 0; --k) {
      const int a = uni(s.start_frame, s.end_frame);
      crashes.push_back({a, std::min(s.end_frame, a + uni(0, 12))});
    }
    const double density = std::uniform_real_distribution<double>(0.02, 0.6)(rng);
    std::vector<bool> flags(static_cast<std::size_t>(s.length()));
    for (auto&& f : flags) f = std::bernoulli_distribution(density)(rng);

    const auto once = cleanup(flags, s, crashes, c);
    const auto twice = cleanup(flags_of(once, s), s, crashes, c);
    CHECK(twice == once);

    for (std::size_t i = 0; i < once.size(); ++i) {
      CHECK(once[i].start_frame <= once[i].end_frame);
      CHECK(s.contains(once[i].start_frame));
      CHECK(s.contains(once[i].end_frame));
      if (i > 0) CHECK(once[i].start_frame > once[i - 1].end_frame + 1);
      for (const auto& k : crashes)
        CHECK((once[i].end_frame < k.start_frame || once[i].start_frame > k.end_frame));
    }
  }
}

TEST_CASE("end zone exclusion") {
  InteractionSegment lh{TowerId::LH, 10, 29, {0, 0, 100, 50}, 60};
  std::vector<std::optional<Point>> c(20);
  for (int i = 0; i < 20; ++i) c[static_cast<std::size_t>(i)] = Point{20.0 + 4.0 * i, 10.0};
  c[5].reset();
  // x reaches 60 at local index 10, frame 20.
  CHECK(end_zone_entry(c, lh) == 20);
  const std::vector<Interval> ivs{{12, 14}, {18, 24}, {26, 28}};
  CHECK(exclude_end_zone(ivs, c, lh) == std::vector<Interval>{{12, 14}, {18, 19}});

  // Leftward travel on RH: entry is the first centroid at or left of the line.
  InteractionSegment rh{TowerId::RH, 0, 9, {0, 0, 100, 50}, 40};
  std::vector<std::optional<Point>> left(10);
  for (int i = 0; i < 10; ++i) left[static_cast<std::size_t>(i)] = Point{80.0 - 6.0 * i, 5.0};
  CHECK(end_zone_entry(left, rh) == 7);

  // Never entering keeps everything; an unseen ring keeps everything.
  std::vector<std::optional<Point>> none(20);
  CHECK_FALSE(end_zone_entry(none, lh));
  CHECK(exclude_end_zone(ivs, none, lh) == ivs);

  CHECK_THROWS_AS(end_zone_entry(c, segment(TowerId::RV, 10, 29)), InputError);
}

TEST_CASE("motion signal on a static scene is zero") {
  CaseSpec spec;
  spec.segment_frames = {40, 40, 40, 40};
  spec.show_ring = false;
  spec.show_instrument = false;
  const SyntheticCase sc = render(build_script(spec));
  const DetectorConfig c;
  const auto& s = sc.segmentation.segments[0];
  const MotionSignal m = motion_signal(sc.frames, s, c);
  CHECK(m.size() == static_cast<std::size_t>(s.length() - 1));
  CHECK(m.frames.front() == s.start_frame + 1);
  for (double v : m.values) CHECK(v == 0.0);
  const VisitDetection d = detect_visit(sc.frames, sc.segmentation, c);
  CHECK(d.labels.empty());
}

TEST_CASE("detector finds a scripted knock and is deterministic") {
  CaseSpec spec;
  spec.seed = 77;
  spec.segment_frames = {130, 60, 60, 60};
  const auto ranges = segment_ranges(spec);
  spec.jitters.push_back({TowerId::RV, ranges[0].first + 20, ranges[0].first + 100, 3, 0, true});
  const SyntheticCase sc = render(build_script(spec));
  REQUIRE(sc.truth.of(TowerId::RV) == std::vector<Interval>{{ranges[0].first + 20, ranges[0].first + 100}});

  const DetectorConfig c;
  const VisitDetection a = detect_visit(sc.frames, sc.segmentation, c);
  const VisitDetection b = detect_visit(sc.frames, sc.segmentation, c);
  CHECK(a.labels == b.labels);
  CHECK(a.labels.provenance == Provenance::Auto);

  const ConfusionReport r = confusion(a.labels, sc.truth, sc.segmentation);
  CHECK(r.pooled.fn == 0);
  CHECK(r.pooled.f1().value() > 0.9);
  for (TowerId t : {TowerId::LH, TowerId::LV, TowerId::RH}) CHECK(a.labels.of(t).empty());

  const DetectionTrace& tr = a.traces[0];
  CHECK(tr.raw.size() == static_cast<std::size_t>(sc.segmentation.segments[0].length()));
  CHECK(std::isnan(tr.raw[0]));
  CHECK(std::isnan(tr.derivative[1]));
  CHECK_FALSE(std::isnan(tr.derivative[2]));
}

TEST_CASE("crash frames get no motion and no flags") {
  CaseSpec spec;
  spec.seed = 5;
  spec.segment_frames = {130, 60, 60, 60};
  const auto ranges = segment_ranges(spec);
  const int s = ranges[0].first;
  spec.jitters.push_back({TowerId::RV, s + 30, s + 100, 3, 0, true});
  spec.crashes.push_back({s + 50, s + 60});
  const SyntheticCase sc = render(build_script(spec));
  const DetectionTrace t =
      detect_interaction(sc.frames, sc.segmentation.segments[0], sc.segmentation.crashes, DetectorConfig{});
  for (int f = s + 50; f <= s + 60; ++f) {
    const auto i = static_cast<std::size_t>(f - s);
    CHECK(t.crash[i]);
    CHECK(std::isnan(t.raw[i]));
    CHECK_FALSE(t.movement[i]);
  }
  for (const auto& iv : t.intervals) CHECK((iv.end_frame < s + 50 || iv.start_frame > s + 60));
}
