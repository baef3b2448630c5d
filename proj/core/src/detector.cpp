#include "ringtower/detector.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>

#include "ringtower/optical_flow.hpp"

namespace ringtower {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

BinaryMask roi_tower_mask(const Frame& frame, const Rect& roi, const DetectorConfig& config) {
  return restrict_roi(tower_mask(frame.pixels, config), roi);
}

double pair_motion(const GrayImage& prev, const GrayImage& next, const BinaryMask& tower,
                   const Rect& roi, const DetectorConfig& config) {
  const FlowField flow =
      horn_schunck_window(prev, next, roi, config.flow_smoothness, config.flow_iterations);
  return flow_into_mask_sum(flow, tower, roi);
}

// Motion over [first, last]; `mask_of(k)` yields the roi tower mask of frame k.
template <typename MaskOf>
MotionSignal motion_over(const FrameSequence& frames, int first, int last, const Rect& roi,
                         const DetectorConfig& config, MaskOf&& mask_of) {
  MotionSignal signal;
  GrayImage prev = to_gray(frames[first].pixels);
  if (first == 0) {
    const GrayImage black(prev.width(), prev.height(), 0.0);
    signal.frames.push_back(0);
    signal.values.push_back(pair_motion(black, prev, mask_of(0), roi, config));
    signal.timestamps.push_back(frames.timestamp(0));
  }
  for (int k = first + 1; k <= last; ++k) {
    GrayImage next = to_gray(frames[k].pixels);
    signal.frames.push_back(k);
    signal.values.push_back(pair_motion(prev, next, mask_of(k), roi, config));
    signal.timestamps.push_back(frames.timestamp(k));
    prev = std::move(next);
  }
  return signal;
}

void check_range(const FrameSequence& frames, int first, int last) {
  if (first < 0 || last >= frames.size() || first > last)
    throw InputError("segmentation", "frame range outside the recording");
}

// Half-open runs [begin, end) of true values.
std::vector<std::pair<int, int>> runs_of(const std::vector<bool>& v) {
  std::vector<std::pair<int, int>> runs;
  const int n = static_cast<int>(v.size());
  for (int i = 0; i < n;) {
    if (!v[static_cast<std::size_t>(i)]) {
      ++i;
      continue;
    }
    int j = i;
    while (j < n && v[static_cast<std::size_t>(j)]) ++j;
    runs.push_back({i, j});
    i = j;
  }
  return runs;
}

std::vector<bool> crash_flags(const InteractionSegment& segment,
                              const std::vector<CrashInterval>& crashes) {
  std::vector<bool> crash(static_cast<std::size_t>(segment.length()), false);
  for (const auto& c : crashes)
    for (int f = std::max(c.start_frame, segment.start_frame);
         f <= std::min(c.end_frame, segment.end_frame); ++f)
      crash[static_cast<std::size_t>(f - segment.start_frame)] = true;
  return crash;
}

}  // namespace

MotionSignal motion_signal(const FrameSequence& frames, int first, int last, const Rect& roi,
                           const DetectorConfig& config) {
  check_range(frames, first, last);
  return motion_over(frames, first, last, roi, config,
                     [&](int k) { return roi_tower_mask(frames[k], roi, config); });
}

MotionSignal motion_signal(const FrameSequence& frames, const InteractionSegment& segment,
                           const DetectorConfig& config) {
  return motion_signal(frames, segment.start_frame, segment.end_frame, segment.roi, config);
}

std::vector<Interval> cleanup(const std::vector<bool>& flags_in, const InteractionSegment& segment,
                              const std::vector<CrashInterval>& crashes,
                              const DetectorConfig& config) {
  const int n = segment.length();
  if (static_cast<int>(flags_in.size()) != n)
    throw std::invalid_argument("cleanup: flags do not match the segment length");

  const std::vector<bool> crash = crash_flags(segment, crashes);
  std::vector<bool> flags(flags_in);
  for (int i = 0; i < n; ++i)
    if (crash[static_cast<std::size_t>(i)]) flags[static_cast<std::size_t>(i)] = false;

  // Last index of the crash-free stretch containing i.
  std::vector<int> stretch_end(static_cast<std::size_t>(n), -1);
  for (int i = n - 1, end = -1; i >= 0; --i) {
    if (crash[static_cast<std::size_t>(i)]) {
      end = -1;
      continue;
    }
    if (end < 0) end = i;
    stretch_end[static_cast<std::size_t>(i)] = end;
  }

  // R1: head confirmation, from the latest run backwards; confirmations come
  // only from runs that are still flagged.
  {
    const auto runs = runs_of(flags);
    for (auto r = runs.rbegin(); r != runs.rend(); ++r) {
      const auto [b, e] = *r;
      if (b >= config.head_frames) continue;
      const int last = std::min(b + config.head_confirm, stretch_end[static_cast<std::size_t>(b)]);
      bool continued = last == b;
      for (int i = b + 1; i <= last && !continued; ++i) continued = flags[static_cast<std::size_t>(i)];
      if (!continued)
        for (int i = b; i < e; ++i) flags[static_cast<std::size_t>(i)] = false;
    }
  }

  // R2: merge nearby detections within a crash-free stretch.
  {
    const auto runs = runs_of(flags);
    for (std::size_t r = 1; r < runs.size(); ++r) {
      const int prev_last = runs[r - 1].second - 1;
      const int next_first = runs[r].first;
      if (next_first - prev_last > config.merge_gap) continue;
      if (stretch_end[static_cast<std::size_t>(prev_last)] < next_first) continue;
      for (int i = prev_last + 1; i < next_first; ++i) flags[static_cast<std::size_t>(i)] = true;
    }
  }

  // R3: lone samples.
  {
    const std::vector<bool> before(flags);
    for (auto [b, e] : runs_of(before)) {
      if (e - b != 1) continue;
      bool neighbor = false;
      for (int j = std::max(0, b - config.lone_window);
           j <= std::min(n - 1, b + config.lone_window) && !neighbor; ++j)
        neighbor = j != b && before[static_cast<std::size_t>(j)];
      if (!neighbor) flags[static_cast<std::size_t>(b)] = false;
    }
  }

  // R4: vertical towers keep a late error open until the end of the interaction.
  if (is_vertical(segment.tower)) {
    for (int i = n - 1; i >= std::max(0, n - config.tail_frames); --i) {
      if (!flags[static_cast<std::size_t>(i)]) continue;
      for (int j = i; j < n; ++j)
        if (!crash[static_cast<std::size_t>(j)]) flags[static_cast<std::size_t>(j)] = true;
      break;
    }
  }

  std::vector<Interval> out;
  for (auto [b, e] : runs_of(flags))
    out.push_back({segment.start_frame + b, segment.start_frame + e - 1});
  return out;
}

std::optional<int> end_zone_entry(const std::vector<std::optional<Point>>& centroids,
                                  const InteractionSegment& segment) {
  if (is_vertical(segment.tower) || !segment.end_zone_x)
    throw InputError("segmentation", "end zone applies to horizontal towers only");

  std::optional<double> first_x, last_x;
  for (const auto& c : centroids) {
    if (!c) continue;
    if (!first_x) first_x = c->x;
    last_x = c->x;
  }
  if (!first_x || *last_x == *first_x) return std::nullopt;
  const bool rightward = *last_x > *first_x;
  const double limit = *segment.end_zone_x;

  std::optional<double> carried;
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    if (centroids[i]) carried = centroids[i]->x;
    if (!carried) continue;
    if (rightward ? *carried >= limit : *carried <= limit)
      return segment.start_frame + static_cast<int>(i);
  }
  return std::nullopt;
}

std::vector<Interval> exclude_end_zone(const std::vector<Interval>& intervals,
                                       const std::vector<std::optional<Point>>& centroids,
                                       const InteractionSegment& segment) {
  const std::optional<int> entry = end_zone_entry(centroids, segment);
  if (!entry) return intervals;
  std::vector<Interval> out;
  for (const auto& iv : intervals) {
    if (iv.start_frame >= *entry) continue;
    out.push_back({iv.start_frame, std::min(iv.end_frame, *entry - 1)});
  }
  return out;
}

DetectionTrace detect_interaction(const FrameSequence& frames, const InteractionSegment& segment,
                                  const std::vector<CrashInterval>& crashes,
                                  const DetectorConfig& config) {
  check_range(frames, segment.start_frame, segment.end_frame);
  const int n = segment.length();
  const auto local = [&](int frame) { return static_cast<std::size_t>(frame - segment.start_frame); };

  DetectionTrace trace;
  trace.segment = segment;
  trace.raw.assign(static_cast<std::size_t>(n), kNaN);
  trace.filtered.assign(static_cast<std::size_t>(n), kNaN);
  trace.derivative.assign(static_cast<std::size_t>(n), kNaN);
  trace.high_band_db.assign(static_cast<std::size_t>(n), kNaN);
  trace.movement.assign(static_cast<std::size_t>(n), false);
  trace.crash = crash_flags(segment, crashes);

  std::vector<BinaryMask> towers(static_cast<std::size_t>(n));
  for (int f = segment.start_frame; f <= segment.end_frame; ++f)
    if (!trace.crash[local(f)]) towers[local(f)] = roi_tower_mask(frames[f], segment.roi, config);
  auto lookup = [&](int f) -> const BinaryMask& { return towers[local(f)]; };

  // Each crash-free stretch is processed on its own; no frame pair spans a crash.
  for (auto [b, e] : runs_of([&] {
         std::vector<bool> ok(trace.crash.size());
         for (std::size_t i = 0; i < ok.size(); ++i) ok[i] = !trace.crash[i];
         return ok;
       }())) {
    const int first = segment.start_frame + b;
    const int last = segment.start_frame + e - 1;
    const MotionSignal signal = motion_over(frames, first, last, segment.roi, config, lookup);
    const std::size_t len = signal.size();
    for (std::size_t j = 0; j < len; ++j) trace.raw[local(signal.frames[j])] = signal.values[j];
    if (len < 2) continue;

    const std::vector<double> filtered = moving_average(signal.values, config.ma_window);
    const std::vector<double> diff = derivative(filtered);
    for (std::size_t j = 0; j < len; ++j) trace.filtered[local(signal.frames[j])] = filtered[j];
    // diff[j] belongs to the later frame of its difference.
    for (std::size_t j = 0; j < diff.size(); ++j)
      trace.derivative[local(signal.frames[j + 1])] = diff[j];
    if (diff.size() < static_cast<std::size_t>(config.stft_window)) continue;

    const Spectrogram spec = stft_db(diff, config.stft_window);
    for (std::size_t c = 0; c < spec.columns(); ++c)
      trace.high_band_db[local(signal.frames[static_cast<std::size_t>(spec.centers[c]) + 1])] =
          spec.high_band_db(c);
    const std::vector<bool> moving = threshold_movement(spec, diff.size(), config.db_threshold);
    for (std::size_t j = 0; j < diff.size(); ++j)
      trace.movement[local(signal.frames[j + 1])] = moving[j];
    // Leading frames without a derivative sample take the nearest one's flag.
    for (int f = first; f < signal.frames[1]; ++f) trace.movement[local(f)] = moving.front();
  }

  trace.intervals = cleanup(trace.movement, segment, crashes, config);

  if (!is_vertical(segment.tower)) {
    trace.ring_centroids.assign(static_cast<std::size_t>(n), std::nullopt);
    for (int f = segment.start_frame; f <= segment.end_frame; ++f) {
      if (trace.crash[local(f)]) continue;
      trace.ring_centroids[local(f)] =
          ring_centroid(ring_mask(frames[f].pixels, towers[local(f)], config));
    }
    trace.end_zone_entry = end_zone_entry(trace.ring_centroids, segment);
    trace.intervals = exclude_end_zone(trace.intervals, trace.ring_centroids, segment);
  }
  return trace;
}

VisitDetection detect_visit(const FrameSequence& frames, const Segmentation& seg,
                            const DetectorConfig& config) {
  validate_segmentation(seg, frames.size(), frames.width(), frames.height());
  std::array<std::future<DetectionTrace>, 4> jobs;
  for (std::size_t i = 0; i < 4; ++i) {
    const InteractionSegment& s = seg.segments[i];
    jobs[i] = std::async(std::launch::async, [&frames, &seg, &config, &s] {
      return detect_interaction(frames, s, seg.crashes_in(s), config);
    });
  }
  VisitDetection out;
  out.labels.provenance = Provenance::Auto;
  for (std::size_t i = 0; i < 4; ++i) {
    out.traces[i] = jobs[i].get();
    out.labels.intervals[slot(seg.segments[i].tower)] = out.traces[i].intervals;
  }
  return out;
}

void write_trace_csv(const DetectionTrace& trace, const FrameSequence& frames,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("trace", "cannot write " + path.string());
  auto num = [](double v) -> std::string {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  };
  out << "frame,timestamp_s,raw,filtered,derivative,high_band_db,movement,crash,error\n";
  const auto& s = trace.segment;
  for (int f = s.start_frame; f <= s.end_frame; ++f) {
    const auto i = static_cast<std::size_t>(f - s.start_frame);
    bool error = false;
    for (const auto& iv : trace.intervals) error = error || iv.contains(f);
    out << f << ',' << num(frames.timestamp(f)) << ',' << num(trace.raw[i]) << ','
        << num(trace.filtered[i]) << ',' << num(trace.derivative[i]) << ','
        << num(trace.high_band_db[i]) << ',' << int(trace.movement[i]) << ','
        << int(trace.crash[i]) << ',' << int(error) << '\n';
  }
}

}  // namespace ringtower
