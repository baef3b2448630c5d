#pragma once

// Collision detection for one tower interaction: tower motion signal from
// optical flow, moving-average filter, derivative, 3-point STFT threshold, the
// cleanup rules, and the end-zone cut on horizontal towers.

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

#include "ringtower/data_model.hpp"
#include "ringtower/signal.hpp"
#include "ringtower/vision.hpp"

namespace ringtower {

// Tower motion per frame pair. values[i] is the summed flow magnitude over the
// ROI tower pixels between frames[i] - 1 and frames[i]; frame 0 is paired with
// an all-black frame.
struct MotionSignal {
  std::vector<int> frames;
  std::vector<double> values;
  std::vector<double> timestamps;

  std::size_t size() const { return values.size(); }
};

// Motion over the contiguous frame range [first, last]: one sample per pair
// inside the range, plus the black-frame pair when first == 0.
MotionSignal motion_signal(const FrameSequence& frames, int first, int last, const Rect& roi,
                           const DetectorConfig& config);
MotionSignal motion_signal(const FrameSequence& frames, const InteractionSegment& segment,
                           const DetectorConfig& config);

// Applies the cleanup rules to per-frame movement flags of one segment
// (flags[i] belongs to frame segment.start_frame + i):
//   R1 a detection starting in the first head_frames frames survives only if
//      the detection continues within the next head_confirm frames (a frame
//      after its first one is flagged); the window is cut short by a crash or
//      the segment end, and with nothing left to check the detection stays;
//   R2 detections at most merge_gap frames apart are joined;
//   R3 single-frame detections with no other detection within lone_window
//      frames are dropped;
//   R4 on vertical towers, a detection in the last tail_frames frames extends
//      to the segment end;
//   R5 crash frames are never flagged and no merge crosses them.
std::vector<Interval> cleanup(const std::vector<bool>& flags, const InteractionSegment& segment,
                              const std::vector<CrashInterval>& crashes,
                              const DetectorConfig& config);

// Drops every frame from the ring's first crossing of end_zone_x onwards.
// centroids[i] belongs to frame segment.start_frame + i; missing centroids
// carry the last known one forward. The travel direction is the sign of the
// net x-displacement of the known centroids. Throws InputError for vertical towers.
std::vector<Interval> exclude_end_zone(const std::vector<Interval>& intervals,
                                       const std::vector<std::optional<Point>>& centroids,
                                       const InteractionSegment& segment);

// First frame at which the ring is inside the end zone, if it ever is.
std::optional<int> end_zone_entry(const std::vector<std::optional<Point>>& centroids,
                                  const InteractionSegment& segment);

// Per-frame record of every stage; vectors are indexed by frame - start_frame,
// with NaN where a stage has no value for that frame.
struct DetectionTrace {
  InteractionSegment segment;
  std::vector<double> raw;
  std::vector<double> filtered;
  std::vector<double> derivative;
  std::vector<double> high_band_db;
  std::vector<bool> movement;
  std::vector<bool> crash;
  std::vector<std::optional<Point>> ring_centroids;  // horizontal towers only
  std::optional<int> end_zone_entry;
  std::vector<Interval> intervals;
};

DetectionTrace detect_interaction(const FrameSequence& frames, const InteractionSegment& segment,
                                  const std::vector<CrashInterval>& crashes,
                                  const DetectorConfig& config);

struct VisitDetection {
  std::array<DetectionTrace, 4> traces;
  ErrorIntervalSet labels;
};

// Runs the four interactions concurrently; the result does not depend on scheduling.
VisitDetection detect_visit(const FrameSequence& frames, const Segmentation& seg,
                            const DetectorConfig& config);

void write_trace_csv(const DetectionTrace& trace, const FrameSequence& frames,
                     const std::filesystem::path& path);

}  // namespace ringtower
