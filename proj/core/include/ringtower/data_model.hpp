#pragma once

// On-disk artifacts of one recorded visit: frames with their (irregular)
// timestamps, the manual event segmentation, crash intervals, detector
// configuration and error labels.

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ringtower/image.hpp"

namespace ringtower {

inline constexpr int kSchemaVersion = 1;

// Raised for any malformed or inconsistent input. `what()` is prefixed with
// the artifact it concerns ("timestamps: ...", "segmentation: ...").
class InputError : public std::runtime_error {
 public:
  InputError(std::string artifact, std::string message, std::optional<long> index = std::nullopt);

  const std::string& artifact() const { return artifact_; }
  const std::string& detail() const { return detail_; }
  std::optional<long> index() const { return index_; }

 private:
  std::string artifact_;
  std::string detail_;
  std::optional<long> index_;
};

// ---------------------------------------------------------------------------
// Frames

struct Frame {
  int index = 0;
  double timestamp_s = 0.0;
  RgbImage pixels;
};

class FrameSequence {
 public:
  FrameSequence() = default;
  // Validates contiguity from 0, strictly increasing timestamps and a common size.
  FrameSequence(std::vector<Frame> frames, std::string source_id);

  const std::vector<Frame>& frames() const { return frames_; }
  const Frame& operator[](int i) const { return frames_.at(static_cast<std::size_t>(i)); }
  int size() const { return static_cast<int>(frames_.size()); }
  int width() const { return frames_.empty() ? 0 : frames_.front().pixels.width(); }
  int height() const { return frames_.empty() ? 0 : frames_.front().pixels.height(); }
  double timestamp(int i) const { return (*this)[i].timestamp_s; }
  std::vector<double> timestamps() const;
  const std::string& source_id() const { return source_id_; }

 private:
  std::vector<Frame> frames_;
  std::string source_id_;
};

std::string frame_filename(int index);  // frame_000042.png

std::vector<double> load_timestamps(const std::filesystem::path& path);
void save_timestamps(const std::vector<double>& timestamps, const std::filesystem::path& path);

FrameSequence load_frames(const std::filesystem::path& dir, const std::filesystem::path& timestamps);

// ---------------------------------------------------------------------------
// Towers and segmentation

enum class TowerId { RV = 0, LH = 1, LV = 2, RH = 3 };
enum class Orientation { Vertical, Horizontal };

inline constexpr std::array<TowerId, 4> kTowerOrder = {TowerId::RV, TowerId::LH, TowerId::LV,
                                                       TowerId::RH};

std::string_view to_string(TowerId tower);
std::optional<TowerId> parse_tower(std::string_view name);
Orientation orientation(TowerId tower);
inline bool is_vertical(TowerId tower) { return orientation(tower) == Orientation::Vertical; }
inline std::size_t slot(TowerId tower) { return static_cast<std::size_t>(tower); }

struct InteractionSegment {
  TowerId tower = TowerId::RV;
  int start_frame = 0;
  int end_frame = 0;
  Rect roi;
  std::optional<int> end_zone_x;

  int length() const { return end_frame - start_frame + 1; }
  bool contains(int frame) const { return frame >= start_frame && frame <= end_frame; }

  friend bool operator==(const InteractionSegment&, const InteractionSegment&) = default;
};

struct CrashInterval {
  int start_frame = 0;
  int end_frame = 0;

  bool contains(int frame) const { return frame >= start_frame && frame <= end_frame; }
  friend bool operator==(const CrashInterval&, const CrashInterval&) = default;
};

struct Segmentation {
  std::string source_id;
  std::vector<InteractionSegment> segments;  // exactly four, RV, LH, LV, RH
  std::vector<CrashInterval> crashes;

  const InteractionSegment& segment(TowerId tower) const;
  bool is_crash_frame(int frame) const;
  // Crash intervals that intersect the given segment.
  std::vector<CrashInterval> crashes_in(const InteractionSegment& segment) const;

  friend bool operator==(const Segmentation&, const Segmentation&) = default;
};

// Structural checks that need no frames: order, disjointness, end zones, crashes.
void validate_segmentation(const Segmentation& seg);
// Adds bounds checks against a concrete recording.
void validate_segmentation(const Segmentation& seg, int frame_count, int width, int height);

Segmentation load_segmentation(const std::filesystem::path& path);
void save_segmentation(const Segmentation& seg, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Detector configuration

struct DetectorConfig {
  // Tower color gate, hue on [0,180), saturation/value on [0,255].
  int hue_min = 70;
  int hue_max = 130;
  int sat_min = 90;
  int val_max = 120;
  int min_blob_px = 100;

  int ma_window = 5;
  int stft_window = 3;
  double db_threshold = 20.0;

  int head_frames = 10;
  int head_confirm = 5;
  int merge_gap = 10;
  int lone_window = 5;
  int tail_frames = 10;

  int val_max_ring = 50;
  int min_ring_px = 30;
  int max_ring_tower_dist_px = 30;

  double flow_smoothness = 1.0;
  int flow_iterations = 10;

  friend bool operator==(const DetectorConfig&, const DetectorConfig&) = default;
};

void validate_config(const DetectorConfig& config);
DetectorConfig load_config(const std::filesystem::path& path);
void save_config(const DetectorConfig& config, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Error labels

struct Interval {
  int start_frame = 0;
  int end_frame = 0;

  int length() const { return end_frame - start_frame + 1; }
  bool contains(int frame) const { return frame >= start_frame && frame <= end_frame; }
  friend bool operator==(const Interval&, const Interval&) = default;
  friend auto operator<=>(const Interval&, const Interval&) = default;
};

enum class Provenance { Auto, Corrected };
std::string_view to_string(Provenance p);

struct ErrorIntervalSet {
  Provenance provenance = Provenance::Auto;
  std::array<std::vector<Interval>, 4> intervals;  // indexed by slot(TowerId)

  std::vector<Interval>& of(TowerId t) { return intervals[slot(t)]; }
  const std::vector<Interval>& of(TowerId t) const { return intervals[slot(t)]; }
  bool empty() const;

  friend bool operator==(const ErrorIntervalSet&, const ErrorIntervalSet&) = default;
};

struct LabelViolation {
  TowerId tower = TowerId::RV;
  std::vector<long> indices;  // offending interval positions within the tower's list
  std::string message;
};

// Every broken invariant, in tower order. Segment bounds are checked when seg is given.
std::vector<LabelViolation> label_violations(const ErrorIntervalSet& labels, const Segmentation* seg);

// Sorted, each start <= end, and separated by at least one unlabeled frame.
void validate_intervals(const std::vector<Interval>& intervals, std::string_view where);
// As above, plus every interval lies inside its tower's segment.
void validate_labels(const ErrorIntervalSet& labels, const Segmentation& seg);

// Collapses a set of frames into canonical intervals.
std::vector<Interval> intervals_from_frames(std::vector<int> frames);
std::vector<int> frames_of(const std::vector<Interval>& intervals);

ErrorIntervalSet load_labels(const std::filesystem::path& path);
ErrorIntervalSet load_labels(const std::filesystem::path& path, const Segmentation& seg);
void save_labels(const ErrorIntervalSet& labels, const std::filesystem::path& path);

// String forms used by the HTTP service; same schema as the files.
std::string labels_to_json(const ErrorIntervalSet& labels);
ErrorIntervalSet labels_from_json(std::string_view text);
// Checks the document structure only; interval invariants are left to label_violations.
ErrorIntervalSet parse_labels_document(std::string_view text);
std::string segmentation_to_json(const Segmentation& seg);

}  // namespace ringtower
