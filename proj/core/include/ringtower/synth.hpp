#pragma once

// Scripted synthetic recordings with exact ground truth: four green towers on
// a light board, a black ring travelling along the active tower, a dark
// instrument holding it, and scripted tower jitter standing in for collisions.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ringtower/data_model.hpp"
#include "ringtower/vision.hpp"

namespace ringtower {

struct TowerShape {
  TowerId tower = TowerId::RV;
  std::vector<Point> polyline;  // ring travel order, first point to last
  double half_thickness = 5.0;
  Rgb color{22, 100, 74};  // HSV (80, 199, 100)
  Rect roi;
  std::optional<int> end_zone_x;
};

// Tower displacement over [start_frame, end_frame]: the tower is off its rest
// position on start_frame .. end_frame - 1 and back at rest on end_frame, so
// the frame pairs that contain tower motion are exactly start_frame .. end_frame.
struct JitterEvent {
  TowerId tower = TowerId::RV;
  int start_frame = 0;
  int end_frame = 0;
  int dx = 0;
  int dy = 0;
  bool is_error = true;  // false for the intentional placement movement in the end zone
};

struct RingPose {
  Point center;
  double outer_radius = 10.0;
  double inner_radius = 5.0;
};

struct SceneScript {
  int width = 320;
  int height = 240;
  int frame_count = 0;
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;
  double base_rate_hz = 35.0;
  double rate_jitter = 0.2;  // frame intervals vary uniformly within ±20%

  Rgb background{205, 198, 186};
  Rgb ring_color{35, 35, 35};
  Rgb instrument_color{92, 92, 98};

  std::array<TowerShape, 4> towers;
  std::vector<std::optional<RingPose>> ring;         // per frame
  std::vector<std::vector<Rect>> instrument;         // per frame, drawn over everything
  std::vector<JitterEvent> jitters;
  Segmentation segmentation;
};

// Throws InputError("script", ...) on overlapping or out-of-range jitter,
// inconsistent per-frame arrays or an invalid segmentation.
void validate_script(const SceneScript& script);

// Integer tower offset in units of (dx, dy) for every frame of the event.
std::vector<int> jitter_pattern(const JitterEvent& event, std::uint64_t seed);

struct SyntheticCase {
  FrameSequence frames;
  Segmentation segmentation;
  ErrorIntervalSet truth;  // provenance corrected
};

RgbImage render_frame(const SceneScript& script, int frame);
std::vector<double> render_timestamps(const SceneScript& script);
ErrorIntervalSet ground_truth(const SceneScript& script);
SyntheticCase render(const SceneScript& script);

// Compact, serializable description of one synthetic visit.
struct CaseSpec {
  std::string name = "case";
  std::string kind = "custom";
  std::uint64_t seed = 1;
  double noise_sigma = 0.0;
  int lead_in = 6;
  std::array<int, 4> segment_frames{150, 180, 150, 180};
  int transfer_frames = 12;
  int tail_frames = 6;
  std::vector<JitterEvent> jitters;  // absolute frames
  std::vector<CrashInterval> crashes;
  std::optional<TowerId> occluded_tower;     // an instrument sweeps across this tower
  std::optional<TowerId> end_zone_contact;   // placement movement once the ring is in the end zone
  bool show_ring = true;
  bool show_instrument = true;
};

// Segment frame ranges implied by a spec, in RV, LH, LV, RH order.
std::array<std::pair<int, int>, 4> segment_ranges(const CaseSpec& spec);
SceneScript build_script(const CaseSpec& spec);

std::string case_spec_to_json(const CaseSpec& spec);
CaseSpec case_spec_from_json(std::string_view text);

// The default benchmark corpus: 20 visits covering static scenes, single and
// multiple jitters, jitter under instrument occlusion, jitter inside a crash
// and ring placement in the end zone.
std::vector<CaseSpec> default_corpus(double noise_sigma, std::uint64_t seed = 2024);

// Writes frames/, timestamps.csv, segmentation.json, truth.json and case.json
// under dir/<spec.name>.
void write_case(const CaseSpec& spec, const std::filesystem::path& dir);
// Writes every case plus manifest.json listing the ground truth per case.
void write_corpus(const std::vector<CaseSpec>& specs, const std::filesystem::path& dir);

}  // namespace ringtower
