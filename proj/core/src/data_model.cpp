#include "ringtower/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <initializer_list>
#include <regex>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ringtower/image_io.hpp"

namespace ringtower {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string compose(const std::string& artifact, const std::string& message,
                    std::optional<long> index) {
  std::string out = artifact + ": " + message;
  if (index) out += " (index " + std::to_string(*index) + ")";
  return out;
}

std::string read_text(const fs::path& path, const std::string& artifact) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(artifact, "not found");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text, const std::string& artifact) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError(artifact, "cannot write " + path.string());
  out << text;
}

json parse_json(std::string_view text, const std::string& artifact) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(artifact, std::string("malformed JSON: ") + e.what());
  }
}

// Rejects any key not in `allowed`.
void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                const std::string& artifact, const std::string& where) {
  if (!obj.is_object()) throw InputError(artifact, where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw InputError(artifact, "unknown field '" + key + "' in " + where);
  }
}

const json& require(const json& obj, const char* key, const std::string& artifact,
                    const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw InputError(artifact, std::string("missing field '") + key + "' in " + where);
  return *it;
}

int as_int(const json& v, const std::string& artifact, const std::string& what) {
  if (!v.is_number_integer()) throw InputError(artifact, what + " must be an integer");
  return v.get<int>();
}

double as_number(const json& v, const std::string& artifact, const std::string& what) {
  if (!v.is_number()) throw InputError(artifact, what + " must be a number");
  return v.get<double>();
}

void check_schema(const json& doc, const std::string& artifact) {
  int version = as_int(require(doc, "schema_version", artifact, "document"), artifact,
                       "schema_version");
  if (version != kSchemaVersion)
    throw InputError(artifact, "unsupported schema_version " + std::to_string(version));
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

InputError::InputError(std::string artifact, std::string message, std::optional<long> index)
    : std::runtime_error(compose(artifact, message, index)),
      artifact_(std::move(artifact)),
      detail_(std::move(message)),
      index_(index) {}

// ---------------------------------------------------------------------------
// Frames

FrameSequence::FrameSequence(std::vector<Frame> frames, std::string source_id)
    : frames_(std::move(frames)), source_id_(std::move(source_id)) {
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    const Frame& f = frames_[i];
    const long idx = static_cast<long>(i);
    if (f.index != static_cast<int>(i))
      throw InputError("frames", "frame indices must be contiguous from 0", idx);
    if (f.pixels.width() < 1 || f.pixels.height() < 1)
      throw InputError("frames", "empty frame", idx);
    if (!f.pixels.same_shape(frames_.front().pixels))
      throw InputError("frames", "frame size differs from frame 0", idx);
    if (i > 0 && !(f.timestamp_s > frames_[i - 1].timestamp_s))
      throw InputError("timestamps", "non-increasing timestamp", idx);
  }
}

std::vector<double> FrameSequence::timestamps() const {
  std::vector<double> out;
  out.reserve(frames_.size());
  for (const auto& f : frames_) out.push_back(f.timestamp_s);
  return out;
}

std::string frame_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06d.png", index);
  return buf;
}

std::vector<double> load_timestamps(const fs::path& path) {
  const std::string artifact = "timestamps";
  std::istringstream in(read_text(path, artifact));
  std::string line;
  if (!std::getline(in, line)) throw InputError(artifact, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "frame_index,timestamp_s")
    throw InputError(artifact, "expected header 'frame_index,timestamp_s'");

  std::vector<double> out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const long row = static_cast<long>(out.size());
    auto comma = line.find(',');
    if (comma == std::string::npos) throw InputError(artifact, "malformed row", row);
    int index = -1;
    double t = 0.0;
    auto r1 = std::from_chars(line.data(), line.data() + comma, index);
    auto r2 = std::from_chars(line.data() + comma + 1, line.data() + line.size(), t);
    if (r1.ec != std::errc{} || r1.ptr != line.data() + comma || r2.ec != std::errc{} ||
        r2.ptr != line.data() + line.size())
      throw InputError(artifact, "malformed row", row);
    if (index != row) throw InputError(artifact, "frame_index out of sequence", row);
    if (!out.empty() && !(t > out.back()))
      throw InputError(artifact, "non-increasing timestamp", row);
    out.push_back(t);
  }
  return out;
}

void save_timestamps(const std::vector<double>& timestamps, const fs::path& path) {
  std::string text = "frame_index,timestamp_s\n";
  for (std::size_t i = 0; i < timestamps.size(); ++i)
    text += std::to_string(i) + "," + format_double(timestamps[i]) + "\n";
  write_text(path, text, "timestamps");
}

FrameSequence load_frames(const fs::path& dir, const fs::path& timestamps_path) {
  std::vector<double> stamps = load_timestamps(timestamps_path);
  if (!fs::is_directory(dir)) throw InputError("frames", "not found");

  static const std::regex kPattern(R"(frame_\d{6}\.png)");
  long file_count = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && std::regex_match(entry.path().filename().string(), kPattern))
      ++file_count;
  }

  const int n = static_cast<int>(stamps.size());
  for (int i = 0; i < n; ++i) {
    if (!fs::exists(dir / frame_filename(i))) throw InputError("frames", "missing frame file", i);
  }
  if (file_count != n)
    throw InputError("frames", "count mismatch: " + std::to_string(file_count) +
                                   " frame files but " + std::to_string(n) + " timestamp rows");

  std::vector<Frame> frames;
  frames.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) frames.push_back(Frame{i, stamps[i], read_png(dir / frame_filename(i))});
  fs::path folder = fs::absolute(dir).lexically_normal();
  if (folder.filename().empty()) folder = folder.parent_path();
  return FrameSequence(std::move(frames), folder.parent_path().filename().string());
}

// ---------------------------------------------------------------------------
// Towers and segmentation

std::string_view to_string(TowerId tower) {
  switch (tower) {
    case TowerId::RV: return "RV";
    case TowerId::LH: return "LH";
    case TowerId::LV: return "LV";
    case TowerId::RH: return "RH";
  }
  return "?";
}

std::optional<TowerId> parse_tower(std::string_view name) {
  for (TowerId t : kTowerOrder)
    if (to_string(t) == name) return t;
  return std::nullopt;
}

Orientation orientation(TowerId tower) {
  return (tower == TowerId::RV || tower == TowerId::LV) ? Orientation::Vertical
                                                        : Orientation::Horizontal;
}

const InteractionSegment& Segmentation::segment(TowerId tower) const {
  for (const auto& s : segments)
    if (s.tower == tower) return s;
  throw InputError("segmentation", "no segment for tower " + std::string(to_string(tower)));
}

bool Segmentation::is_crash_frame(int frame) const {
  return std::any_of(crashes.begin(), crashes.end(),
                     [&](const CrashInterval& c) { return c.contains(frame); });
}

std::vector<CrashInterval> Segmentation::crashes_in(const InteractionSegment& s) const {
  std::vector<CrashInterval> out;
  for (const auto& c : crashes)
    if (c.end_frame >= s.start_frame && c.start_frame <= s.end_frame) out.push_back(c);
  return out;
}

void validate_segmentation(const Segmentation& seg) {
  const std::string a = "segmentation";
  if (seg.segments.size() != 4)
    throw InputError(a, "expected exactly four segments, got " + std::to_string(seg.segments.size()));
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& s = seg.segments[i];
    const long idx = static_cast<long>(i);
    if (s.tower != kTowerOrder[i])
      throw InputError(a, "wrong tower order: expected RV, LH, LV, RH", idx);
    if (s.start_frame < 0 || !(s.start_frame < s.end_frame))
      throw InputError(a, "segment requires 0 <= start_frame < end_frame", idx);
    if (i > 0 && s.start_frame <= seg.segments[i - 1].end_frame)
      throw InputError(a, "overlapping segments", idx);
    if (s.roi.empty() || s.roi.x < 0 || s.roi.y < 0) throw InputError(a, "invalid roi", idx);
    if (is_vertical(s.tower)) {
      if (s.end_zone_x) throw InputError(a, "end_zone_x given for a vertical tower", idx);
    } else {
      if (!s.end_zone_x) throw InputError(a, "end_zone_x missing on a horizontal tower", idx);
      if (*s.end_zone_x < s.roi.x || *s.end_zone_x >= s.roi.right())
        throw InputError(a, "end_zone_x outside the roi", idx);
    }
  }
  for (std::size_t i = 0; i < seg.crashes.size(); ++i) {
    const auto& c = seg.crashes[i];
    const long idx = static_cast<long>(i);
    if (c.start_frame > c.end_frame) throw InputError(a, "crash requires start_frame <= end_frame", idx);
    bool inside = std::any_of(seg.segments.begin(), seg.segments.end(), [&](const auto& s) {
      return s.contains(c.start_frame) && s.contains(c.end_frame);
    });
    if (!inside) throw InputError(a, "crash interval not inside a single segment", idx);
  }
}

void validate_segmentation(const Segmentation& seg, int frame_count, int width, int height) {
  validate_segmentation(seg);
  const Rect frame{0, 0, width, height};
  for (std::size_t i = 0; i < seg.segments.size(); ++i) {
    const auto& s = seg.segments[i];
    const long idx = static_cast<long>(i);
    if (s.end_frame >= frame_count)
      throw InputError("segmentation", "segment extends past the last frame", idx);
    if (s.roi.right() > frame.width || s.roi.bottom() > frame.height)
      throw InputError("segmentation", "roi outside the frame", idx);
  }
}

namespace {

json segmentation_doc(const Segmentation& seg) {
  json segs = json::array();
  for (const auto& s : seg.segments) {
    json j = {{"tower", std::string(to_string(s.tower))},
              {"start_frame", s.start_frame},
              {"end_frame", s.end_frame},
              {"roi", {{"x", s.roi.x}, {"y", s.roi.y}, {"width", s.roi.width}, {"height", s.roi.height}}}};
    if (s.end_zone_x) j["end_zone_x"] = *s.end_zone_x;
    segs.push_back(std::move(j));
  }
  json crashes = json::array();
  for (const auto& c : seg.crashes)
    crashes.push_back({{"start_frame", c.start_frame}, {"end_frame", c.end_frame}});
  return {{"schema_version", kSchemaVersion},
          {"source_id", seg.source_id},
          {"segments", std::move(segs)},
          {"crashes", std::move(crashes)}};
}

}  // namespace

std::string segmentation_to_json(const Segmentation& seg) { return segmentation_doc(seg).dump(2); }

Segmentation load_segmentation(const fs::path& path) {
  const std::string a = "segmentation";
  json doc = parse_json(read_text(path, a), a);
  check_keys(doc, {"schema_version", "source_id", "segments", "crashes"}, a, "document");
  check_schema(doc, a);

  Segmentation seg;
  if (auto it = doc.find("source_id"); it != doc.end()) {
    if (!it->is_string()) throw InputError(a, "source_id must be a string");
    seg.source_id = it->get<std::string>();
  }
  const json& segs = require(doc, "segments", a, "document");
  if (!segs.is_array()) throw InputError(a, "segments must be an array");
  for (const json& j : segs) {
    check_keys(j, {"tower", "start_frame", "end_frame", "roi", "end_zone_x"}, a, "segment");
    InteractionSegment s;
    const json& name = require(j, "tower", a, "segment");
    auto tower = name.is_string() ? parse_tower(name.get<std::string>()) : std::nullopt;
    if (!tower) throw InputError(a, "unknown tower " + name.dump());
    s.tower = *tower;
    s.start_frame = as_int(require(j, "start_frame", a, "segment"), a, "start_frame");
    s.end_frame = as_int(require(j, "end_frame", a, "segment"), a, "end_frame");
    const json& roi = require(j, "roi", a, "segment");
    check_keys(roi, {"x", "y", "width", "height"}, a, "roi");
    s.roi = Rect{as_int(require(roi, "x", a, "roi"), a, "roi.x"),
                 as_int(require(roi, "y", a, "roi"), a, "roi.y"),
                 as_int(require(roi, "width", a, "roi"), a, "roi.width"),
                 as_int(require(roi, "height", a, "roi"), a, "roi.height")};
    if (auto ez = j.find("end_zone_x"); ez != j.end() && !ez->is_null())
      s.end_zone_x = as_int(*ez, a, "end_zone_x");
    seg.segments.push_back(s);
  }
  if (auto it = doc.find("crashes"); it != doc.end()) {
    if (!it->is_array()) throw InputError(a, "crashes must be an array");
    for (const json& j : *it) {
      check_keys(j, {"start_frame", "end_frame"}, a, "crash");
      seg.crashes.push_back({as_int(require(j, "start_frame", a, "crash"), a, "start_frame"),
                             as_int(require(j, "end_frame", a, "crash"), a, "end_frame")});
    }
  }
  validate_segmentation(seg);
  return seg;
}

void save_segmentation(const Segmentation& seg, const fs::path& path) {
  validate_segmentation(seg);
  write_text(path, segmentation_to_json(seg) + "\n", "segmentation");
}

// ---------------------------------------------------------------------------
// Detector configuration

void validate_config(const DetectorConfig& c) {
  const std::string a = "config";
  if (c.hue_min < 0 || c.hue_max > 179)
    throw InputError(a, "hue bounds must lie in [0,179]");
  if (!(c.hue_min < c.hue_max))
    throw InputError(a, "hue_min must be below hue_max (wrap-around intervals are not supported)");
  if (c.sat_min <= 0 || c.sat_min > 255) throw InputError(a, "sat_min must lie in (0,255]");
  if (c.val_max <= 0 || c.val_max > 255) throw InputError(a, "val_max must lie in (0,255]");
  if (c.val_max_ring <= 0 || c.val_max_ring > 255) throw InputError(a, "val_max_ring must lie in (0,255]");
  if (c.min_blob_px <= 0 || c.min_ring_px <= 0 || c.max_ring_tower_dist_px <= 0)
    throw InputError(a, "pixel thresholds must be positive");
  if (c.ma_window < 1 || c.ma_window % 2 == 0) throw InputError(a, "ma_window must be odd and >= 1");
  if (c.stft_window < 3 || c.stft_window % 2 == 0)
    throw InputError(a, "stft_window must be odd and >= 3");
  if (!(c.db_threshold > 0.0)) throw InputError(a, "db_threshold must be positive");
  if (c.head_frames <= 0 || c.head_confirm <= 0 || c.merge_gap <= 0 || c.lone_window <= 0 ||
      c.tail_frames <= 0)
    throw InputError(a, "cleanup windows must be positive");
  if (!(c.flow_smoothness > 0.0)) throw InputError(a, "flow_smoothness must be positive");
  if (c.flow_iterations < 1) throw InputError(a, "flow_iterations must be >= 1");
}

namespace {

json config_doc(const DetectorConfig& c) {
  return {{"schema_version", kSchemaVersion},
          {"hue_min", c.hue_min},
          {"hue_max", c.hue_max},
          {"sat_min", c.sat_min},
          {"val_max", c.val_max},
          {"min_blob_px", c.min_blob_px},
          {"ma_window", c.ma_window},
          {"stft_window", c.stft_window},
          {"db_threshold", c.db_threshold},
          {"head_frames", c.head_frames},
          {"head_confirm", c.head_confirm},
          {"merge_gap", c.merge_gap},
          {"lone_window", c.lone_window},
          {"tail_frames", c.tail_frames},
          {"val_max_ring", c.val_max_ring},
          {"min_ring_px", c.min_ring_px},
          {"max_ring_tower_dist_px", c.max_ring_tower_dist_px},
          {"flow_smoothness", c.flow_smoothness},
          {"flow_iterations", c.flow_iterations}};
}

}  // namespace

DetectorConfig load_config(const fs::path& path) {
  const std::string a = "config";
  json doc = parse_json(read_text(path, a), a);
  check_keys(doc,
             {"schema_version", "hue_min", "hue_max", "sat_min", "val_max", "min_blob_px",
              "ma_window", "stft_window", "db_threshold", "head_frames", "head_confirm",
              "merge_gap", "lone_window", "tail_frames", "val_max_ring", "min_ring_px",
              "max_ring_tower_dist_px", "flow_smoothness", "flow_iterations"},
             a, "document");
  check_schema(doc, a);

  DetectorConfig c;
  auto set_int = [&](const char* key, int& field) {
    if (auto it = doc.find(key); it != doc.end()) field = as_int(*it, a, key);
  };
  auto set_num = [&](const char* key, double& field) {
    if (auto it = doc.find(key); it != doc.end()) field = as_number(*it, a, key);
  };
  set_int("hue_min", c.hue_min);
  set_int("hue_max", c.hue_max);
  set_int("sat_min", c.sat_min);
  set_int("val_max", c.val_max);
  set_int("min_blob_px", c.min_blob_px);
  set_int("ma_window", c.ma_window);
  set_int("stft_window", c.stft_window);
  set_num("db_threshold", c.db_threshold);
  set_int("head_frames", c.head_frames);
  set_int("head_confirm", c.head_confirm);
  set_int("merge_gap", c.merge_gap);
  set_int("lone_window", c.lone_window);
  set_int("tail_frames", c.tail_frames);
  set_int("val_max_ring", c.val_max_ring);
  set_int("min_ring_px", c.min_ring_px);
  set_int("max_ring_tower_dist_px", c.max_ring_tower_dist_px);
  set_num("flow_smoothness", c.flow_smoothness);
  set_int("flow_iterations", c.flow_iterations);
  validate_config(c);
  return c;
}

void save_config(const DetectorConfig& config, const fs::path& path) {
  validate_config(config);
  write_text(path, config_doc(config).dump(2) + "\n", "config");
}

// ---------------------------------------------------------------------------
// Error labels

std::string_view to_string(Provenance p) { return p == Provenance::Auto ? "auto" : "corrected"; }

bool ErrorIntervalSet::empty() const {
  return std::all_of(intervals.begin(), intervals.end(), [](const auto& v) { return v.empty(); });
}

std::vector<LabelViolation> label_violations(const ErrorIntervalSet& labels,
                                             const Segmentation* seg) {
  std::vector<LabelViolation> out;
  for (TowerId t : kTowerOrder) {
    const auto& ivs = labels.of(t);
    for (std::size_t i = 0; i < ivs.size(); ++i) {
      const long idx = static_cast<long>(i);
      if (ivs[i].start_frame > ivs[i].end_frame)
        out.push_back({t, {idx}, "interval start after end"});
      if (i > 0 && ivs[i].start_frame <= ivs[i - 1].end_frame + 1)
        out.push_back({t, {idx - 1, idx}, "overlapping or unsorted intervals"});
      if (seg) {
        const auto& s = seg->segment(t);
        if (ivs[i].start_frame < s.start_frame || ivs[i].end_frame > s.end_frame)
          out.push_back({t, {idx}, "interval outside segment"});
      }
    }
  }
  return out;
}

namespace {

void throw_first(const std::vector<LabelViolation>& violations) {
  if (violations.empty()) return;
  const auto& v = violations.front();
  throw InputError("labels", std::string(to_string(v.tower)) + ": " + v.message, v.indices.back());
}

}  // namespace

void validate_intervals(const std::vector<Interval>& intervals, std::string_view where) {
  ErrorIntervalSet one;
  one.of(TowerId::RV) = intervals;
  for (auto& v : label_violations(one, nullptr))
    throw InputError("labels", std::string(where) + ": " + v.message, v.indices.back());
}

void validate_labels(const ErrorIntervalSet& labels, const Segmentation& seg) {
  throw_first(label_violations(labels, &seg));
}

std::vector<Interval> intervals_from_frames(std::vector<int> frames) {
  std::sort(frames.begin(), frames.end());
  frames.erase(std::unique(frames.begin(), frames.end()), frames.end());
  std::vector<Interval> out;
  for (int f : frames) {
    if (!out.empty() && out.back().end_frame + 1 == f)
      out.back().end_frame = f;
    else
      out.push_back({f, f});
  }
  return out;
}

std::vector<int> frames_of(const std::vector<Interval>& intervals) {
  std::vector<int> out;
  for (const auto& iv : intervals)
    for (int f = iv.start_frame; f <= iv.end_frame; ++f) out.push_back(f);
  return out;
}

std::string labels_to_json(const ErrorIntervalSet& labels) {
  json towers = json::object();
  for (TowerId t : kTowerOrder) {
    json list = json::array();
    for (const auto& iv : labels.of(t)) list.push_back(json::array({iv.start_frame, iv.end_frame}));
    towers[std::string(to_string(t))] = std::move(list);
  }
  json doc = {{"schema_version", kSchemaVersion},
              {"provenance", std::string(to_string(labels.provenance))},
              {"intervals", std::move(towers)}};
  return doc.dump(2);
}

ErrorIntervalSet parse_labels_document(std::string_view text) {
  const std::string a = "labels";
  json doc = parse_json(text, a);
  check_keys(doc, {"schema_version", "provenance", "intervals"}, a, "document");
  check_schema(doc, a);

  ErrorIntervalSet labels;
  const json& prov = require(doc, "provenance", a, "document");
  if (prov == "auto")
    labels.provenance = Provenance::Auto;
  else if (prov == "corrected")
    labels.provenance = Provenance::Corrected;
  else
    throw InputError(a, "provenance must be 'auto' or 'corrected'");

  const json& towers = require(doc, "intervals", a, "document");
  check_keys(towers, {"RV", "LH", "LV", "RH"}, a, "intervals");
  for (TowerId t : kTowerOrder) {
    const std::string name(to_string(t));
    const json& list = require(towers, name.c_str(), a, "intervals");
    if (!list.is_array()) throw InputError(a, name + " must be an array");
    for (const json& pair : list) {
      if (!pair.is_array() || pair.size() != 2)
        throw InputError(a, name + ": each interval must be [start_frame, end_frame]");
      labels.of(t).push_back({as_int(pair[0], a, name), as_int(pair[1], a, name)});
    }
  }
  return labels;
}

ErrorIntervalSet labels_from_json(std::string_view text) {
  ErrorIntervalSet labels = parse_labels_document(text);
  throw_first(label_violations(labels, nullptr));
  return labels;
}

ErrorIntervalSet load_labels(const fs::path& path) {
  return labels_from_json(read_text(path, "labels"));
}

ErrorIntervalSet load_labels(const fs::path& path, const Segmentation& seg) {
  ErrorIntervalSet labels = load_labels(path);
  validate_labels(labels, seg);
  return labels;
}

void save_labels(const ErrorIntervalSet& labels, const fs::path& path) {
  throw_first(label_violations(labels, nullptr));
  write_text(path, labels_to_json(labels) + "\n", "labels");
}

}  // namespace ringtower
