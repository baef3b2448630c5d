#include "ringtower/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ringtower/image_io.hpp"

namespace ringtower {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kWidth = 320;
constexpr int kHeight = 240;

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a combined key
  std::uint64_t z = a * 0x9E3779B97F4A7C15ULL + b + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double segment_distance(Point p, Point a, Point b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

double polyline_distance(Point p, const std::vector<Point>& line) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < line.size(); ++i)
    best = std::min(best, segment_distance(p, line[i - 1], line[i]));
  return best;
}

double polyline_length(const std::vector<Point>& line) {
  double len = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i)
    len += std::hypot(line[i].x - line[i - 1].x, line[i].y - line[i - 1].y);
  return len;
}

// Point at arc length s; beyond either end the first/last piece is extended.
Point point_along(const std::vector<Point>& line, double s) {
  for (std::size_t i = 1; i < line.size(); ++i) {
    const Point a = line[i - 1], b = line[i];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    if (s <= len || i + 1 == line.size()) {
      const double t = len > 0 ? s / len : 0.0;
      return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    }
    s -= len;
  }
  return line.front();
}

double smoothstep(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

std::array<TowerShape, 4> board() {
  std::array<TowerShape, 4> towers;
  towers[slot(TowerId::RV)] = {TowerId::RV, {{262, 128}, {250, 100}, {250, 30}}, 5.0, {22, 100, 74},
                               {225, 12, 60, 135}, std::nullopt};
  towers[slot(TowerId::LH)] = {TowerId::LH, {{30, 200}, {60, 172}, {140, 172}}, 5.0, {22, 100, 74},
                               {15, 150, 140, 65}, 115};
  towers[slot(TowerId::LV)] = {TowerId::LV, {{58, 128}, {70, 100}, {70, 30}}, 5.0, {22, 100, 74},
                               {35, 12, 60, 135}, std::nullopt};
  towers[slot(TowerId::RH)] = {TowerId::RH, {{290, 200}, {260, 172}, {180, 172}}, 5.0, {22, 100, 74},
                               {165, 150, 140, 65}, 205};
  return towers;
}

// Ring travel along the tower over one segment; vertical towers are
// extracted, so the ring continues past the top end.
Point ring_position(const TowerShape& tower, int local, int length) {
  const double overshoot = is_vertical(tower.tower) ? 18.0 : 0.0;
  const double total = polyline_length(tower.polyline) + overshoot;
  const double t = length > 1 ? static_cast<double>(local) / (length - 1) : 0.0;
  return point_along(tower.polyline, smoothstep(t) * total);
}

// First frame of [first, last] at which the scripted ring reaches the end zone.
std::optional<int> end_zone_entry_frame(const TowerShape& tower, int first, int last) {
  if (!tower.end_zone_x) return std::nullopt;
  const bool rightward = tower.polyline.back().x > tower.polyline.front().x;
  for (int f = first; f <= last; ++f) {
    const Point c = ring_position(tower, f - first, last - first + 1);
    if (rightward ? c.x >= *tower.end_zone_x : c.x <= *tower.end_zone_x) return f;
  }
  return std::nullopt;
}

Rect instrument_rect(TowerId tower, Point ring) {
  const int cx = static_cast<int>(std::lround(ring.x));
  const int cy = static_cast<int>(std::lround(ring.y));
  switch (tower) {
    case TowerId::RV: return {cx + 12, cy - 4, 70, 8};
    case TowerId::LV: return {cx - 82, cy - 4, 70, 8};
    case TowerId::LH:
    case TowerId::RH: return {cx - 4, cy - 82, 8, 70};
  }
  return {};
}

// A bar that slides across the tower, holds, and withdraws within [first, last].
std::optional<Rect> occluder_rect(const TowerShape& tower, int frame, int first, int last) {
  const int span = last - first;
  const int ramp = 30;
  if (span < 2 * ramp + 20) return std::nullopt;
  const int local = frame - first;
  double cover;  // 0 = clear of the tower, 1 = fully across
  if (local < 10 || local > span - 10)
    cover = 0.0;
  else if (local < 10 + ramp)
    cover = smoothstep(static_cast<double>(local - 10) / ramp);
  else if (local > span - 10 - ramp)
    cover = smoothstep(static_cast<double>(span - 10 - local) / ramp);
  else
    cover = 1.0;

  const double travel = 55.0;
  if (is_vertical(tower.tower)) {
    const double x = tower.polyline.back().x;
    const int y = 62;
    if (tower.tower == TowerId::RV) {
      const int tip = static_cast<int>(std::lround(x + 40.0 - travel * cover));
      return Rect{tip, y, kWidth - tip, 9};
    }
    const int tip = static_cast<int>(std::lround(x - 40.0 + travel * cover));
    return Rect{0, y, tip, 9};
  }
  const int x = tower.tower == TowerId::LH ? 92 : 222;
  const int tip = static_cast<int>(std::lround(tower.polyline.back().y + 40.0 - travel * cover));
  return Rect{x, tip, 9, kHeight - tip};
}

void fill(RgbImage& img, const Rect& r, Rgb color) {
  const int x0 = std::max(0, r.x), y0 = std::max(0, r.y);
  const int x1 = std::min(img.width(), r.right()), y1 = std::min(img.height(), r.bottom());
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) img(x, y) = color;
}

// 65536 Gaussian draws rounded to whole intensity steps; sensor noise
// indexes the table with 16 random bits.
const std::vector<int>& noise_table(double sigma) {
  thread_local double cached_sigma = -1.0;
  thread_local std::vector<int> table;
  if (sigma != cached_sigma) {
    std::mt19937_64 rng(0x5EED5EEDULL);
    std::normal_distribution<double> normal(0.0, sigma);
    table.resize(1u << 16);
    for (int& v : table) v = static_cast<int>(std::lround(normal(rng)));
    cached_sigma = sigma;
  }
  return table;
}

json jitter_to_json(const JitterEvent& j) {
  return {{"tower", std::string(to_string(j.tower))}, {"start_frame", j.start_frame},
          {"end_frame", j.end_frame}, {"dx", j.dx}, {"dy", j.dy}, {"is_error", j.is_error}};
}

}  // namespace

// ---------------------------------------------------------------------------

void validate_script(const SceneScript& s) {
  const std::string a = "script";
  if (s.width < 1 || s.height < 1 || s.frame_count < 2) throw InputError(a, "empty scene");
  if (s.ring.size() != static_cast<std::size_t>(s.frame_count) ||
      s.instrument.size() != static_cast<std::size_t>(s.frame_count))
    throw InputError(a, "per-frame paths must cover every frame");
  if (!(s.noise_sigma >= 0.0)) throw InputError(a, "noise_sigma must be non-negative");
  if (!(s.rate_jitter >= 0.0 && s.rate_jitter < 1.0) || !(s.base_rate_hz > 0.0))
    throw InputError(a, "invalid frame rate");
  validate_segmentation(s.segmentation, s.frame_count, s.width, s.height);
  for (std::size_t i = 0; i < s.jitters.size(); ++i) {
    const auto& j = s.jitters[i];
    const long idx = static_cast<long>(i);
    if (j.start_frame < 1 || j.end_frame >= s.frame_count || j.start_frame >= j.end_frame)
      throw InputError(a, "jitter outside the clip or empty", idx);
    if (j.dx == 0 && j.dy == 0) throw InputError(a, "jitter without displacement", idx);
    const auto& seg = s.segmentation.segment(j.tower);
    if (j.start_frame < seg.start_frame || j.end_frame > seg.end_frame)
      throw InputError(a, "jitter outside its tower's segment", idx);
    for (std::size_t k = 0; k < i; ++k) {
      const auto& o = s.jitters[k];
      if (o.tower == j.tower && o.start_frame <= j.end_frame && j.start_frame <= o.end_frame)
        throw InputError(a, "overlapping jitter events", idx);
    }
  }
}

std::vector<int> jitter_pattern(const JitterEvent& event, std::uint64_t seed) {
  const int n = event.end_frame - event.start_frame + 1;
  std::vector<int> p(static_cast<std::size_t>(std::max(n, 0)), 0);
  if (n < 2) return p;
  std::mt19937_64 rng(mix(seed, static_cast<std::uint64_t>(event.start_frame) * 4 + slot(event.tower)));
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  // Knocks: runs of 1-3 moving frames separated by 1-3 still frames. The
  // first and last frames move; the offset before the event and on its last
  // frame is 0. Patterns where five consecutive positions repeat with a
  // period of five frames are redrawn.
  std::vector<bool> moving;
  for (bool periodic = true; periodic;) {
    moving.assign(static_cast<std::size_t>(n), false);
    for (int i = 0; i < n;) {
      const int run = uniform(1, 3);
      for (int k = 0; k < run && i < n; ++k) moving[static_cast<std::size_t>(i++)] = true;
      i += uniform(1, 3);
    }
    moving.back() = true;
    periodic = false;
    for (int i = 0, same = 0; i + 5 < n && !periodic; ++i) {
      same = moving[static_cast<std::size_t>(i)] == moving[static_cast<std::size_t>(i + 5)] ? same + 1 : 0;
      periodic = same >= 5;
    }
  }

  int last_move_before_end = 0;
  for (int i = 0; i < n - 1; ++i)
    if (moving[static_cast<std::size_t>(i)]) last_move_before_end = i;

  int prev = 0;
  for (int i = 0; i < n - 1; ++i) {
    if (moving[static_cast<std::size_t>(i)]) {
      int choices[2], k = 0;
      for (int v : {-1, 0, 1})
        if (v != prev && !(v == 0 && i == last_move_before_end)) choices[k++] = v;
      prev = choices[k == 1 ? 0 : uniform(0, 1)];
    }
    p[static_cast<std::size_t>(i)] = prev;
  }
  return p;
}

RgbImage render_frame(const SceneScript& s, int frame) {
  RgbImage img(s.width, s.height, s.background);

  for (const TowerShape& tower : s.towers) {
    int ox = 0, oy = 0;
    for (const auto& j : s.jitters) {
      if (j.tower != tower.tower || frame < j.start_frame || frame > j.end_frame) continue;
      const int p = jitter_pattern(j, s.seed)[static_cast<std::size_t>(frame - j.start_frame)];
      ox += p * j.dx;
      oy += p * j.dy;
    }
    double x0 = 1e9, y0 = 1e9, x1 = -1e9, y1 = -1e9;
    for (auto p : tower.polyline)
      x0 = std::min(x0, p.x), x1 = std::max(x1, p.x), y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
    const int r = static_cast<int>(std::ceil(tower.half_thickness)) + 1;
    for (int y = static_cast<int>(y0) - r; y <= static_cast<int>(y1) + r; ++y)
      for (int x = static_cast<int>(x0) - r; x <= static_cast<int>(x1) + r; ++x) {
        const int px = x + ox, py = y + oy;
        if (px < 0 || py < 0 || px >= s.width || py >= s.height) continue;
        if (polyline_distance({double(x), double(y)}, tower.polyline) <= tower.half_thickness)
          img(px, py) = tower.color;
      }
  }

  if (const auto& ring = s.ring[static_cast<std::size_t>(frame)]) {
    const int r = static_cast<int>(std::ceil(ring->outer_radius));
    const int cx = static_cast<int>(std::floor(ring->center.x));
    const int cy = static_cast<int>(std::floor(ring->center.y));
    for (int y = cy - r - 1; y <= cy + r + 1; ++y)
      for (int x = cx - r - 1; x <= cx + r + 1; ++x) {
        if (x < 0 || y < 0 || x >= s.width || y >= s.height) continue;
        const double d = std::hypot(x - ring->center.x, y - ring->center.y);
        if (d > ring->inner_radius && d <= ring->outer_radius) img(x, y) = s.ring_color;
      }
  }

  for (const Rect& r : s.instrument[static_cast<std::size_t>(frame)]) fill(img, r, s.instrument_color);

  if (s.noise_sigma > 0.0) {
    const std::vector<int>& noise = noise_table(s.noise_sigma);
    std::mt19937_64 rng(mix(s.seed ^ 0xA5A5A5A5ULL, static_cast<std::uint64_t>(frame)));
    std::uint64_t bits = 0;
    int left = 0;
    auto add = [&](std::uint8_t& c) {
      if (left == 0) bits = rng(), left = 4;
      c = static_cast<std::uint8_t>(std::clamp(c + noise[bits & 0xFFFF], 0, 255));
      bits >>= 16;
      --left;
    };
    for (Rgb& p : img.values()) {
      add(p.r);
      add(p.g);
      add(p.b);
    }
  }
  return img;
}

std::vector<double> render_timestamps(const SceneScript& s) {
  std::mt19937_64 rng(mix(s.seed, 0x7157ULL));
  std::uniform_real_distribution<double> jitter(-s.rate_jitter, s.rate_jitter);
  std::vector<double> t(static_cast<std::size_t>(s.frame_count));
  t[0] = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i)
    t[i] = t[i - 1] + (1.0 + jitter(rng)) / s.base_rate_hz;
  return t;
}

ErrorIntervalSet ground_truth(const SceneScript& s) {
  ErrorIntervalSet truth;
  truth.provenance = Provenance::Corrected;
  std::array<std::vector<int>, 4> frames;
  for (const auto& j : s.jitters) {
    if (!j.is_error) continue;
    for (int f = j.start_frame; f <= j.end_frame; ++f)
      if (!s.segmentation.is_crash_frame(f)) frames[slot(j.tower)].push_back(f);
  }
  for (TowerId t : kTowerOrder) truth.of(t) = intervals_from_frames(frames[slot(t)]);
  return truth;
}

SyntheticCase render(const SceneScript& s) {
  validate_script(s);
  const std::vector<double> stamps = render_timestamps(s);
  std::vector<Frame> frames;
  frames.reserve(static_cast<std::size_t>(s.frame_count));
  for (int i = 0; i < s.frame_count; ++i) frames.push_back({i, stamps[static_cast<std::size_t>(i)], render_frame(s, i)});
  return {FrameSequence(std::move(frames), s.segmentation.source_id), s.segmentation, ground_truth(s)};
}

// ---------------------------------------------------------------------------

std::array<std::pair<int, int>, 4> segment_ranges(const CaseSpec& spec) {
  std::array<std::pair<int, int>, 4> out;
  int f = spec.lead_in;
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = {f, f + spec.segment_frames[i] - 1};
    f += spec.segment_frames[i] + spec.transfer_frames;
  }
  return out;
}

SceneScript build_script(const CaseSpec& spec) {
  SceneScript s;
  s.width = kWidth;
  s.height = kHeight;
  s.seed = spec.seed;
  s.noise_sigma = spec.noise_sigma;
  s.towers = board();

  const auto ranges = segment_ranges(spec);
  s.frame_count = ranges[3].second + 1 + spec.tail_frames;
  s.ring.assign(static_cast<std::size_t>(s.frame_count), std::nullopt);
  s.instrument.assign(static_cast<std::size_t>(s.frame_count), {});

  s.segmentation.source_id = spec.name;
  for (std::size_t i = 0; i < 4; ++i) {
    const TowerShape& tower = s.towers[slot(kTowerOrder[i])];
    s.segmentation.segments.push_back(
        {tower.tower, ranges[i].first, ranges[i].second, tower.roi, tower.end_zone_x});
  }
  s.segmentation.crashes = spec.crashes;
  s.jitters = spec.jitters;

  for (std::size_t i = 0; i < 4; ++i) {
    const TowerShape& tower = s.towers[slot(kTowerOrder[i])];
    const auto [first, last] = ranges[i];
    const int length = last - first + 1;
    const std::optional<int> entry = end_zone_entry_frame(tower, first, last);
    for (int f = first; f <= last; ++f) {
      const Point c = ring_position(tower, f - first, length);
      if (spec.show_ring) s.ring[static_cast<std::size_t>(f)] = RingPose{c, 10.0, 5.0};
      if (spec.show_instrument) s.instrument[static_cast<std::size_t>(f)].push_back(instrument_rect(tower.tower, c));
      if (spec.occluded_tower == tower.tower)
        if (auto r = occluder_rect(tower, f, first, last)) s.instrument[static_cast<std::size_t>(f)].push_back(*r);
    }
    if (spec.end_zone_contact == tower.tower && entry) {
      const int start = *entry + 3;
      const int end = std::min(start + 12, last - 2);
      if (end > start) s.jitters.push_back({tower.tower, start, end, 0, 3, false});
    }
  }
  validate_script(s);
  return s;
}

std::string case_spec_to_json(const CaseSpec& c) {
  json jitters = json::array();
  for (const auto& j : c.jitters) jitters.push_back(jitter_to_json(j));
  json crashes = json::array();
  for (const auto& k : c.crashes) crashes.push_back({{"start_frame", k.start_frame}, {"end_frame", k.end_frame}});
  json doc = {{"schema_version", kSchemaVersion},
              {"name", c.name},
              {"kind", c.kind},
              {"seed", c.seed},
              {"noise_sigma", c.noise_sigma},
              {"lead_in", c.lead_in},
              {"segment_frames", c.segment_frames},
              {"transfer_frames", c.transfer_frames},
              {"tail_frames", c.tail_frames},
              {"jitters", jitters},
              {"crashes", crashes},
              {"occluded_tower", c.occluded_tower ? json(std::string(to_string(*c.occluded_tower))) : json(nullptr)},
              {"end_zone_contact", c.end_zone_contact ? json(std::string(to_string(*c.end_zone_contact))) : json(nullptr)},
              {"show_ring", c.show_ring},
              {"show_instrument", c.show_instrument}};
  return doc.dump(2);
}

CaseSpec case_spec_from_json(std::string_view text) {
  const std::string a = "script";
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(a, std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InputError(a, "document must be an object");
  static const std::vector<std::string> allowed = {
      "schema_version", "name", "kind", "seed", "noise_sigma", "lead_in", "segment_frames",
      "transfer_frames", "tail_frames", "jitters", "crashes", "occluded_tower", "end_zone_contact",
      "show_ring", "show_instrument"};
  for (const auto& [key, _] : doc.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw InputError(a, "unknown field '" + key + "'");
  if (doc.value("schema_version", kSchemaVersion) != kSchemaVersion)
    throw InputError(a, "unsupported schema_version");

  auto tower_of = [&](const json& v) {
    auto t = v.is_string() ? parse_tower(v.get<std::string>()) : std::nullopt;
    if (!t) throw InputError(a, "unknown tower " + v.dump());
    return *t;
  };

  CaseSpec c;
  try {
    c.name = doc.value("name", c.name);
    c.kind = doc.value("kind", c.kind);
    c.seed = doc.value("seed", c.seed);
    c.noise_sigma = doc.value("noise_sigma", c.noise_sigma);
    c.lead_in = doc.value("lead_in", c.lead_in);
    if (doc.contains("segment_frames")) c.segment_frames = doc["segment_frames"].get<std::array<int, 4>>();
    c.transfer_frames = doc.value("transfer_frames", c.transfer_frames);
    c.tail_frames = doc.value("tail_frames", c.tail_frames);
    c.show_ring = doc.value("show_ring", c.show_ring);
    c.show_instrument = doc.value("show_instrument", c.show_instrument);
    for (const json& j : doc.value("jitters", json::array())) {
      JitterEvent e;
      e.tower = tower_of(j.at("tower"));
      e.start_frame = j.at("start_frame").get<int>();
      e.end_frame = j.at("end_frame").get<int>();
      e.dx = j.value("dx", 0);
      e.dy = j.value("dy", 0);
      e.is_error = j.value("is_error", true);
      c.jitters.push_back(e);
    }
    for (const json& k : doc.value("crashes", json::array()))
      c.crashes.push_back({k.at("start_frame").get<int>(), k.at("end_frame").get<int>()});
    if (doc.contains("occluded_tower") && !doc["occluded_tower"].is_null())
      c.occluded_tower = tower_of(doc["occluded_tower"]);
    if (doc.contains("end_zone_contact") && !doc["end_zone_contact"].is_null())
      c.end_zone_contact = tower_of(doc["end_zone_contact"]);
  } catch (const json::exception& e) {
    throw InputError(a, e.what());
  }
  if (c.lead_in < 0 || c.transfer_frames < 0 || c.tail_frames < 0 ||
      std::any_of(c.segment_frames.begin(), c.segment_frames.end(), [](int n) { return n < 2; }))
    throw InputError(a, "invalid frame counts");
  return c;
}

// ---------------------------------------------------------------------------

std::vector<CaseSpec> default_corpus(double noise_sigma, std::uint64_t seed) {
  static const char* kKinds[] = {"static",   "single",   "multiple", "occlusion", "crash",
                                 "end_zone", "single",   "multiple", "occlusion", "crash",
                                 "end_zone", "static",   "single",   "multiple",  "occlusion",
                                 "crash",    "end_zone", "multiple", "single",    "static"};
  const auto towers = board();
  std::vector<CaseSpec> specs;
  for (int i = 0; i < 20; ++i) {
    CaseSpec c;
    char name[32];
    std::snprintf(name, sizeof name, "case_%02d", i);
    c.name = name;
    c.kind = kKinds[i];
    c.seed = mix(seed, static_cast<std::uint64_t>(i));
    c.noise_sigma = noise_sigma;
    std::mt19937_64 rng(c.seed);
    auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    const auto ranges = segment_ranges(c);

    // Frames of a segment where a collision can be scripted without touching
    // the head and tail rules or, on horizontal towers, the end zone.
    auto window = [&](TowerId t) -> std::pair<int, int> {
      const auto [first, last] = ranges[slot(t)];
      if (is_vertical(t)) return {first + 16, last - 16};
      const int entry = end_zone_entry_frame(towers[slot(t)], first, last).value_or(last);
      return {first + 16, entry - 12};
    };
    auto add_jitter = [&](TowerId t, int lo, int hi) {
      const int len = std::min(uniform(72, 100), hi - lo);
      const int start = uniform(lo, hi - len);
      const int amp = uniform(0, 1) ? 3 : -3;
      JitterEvent e{t, start, start + len, is_vertical(t) ? amp : 0, is_vertical(t) ? 0 : amp, true};
      c.jitters.push_back(e);
      return e;
    };
    auto random_tower = [&] { return kTowerOrder[static_cast<std::size_t>(uniform(0, 3))]; };
    auto other_tower = [&](TowerId t) {
      TowerId u = random_tower();
      while (u == t) u = random_tower();
      return u;
    };

    const std::string kind = c.kind;
    if (kind == "single") {
      const TowerId t = random_tower();
      auto [lo, hi] = window(t);
      add_jitter(t, lo, hi);
    } else if (kind == "multiple") {
      const TowerId t = random_tower();
      const TowerId u = other_tower(t);
      for (TowerId x : {t, u}) {
        auto [lo, hi] = window(x);
        add_jitter(x, lo, hi);
      }
    } else if (kind == "occlusion") {
      const TowerId t = random_tower();
      c.occluded_tower = t;
      auto [lo, hi] = window(t);
      add_jitter(t, lo, hi);
    } else if (kind == "crash") {
      const TowerId t = random_tower();
      auto [lo, hi] = window(t);
      const JitterEvent e = add_jitter(t, lo + 4, hi - 4);
      c.crashes.push_back({e.start_frame - 4, e.end_frame + 4});
      const TowerId u = other_tower(t);
      auto [lo2, hi2] = window(u);
      add_jitter(u, lo2, hi2);
    } else if (kind == "end_zone") {
      c.end_zone_contact = uniform(0, 1) ? TowerId::LH : TowerId::RH;
      const TowerId u = uniform(0, 1) ? TowerId::RV : TowerId::LV;
      auto [lo, hi] = window(u);
      add_jitter(u, lo, hi);
    }
    specs.push_back(std::move(c));
  }
  return specs;
}

void write_case(const CaseSpec& spec, const fs::path& dir) {
  const SceneScript script = build_script(spec);
  const fs::path root = dir / spec.name;
  fs::create_directories(root / "frames");
  const std::vector<double> stamps = render_timestamps(script);
  for (int i = 0; i < script.frame_count; ++i)
    write_png(render_frame(script, i), root / "frames" / frame_filename(i));
  save_timestamps(stamps, root / "timestamps.csv");
  save_segmentation(script.segmentation, root / "segmentation.json");
  save_labels(ground_truth(script), root / "truth.json");
  std::ofstream(root / "case.json") << case_spec_to_json(spec) << "\n";
}

void write_corpus(const std::vector<CaseSpec>& specs, const fs::path& dir) {
  fs::create_directories(dir);
  json cases = json::array();
  for (const auto& spec : specs) {
    write_case(spec, dir);
    const ErrorIntervalSet truth = ground_truth(build_script(spec));
    cases.push_back({{"name", spec.name},
                     {"kind", spec.kind},
                     {"noise_sigma", spec.noise_sigma},
                     {"truth", json::parse(labels_to_json(truth))["intervals"]}});
  }
  json manifest = {{"schema_version", kSchemaVersion}, {"cases", cases}};
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";
}

}  // namespace ringtower
