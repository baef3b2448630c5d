#include "ringtower/tools/review_service.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ringtower/image_io.hpp"

namespace ringtower::tools {

using nlohmann::json;

LabelsRejected::LabelsRejected(std::vector<LabelViolation> violations)
    : std::runtime_error("labels: invalid intervals"), violations_(std::move(violations)) {}

ReviewSession::ReviewSession(FrameSequence frames, Segmentation seg, ErrorIntervalSet auto_labels,
                             std::optional<ErrorIntervalSet> corrected,
                             std::filesystem::path save_path, DetectorConfig config)
    : frames_(std::move(frames)),
      seg_(std::move(seg)),
      auto_(std::move(auto_labels)),
      save_path_(std::move(save_path)),
      config_(config) {
  validate_segmentation(seg_, frames_.size(), frames_.width(), frames_.height());
  validate_labels(auto_, seg_);
  corrected_ = corrected ? *corrected : auto_;
  validate_labels(corrected_, seg_);
  corrected_.provenance = Provenance::Corrected;
}

ReviewSession ReviewSession::open(const std::filesystem::path& frames,
                                  const std::filesystem::path& timestamps,
                                  const std::filesystem::path& segmentation,
                                  const std::filesystem::path& labels,
                                  const std::filesystem::path& corrected,
                                  const DetectorConfig& config) {
  validate_config(config);
  Segmentation seg = load_segmentation(segmentation);
  ErrorIntervalSet auto_labels = load_labels(labels, seg);
  std::optional<ErrorIntervalSet> existing;
  if (std::filesystem::exists(corrected)) existing = load_labels(corrected, seg);
  return ReviewSession(load_frames(frames, timestamps), std::move(seg), std::move(auto_labels),
                       std::move(existing), corrected, config);
}

ErrorIntervalSet ReviewSession::corrected() const {
  std::shared_lock lock(state_mutex_);
  return corrected_;
}

bool ReviewSession::dirty() const {
  std::shared_lock lock(state_mutex_);
  return dirty_;
}

ConfusionReport ReviewSession::live_confusion() const {
  std::shared_lock lock(state_mutex_);
  return confusion(auto_, corrected_, seg_);
}

std::unique_lock<std::mutex> ReviewSession::hold_writer() {
  return std::unique_lock<std::mutex>(writer_mutex_);
}

std::unique_lock<std::mutex> ReviewSession::writer_or_throw() {
  std::unique_lock<std::mutex> writer(writer_mutex_, std::try_to_lock);
  if (!writer.owns_lock()) throw SessionBusy();
  return writer;
}

void ReviewSession::replace(ErrorIntervalSet labels) {
  auto writer = writer_or_throw();
  auto violations = label_violations(labels, &seg_);
  if (!violations.empty()) throw LabelsRejected(std::move(violations));
  labels.provenance = Provenance::Corrected;
  std::unique_lock lock(state_mutex_);
  corrected_ = std::move(labels);
  dirty_ = true;
}

ErrorIntervalSet ReviewSession::toggle(int frame, TowerId tower) {
  auto writer = writer_or_throw();
  if (!seg_.segment(tower).contains(frame))
    throw InputError("labels", std::string(to_string(tower)) + ": frame outside segment", frame);
  std::unique_lock lock(state_mutex_);
  std::vector<int> frames = frames_of(corrected_.of(tower));
  const auto it = std::find(frames.begin(), frames.end(), frame);
  if (it == frames.end())
    frames.push_back(frame);
  else
    frames.erase(it);
  corrected_.of(tower) = intervals_from_frames(std::move(frames));
  dirty_ = true;
  return corrected_;
}

void ReviewSession::save() {
  auto writer = writer_or_throw();
  ErrorIntervalSet snapshot = corrected();
  save_labels(snapshot, save_path_);
  std::unique_lock lock(state_mutex_);
  dirty_ = false;
}

// ---------------------------------------------------------------------------

namespace {

json counts_json(const ConfusionCounts& c) {
  auto opt = [](std::optional<double> v) { return v ? json(*v) : json(nullptr); };
  return {{"tp", c.tp},           {"tn", c.tn},          {"fp", c.fp},
          {"fn", c.fn},           {"accuracy", opt(c.accuracy())}, {"tpr", opt(c.tpr())},
          {"tnr", opt(c.tnr())},  {"f1", opt(c.f1())}};
}

json polygons_json(const std::vector<std::vector<Point>>& polys) {
  json out = json::array();
  for (const auto& poly : polys) {
    json pts = json::array();
    for (const auto& p : poly) pts.push_back({static_cast<int>(p.x), static_cast<int>(p.y)});
    out.push_back(std::move(pts));
  }
  return out;
}

const InteractionSegment* segment_at(const Segmentation& seg, int frame) {
  for (const auto& s : seg.segments)
    if (s.contains(frame)) return &s;
  return nullptr;
}

json error_body(const std::string& message) {
  return {{"schema_version", kSchemaVersion}, {"error", message}};
}

json input_error_body(const InputError& e) {
  json body = error_body(e.what());
  body["artifact"] = e.artifact();
  if (e.index()) body["index"] = *e.index();
  return body;
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

std::optional<int> frame_param(const httplib::Request& req, const ReviewSession& session,
                               httplib::Response& res) {
  const std::string text = req.matches[1];
  int frame = -1;
  try {
    frame = std::stoi(text);
  } catch (const std::exception&) {
  }
  if (frame < 0 || frame >= session.frames().size()) {
    reply(res, 404, error_body("frame " + text + " out of range"));
    return std::nullopt;
  }
  return frame;
}

// Runs a handler and maps the library's exceptions onto status codes.
template <typename F>
void guarded(httplib::Response& res, F&& handler) {
  try {
    handler();
  } catch (const SessionBusy& e) {
    reply(res, 409, error_body(e.what()));
  } catch (const LabelsRejected& e) {
    json violations = json::array();
    for (const auto& v : e.violations())
      violations.push_back(
          {{"tower", std::string(to_string(v.tower))}, {"indices", v.indices}, {"message", v.message}});
    json body = error_body(e.what());
    body["violations"] = violations;
    reply(res, 422, body);
  } catch (const InputError& e) {
    reply(res, 422, input_error_body(e));
  } catch (const json::exception& e) {
    reply(res, 400, error_body(std::string("malformed request: ") + e.what()));
  } catch (const std::exception& e) {
    reply(res, 500, error_body(e.what()));
  }
}

}  // namespace

std::string session_json(const ReviewSession& session) {
  const auto& seg = session.segmentation();
  json segments = json::array();
  for (const auto& s : seg.segments) {
    json item = {{"tower", std::string(to_string(s.tower))},
                 {"start_frame", s.start_frame},
                 {"end_frame", s.end_frame},
                 {"roi", {{"x", s.roi.x}, {"y", s.roi.y}, {"width", s.roi.width}, {"height", s.roi.height}}}};
    item["end_zone_x"] = s.end_zone_x ? json(*s.end_zone_x) : json(nullptr);
    segments.push_back(std::move(item));
  }
  json crashes = json::array();
  for (const auto& c : seg.crashes) crashes.push_back({{"start_frame", c.start_frame}, {"end_frame", c.end_frame}});
  json doc = {{"schema_version", kSchemaVersion},
              {"source_id", seg.source_id},
              {"frame_count", session.frames().size()},
              {"width", session.frames().width()},
              {"height", session.frames().height()},
              {"timestamps", session.frames().timestamps()},
              {"segments", segments},
              {"crashes", crashes},
              {"labels",
               {{"auto", std::string(to_string(session.auto_labels().provenance))},
                {"working", std::string(to_string(Provenance::Corrected))}}},
              {"dirty", session.dirty()}};
  return doc.dump();
}

std::string labels_state_json(const ReviewSession& session) {
  json doc = {{"schema_version", kSchemaVersion},
              {"auto", json::parse(labels_to_json(session.auto_labels()))},
              {"corrected", json::parse(labels_to_json(session.corrected()))},
              {"dirty", session.dirty()}};
  return doc.dump();
}

std::string confusion_json(const ConfusionReport& report) {
  json towers = json::object();
  for (TowerId t : kTowerOrder) towers[std::string(to_string(t))] = counts_json(report.per_tower[slot(t)]);
  json doc = {{"schema_version", kSchemaVersion}, {"per_tower", towers}, {"pooled", counts_json(report.pooled)}};
  return doc.dump();
}

std::vector<std::vector<Point>> mask_polygons(const BinaryMask& mask) {
  cv::Mat m(mask.height(), mask.width(), CV_8UC1, cv::Scalar(0));
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.get(x, y)) m.at<std::uint8_t>(y, x) = 255;
  std::vector<std::vector<cv::Point>> contours;
  cv::findContours(m, contours, cv::RETR_EXTERNAL, cv::CHAIN_APPROX_SIMPLE);
  std::vector<std::vector<Point>> out;
  for (const auto& c : contours) {
    std::vector<Point> poly;
    for (const auto& p : c) poly.push_back({static_cast<double>(p.x), static_cast<double>(p.y)});
    out.push_back(std::move(poly));
  }
  return out;
}

std::string masks_json(const ReviewSession& session, int frame) {
  const RgbImage& image = session.frames()[frame].pixels;
  const InteractionSegment* segment = segment_at(session.segmentation(), frame);
  BinaryMask tower = tower_mask(image, session.config());
  json doc = {{"schema_version", kSchemaVersion}, {"frame", frame}};
  if (segment) {
    tower = restrict_roi(tower, segment->roi);
    doc["tower"] = std::string(to_string(segment->tower));
    doc["ring"] = polygons_json(mask_polygons(ring_mask(image, tower, session.config())));
  } else {
    doc["tower"] = nullptr;
    doc["ring"] = json::array();
  }
  doc["tower_mask"] = polygons_json(mask_polygons(tower));
  return doc.dump();
}

std::unique_ptr<httplib::Server> make_review_server(ReviewSession& session) {
  auto server = std::make_unique<httplib::Server>();
  ReviewSession* s = &session;

  server->Get("/session", [s](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { res.set_content(session_json(*s), "application/json"); });
  });

  server->Get(R"(/frames/(-?\d+))", [s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      if (auto frame = frame_param(req, *s, res)) {
        const auto png = encode_png(s->frames()[*frame].pixels);
        res.set_content(std::string(png.begin(), png.end()), "image/png");
      }
    });
  });

  server->Get(R"(/frames/(-?\d+)/masks)", [s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      if (auto frame = frame_param(req, *s, res)) res.set_content(masks_json(*s, *frame), "application/json");
    });
  });

  server->Get("/labels", [s](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { res.set_content(labels_state_json(*s), "application/json"); });
  });

  server->Put("/labels", [s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      ErrorIntervalSet labels;
      try {
        labels = parse_labels_document(req.body);
      } catch (const InputError& e) {
        reply(res, 400, input_error_body(e));
        return;
      }
      s->replace(std::move(labels));
      res.set_content(labels_state_json(*s), "application/json");
    });
  });

  server->Post("/labels/toggle", [s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = json::parse(req.body);
      const int frame = body.at("frame").get<int>();
      const std::string name = body.at("tower").get<std::string>();
      const auto tower = parse_tower(name);
      if (!tower) throw InputError("labels", "unknown tower '" + name + "'");
      s->toggle(frame, *tower);
      res.set_content(labels_state_json(*s), "application/json");
    });
  });

  server->Get("/confusion", [s](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { res.set_content(confusion_json(s->live_confusion()), "application/json"); });
  });

  server->Post("/save", [s](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      s->save();
      reply(res, 200, {{"schema_version", kSchemaVersion}, {"saved", s->save_path().string()}});
    });
  });

  return server;
}

}  // namespace ringtower::tools
