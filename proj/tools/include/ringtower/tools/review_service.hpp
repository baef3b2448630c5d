#pragma once

// Label review session and the HTTP/JSON service the browser UI talks to.

#include <filesystem>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "ringtower/data_model.hpp"
#include "ringtower/metrics.hpp"
#include "ringtower/vision.hpp"

namespace httplib {
class Server;
}

namespace ringtower::tools {

// Another writer holds the session.
class SessionBusy : public std::runtime_error {
 public:
  SessionBusy() : std::runtime_error("session: another write is in progress") {}
};

// PUT of a label set that breaks the interval invariants.
class LabelsRejected : public std::runtime_error {
 public:
  explicit LabelsRejected(std::vector<LabelViolation> violations);
  const std::vector<LabelViolation>& violations() const { return violations_; }

 private:
  std::vector<LabelViolation> violations_;
};

class ReviewSession {
 public:
  // Starts from `corrected` when given, otherwise from a copy of the auto labels.
  ReviewSession(FrameSequence frames, Segmentation seg, ErrorIntervalSet auto_labels,
                std::optional<ErrorIntervalSet> corrected, std::filesystem::path save_path,
                DetectorConfig config = {});

  // Loads a session from disk; an existing corrected file is picked up.
  static ReviewSession open(const std::filesystem::path& frames, const std::filesystem::path& timestamps,
                            const std::filesystem::path& segmentation,
                            const std::filesystem::path& labels,
                            const std::filesystem::path& corrected,
                            const DetectorConfig& config = {});

  const FrameSequence& frames() const { return frames_; }
  const Segmentation& segmentation() const { return seg_; }
  const DetectorConfig& config() const { return config_; }
  const ErrorIntervalSet& auto_labels() const { return auto_; }
  const std::filesystem::path& save_path() const { return save_path_; }

  ErrorIntervalSet corrected() const;
  bool dirty() const;
  ConfusionReport live_confusion() const;

  // Writers. Each throws SessionBusy while another writer holds the session.
  void replace(ErrorIntervalSet labels);  // throws LabelsRejected
  ErrorIntervalSet toggle(int frame, TowerId tower);  // throws InputError outside the segment
  void save();

  // Holds the writer slot, as a write in progress would.
  std::unique_lock<std::mutex> hold_writer();

 private:
  std::unique_lock<std::mutex> writer_or_throw();

  FrameSequence frames_;
  Segmentation seg_;
  ErrorIntervalSet auto_;
  std::filesystem::path save_path_;
  DetectorConfig config_;

  mutable std::shared_mutex state_mutex_;
  std::mutex writer_mutex_;
  ErrorIntervalSet corrected_;
  bool dirty_ = false;
};

// JSON bodies shared by the endpoints.
std::string session_json(const ReviewSession& session);
std::string labels_state_json(const ReviewSession& session);
std::string confusion_json(const ConfusionReport& report);
std::string masks_json(const ReviewSession& session, int frame);

// Outer boundaries of a mask's blobs as closed polygons through boundary pixel coordinates.
std::vector<std::vector<Point>> mask_polygons(const BinaryMask& mask);

// Registers every endpoint on a fresh server. The session must outlive it.
std::unique_ptr<httplib::Server> make_review_server(ReviewSession& session);

}  // namespace ringtower::tools
