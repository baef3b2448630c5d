#pragma once

// Batch commands behind the `ringtower` executable. Each reads and writes the
// on-disk formats of the core library and throws InputError on bad input.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ringtower/detector.hpp"
#include "ringtower/metrics.hpp"

namespace ringtower::tools {

namespace fs = std::filesystem;

struct DetectArgs {
  fs::path frames;
  fs::path timestamps;
  fs::path segmentation;
  std::optional<fs::path> config;
  fs::path out;  // labels file
  std::optional<fs::path> trace_dir;
};

// Writes the labels (provenance auto) and, with a trace dir, trace_<TOWER>.csv.
VisitDetection cmd_detect(const DetectArgs& args);

struct OverlayArgs {
  fs::path frames;
  fs::path segmentation;
  fs::path labels;
  std::optional<fs::path> config;
  fs::path out_dir;
};

// Copies every frame to out_dir; frames inside a labelled interval get the
// active tower's mask pixels tinted red. Returns the number of tinted frames.
int cmd_overlay(const OverlayArgs& args);

// Tower pixels of `frame` that the overlay tints when the frame lies in an
// error interval of `segment`.
BinaryMask overlay_mask(const RgbImage& frame, const InteractionSegment& segment,
                        const DetectorConfig& config);
Rgb tint(Rgb pixel);

struct MetricsArgs {
  fs::path labels;
  fs::path segmentation;
  fs::path timestamps;
  fs::path out;
  std::string resident;
  int shift = 0;
  Timing timing = Timing::Before;
};

MetricsRecord cmd_metrics(const MetricsArgs& args);

struct EvaluateArgs {
  fs::path pred;
  fs::path truth;
  fs::path segmentation;
  fs::path out;
};

ConfusionReport cmd_evaluate(const EvaluateArgs& args);

struct AggregateArgs {
  std::vector<fs::path> inputs;  // metrics.csv files
  fs::path out;                  // long-format rows
  fs::path cells_out;            // per-cell means and intervals
};

AggregateTable cmd_aggregate(const AggregateArgs& args);

struct SynthArgs {
  std::optional<fs::path> script;  // a case description (JSON)
  bool default_corpus = false;
  std::optional<double> noise_sigma;
  std::uint64_t seed = 2024;
  fs::path out;
};

// Returns the names of the cases written.
std::vector<std::string> cmd_synth(const SynthArgs& args);

// Frame count of a frames/ directory: frame_000000.png, frame_000001.png, ...
int count_frames(const fs::path& dir);

}  // namespace ringtower::tools
