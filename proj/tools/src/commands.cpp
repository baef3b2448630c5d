#include "ringtower/tools/commands.hpp"

#include <fstream>

#include "ringtower/image_io.hpp"
#include "ringtower/synth.hpp"

namespace ringtower::tools {

namespace {

DetectorConfig config_or_default(const std::optional<fs::path>& path) {
  if (!path) return {};
  return load_config(*path);
}

std::string read_file(const fs::path& path, const std::string& artifact) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(artifact, "not found");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

VisitDetection cmd_detect(const DetectArgs& args) {
  const DetectorConfig config = config_or_default(args.config);
  validate_config(config);
  const FrameSequence frames = load_frames(args.frames, args.timestamps);
  const Segmentation seg = load_segmentation(args.segmentation);

  VisitDetection result = detect_visit(frames, seg, config);
  if (args.out.has_parent_path()) fs::create_directories(args.out.parent_path());
  save_labels(result.labels, args.out);

  if (args.trace_dir) {
    fs::create_directories(*args.trace_dir);
    for (const auto& trace : result.traces)
      write_trace_csv(trace, frames,
                      *args.trace_dir / ("trace_" + std::string(to_string(trace.segment.tower)) + ".csv"));
  }
  return result;
}

int count_frames(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError("frames", "directory not found");
  int n = 0;
  while (fs::exists(dir / frame_filename(n))) ++n;
  if (n == 0) throw InputError("frames", "no frame_000000.png in " + dir.string());
  return n;
}

BinaryMask overlay_mask(const RgbImage& frame, const InteractionSegment& segment,
                        const DetectorConfig& config) {
  return restrict_roi(tower_mask(frame, config), segment.roi);
}

Rgb tint(Rgb p) {
  return {static_cast<std::uint8_t>((p.r + 255) / 2), static_cast<std::uint8_t>(p.g / 2),
          static_cast<std::uint8_t>(p.b / 2)};
}

int cmd_overlay(const OverlayArgs& args) {
  const DetectorConfig config = config_or_default(args.config);
  validate_config(config);
  const Segmentation seg = load_segmentation(args.segmentation);
  const ErrorIntervalSet labels = load_labels(args.labels, seg);
  const int n = count_frames(args.frames);
  validate_segmentation(seg);
  for (const auto& s : seg.segments)
    if (s.end_frame >= n) throw InputError("segmentation", "segment beyond the last frame");

  fs::create_directories(args.out_dir);
  int tinted = 0;
  for (int i = 0; i < n; ++i) {
    const fs::path src = args.frames / frame_filename(i);
    const fs::path dst = args.out_dir / frame_filename(i);
    const InteractionSegment* active = nullptr;
    for (const auto& s : seg.segments)
      for (const auto& iv : labels.of(s.tower))
        if (iv.contains(i)) active = &s;
    if (!active) {
      fs::copy_file(src, dst, fs::copy_options::overwrite_existing);
      continue;
    }
    RgbImage image = read_png(src);
    const BinaryMask mask = overlay_mask(image, *active, config);
    for (int y = 0; y < image.height(); ++y)
      for (int x = 0; x < image.width(); ++x)
        if (mask.get(x, y)) image(x, y) = tint(image(x, y));
    write_png(image, dst);
    ++tinted;
  }
  return tinted;
}

MetricsRecord cmd_metrics(const MetricsArgs& args) {
  const Segmentation seg = load_segmentation(args.segmentation);
  const std::vector<double> timestamps = load_timestamps(args.timestamps);
  validate_segmentation(seg);
  for (const auto& s : seg.segments)
    if (s.end_frame >= static_cast<int>(timestamps.size()))
      throw InputError("segmentation", "segment beyond the last timestamp");
  const ErrorIntervalSet labels = load_labels(args.labels, seg);

  MetricsRecord record = compute_metrics(labels, seg, timestamps);
  record.resident = args.resident;
  record.shift = args.shift;
  record.timing = args.timing;
  if (args.out.has_parent_path()) fs::create_directories(args.out.parent_path());
  write_metrics_csv({record}, args.out);
  return record;
}

ConfusionReport cmd_evaluate(const EvaluateArgs& args) {
  const Segmentation seg = load_segmentation(args.segmentation);
  const ErrorIntervalSet pred = load_labels(args.pred, seg);
  const ErrorIntervalSet truth = load_labels(args.truth, seg);
  const ConfusionReport report = confusion(pred, truth, seg);
  if (args.out.has_parent_path()) fs::create_directories(args.out.parent_path());
  write_confusion_csv(seg.source_id, report, args.out);
  return report;
}

AggregateTable cmd_aggregate(const AggregateArgs& args) {
  if (args.inputs.empty()) throw InputError("metrics", "no input files");
  std::vector<MetricsRecord> records;
  for (const auto& path : args.inputs) {
    auto part = read_metrics_csv(path);
    records.insert(records.end(), part.begin(), part.end());
  }
  AggregateTable table = aggregate_visits(records);
  for (const auto& p : {args.out, args.cells_out})
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
  write_aggregate_csv(table, args.out, args.cells_out);
  return table;
}

std::vector<std::string> cmd_synth(const SynthArgs& args) {
  if (args.script.has_value() == args.default_corpus)
    throw InputError("script", "give exactly one of --script and --default-corpus");
  if (args.noise_sigma && !(*args.noise_sigma >= 0.0))
    throw InputError("script", "noise must be non-negative");

  std::vector<CaseSpec> specs;
  if (args.default_corpus) {
    specs = default_corpus(args.noise_sigma.value_or(0.0), args.seed);
  } else {
    CaseSpec spec = case_spec_from_json(read_file(*args.script, "script"));
    if (args.noise_sigma) spec.noise_sigma = *args.noise_sigma;
    specs.push_back(std::move(spec));
  }
  write_corpus(specs, args.out);
  std::vector<std::string> names;
  for (const auto& s : specs) names.push_back(s.name);
  return names;
}

}  // namespace ringtower::tools
