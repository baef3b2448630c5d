#include <csignal>
#include <iostream>

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ringtower/tools/commands.hpp"
#include "ringtower/tools/review_service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ringtower;
using namespace ringtower::tools;

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;

int report(int code, const json& body) {
  std::cerr << body.dump() << std::endl;
  return code;
}

httplib::Server* g_server = nullptr;

void stop_server(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ring tower transfer analysis: collision detection, metrics and label review"};
  app.require_subcommand(1);

  DetectArgs detect;
  std::string detect_config, detect_trace;
  auto* cmd = app.add_subcommand("detect", "Detect tower collisions and write auto labels");
  cmd->add_option("--frames", detect.frames, "Directory of frame_NNNNNN.png files")->required();
  cmd->add_option("--timestamps", detect.timestamps, "timestamps.csv")->required();
  cmd->add_option("--segmentation", detect.segmentation, "segmentation.json")->required();
  cmd->add_option("--config", detect_config, "Detector configuration JSON");
  cmd->add_option("--out", detect.out, "Output labels JSON")->required();
  cmd->add_option("--trace-dir", detect_trace, "Write per-tower signal traces here");

  OverlayArgs overlay;
  std::string overlay_config;
  cmd = app.add_subcommand("overlay", "Tint the active tower red on error frames");
  cmd->add_option("--frames", overlay.frames)->required();
  cmd->add_option("--segmentation", overlay.segmentation)->required();
  cmd->add_option("--labels", overlay.labels)->required();
  cmd->add_option("--config", overlay_config);
  cmd->add_option("--out", overlay.out_dir, "Output frame directory")->required();

  MetricsArgs metrics;
  std::string timing = "before";
  cmd = app.add_subcommand("metrics", "Completion time, error count and error percentage");
  cmd->add_option("--labels", metrics.labels)->required();
  cmd->add_option("--segmentation", metrics.segmentation)->required();
  cmd->add_option("--timestamps", metrics.timestamps)->required();
  cmd->add_option("--out", metrics.out, "metrics.csv")->required();
  cmd->add_option("--resident", metrics.resident, "Participant identifier");
  cmd->add_option("--shift", metrics.shift, "Shift number")->check(CLI::Range(0, 1000));
  cmd->add_option("--timing", timing, "before, during or after the shift");

  EvaluateArgs evaluate;
  cmd = app.add_subcommand("evaluate", "Frame-level confusion of predicted against reference labels");
  cmd->add_option("--pred", evaluate.pred)->required();
  cmd->add_option("--truth", evaluate.truth)->required();
  cmd->add_option("--segmentation", evaluate.segmentation)->required();
  cmd->add_option("--out", evaluate.out, "confusion.csv")->required();

  AggregateArgs aggregate;
  cmd = app.add_subcommand("aggregate", "Long-format table and per-cell confidence intervals");
  cmd->add_option("inputs", aggregate.inputs, "metrics.csv files")->required();
  cmd->add_option("--out", aggregate.out, "aggregate.csv")->required();
  cmd->add_option("--cells-out", aggregate.cells_out, "aggregate_cells.csv")->required();

  SynthArgs synth;
  std::string synth_script;
  double synth_noise = 0.0;
  cmd = app.add_subcommand("synth", "Render synthetic visits with ground truth");
  cmd->add_option("--script", synth_script, "Case description JSON");
  cmd->add_flag("--default-corpus", synth.default_corpus, "Render the 20-case benchmark corpus");
  auto* noise_opt = cmd->add_option("--noise", synth_noise, "Gaussian pixel noise sigma");
  cmd->add_option("--seed", synth.seed, "Corpus seed");
  cmd->add_option("--out", synth.out)->required();

  fs::path serve_frames, serve_timestamps, serve_seg, serve_labels;
  std::string serve_corrected, serve_config, host = "127.0.0.1";
  int port = 8080;
  cmd = app.add_subcommand("serve", "HTTP service for reviewing and correcting labels");
  cmd->add_option("--frames", serve_frames)->required();
  cmd->add_option("--timestamps", serve_timestamps)->required();
  cmd->add_option("--segmentation", serve_seg)->required();
  cmd->add_option("--labels", serve_labels, "Auto labels")->required();
  cmd->add_option("--corrected", serve_corrected, "Corrected labels file (default: next to --labels)");
  cmd->add_option("--config", serve_config);
  cmd->add_option("--host", host);
  cmd->add_option("--port", port)->check(CLI::Range(0, 65535));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(kExitInput, {{"error", std::string("usage: ") + e.what()}});
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "detect") {
      if (!detect_config.empty()) detect.config = detect_config;
      if (!detect_trace.empty()) detect.trace_dir = detect_trace;
      const VisitDetection result = cmd_detect(detect);
      json summary = {{"labels", detect.out.string()}};
      for (TowerId t : kTowerOrder) summary["intervals"][std::string(to_string(t))] = result.labels.of(t).size();
      std::cout << summary.dump() << "\n";
    } else if (name == "overlay") {
      if (!overlay_config.empty()) overlay.config = overlay_config;
      std::cout << json{{"tinted_frames", cmd_overlay(overlay)}}.dump() << "\n";
    } else if (name == "metrics") {
      const auto t = parse_timing(timing);
      if (!t) throw InputError("metrics", "timing must be before, during or after");
      metrics.timing = *t;
      const MetricsRecord r = cmd_metrics(metrics);
      std::cout << json{{"completion_time_s", r.completion_time_s},
                        {"number_of_errors", r.number_of_errors},
                        {"error_percentage", r.error_percentage}}
                       .dump()
                << "\n";
    } else if (name == "evaluate") {
      const ConfusionReport r = cmd_evaluate(evaluate);
      std::cout << confusion_json(r) << "\n";
    } else if (name == "aggregate") {
      const AggregateTable t = cmd_aggregate(aggregate);
      std::cout << json{{"rows", t.rows.size()}, {"cells", t.cells.size()}}.dump() << "\n";
    } else if (name == "synth") {
      if (!synth_script.empty()) synth.script = synth_script;
      if (noise_opt->count() > 0) synth.noise_sigma = synth_noise;
      std::cout << json{{"cases", cmd_synth(synth)}}.dump() << "\n";
    } else if (name == "serve") {
      const fs::path corrected = serve_corrected.empty()
                                     ? serve_labels.parent_path() / "corrected.json"
                                     : fs::path(serve_corrected);
      const DetectorConfig config = serve_config.empty() ? DetectorConfig{} : load_config(serve_config);
      ReviewSession session =
          ReviewSession::open(serve_frames, serve_timestamps, serve_seg, serve_labels, corrected, config);
      auto server = make_review_server(session);
      g_server = server.get();
      std::signal(SIGINT, stop_server);
      std::signal(SIGTERM, stop_server);
      if (port == 0) port = server->bind_to_any_port(host);
      else if (!server->bind_to_port(host, port)) throw std::runtime_error("cannot bind port " + std::to_string(port));
      std::cout << json{{"listening", host + ":" + std::to_string(port)}}.dump() << std::endl;
      server->listen_after_bind();
      g_server = nullptr;
    }
  } catch (const InputError& e) {
    json body = {{"error", e.what()}, {"artifact", e.artifact()}};
    if (e.index()) body["index"] = *e.index();
    return report(kExitInput, body);
  } catch (const std::exception& e) {
    return report(kExitInternal, {{"error", e.what()}});
  }
  return 0;
}
