#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ringtower/data_model.hpp"

namespace ringtower {

enum class Timing { Before, During, After };
std::string_view to_string(Timing t);
std::optional<Timing> parse_timing(std::string_view name);

struct TowerMetrics {
  double time_s = 0.0;        // end timestamp - start timestamp
  int errors = 0;             // separate collisions
  double error_time_s = 0.0;  // Σ (last error timestamp - first error timestamp)
};

struct MetricsRecord {
  std::string source_id;
  std::string resident;
  int shift = 0;  // 1-6, 0 when unknown
  Timing timing = Timing::Before;
  double completion_time_s = 0.0;
  int number_of_errors = 0;
  double error_percentage = 0.0;  // fraction in [0,1]
  std::array<TowerMetrics, 4> towers;
};

// Sum over the four towers of timestamp(end_frame) - timestamp(start_frame).
double completion_time(const Segmentation& seg, std::span<const double> timestamps);
int count_errors(const ErrorIntervalSet& labels);
// Throws InputError when completion_time <= 0.
double error_percentage(const ErrorIntervalSet& labels, std::span<const double> timestamps,
                        double completion_time);

MetricsRecord compute_metrics(const ErrorIntervalSet& labels, const Segmentation& seg,
                              std::span<const double> timestamps);

struct ConfusionCounts {
  long tp = 0, tn = 0, fp = 0, fn = 0;

  long total() const { return tp + tn + fp + fn; }
  std::optional<double> accuracy() const;
  std::optional<double> tpr() const;
  std::optional<double> tnr() const;
  std::optional<double> f1() const;  // absent when tp + fp + fn == 0

  ConfusionCounts& operator+=(const ConfusionCounts& o);
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// Frame-level counts over every in-segment, non-crash frame.
struct ConfusionReport {
  std::array<ConfusionCounts, 4> per_tower;
  ConfusionCounts pooled;
};

ConfusionReport confusion(const ErrorIntervalSet& pred, const ErrorIntervalSet& truth,
                          const Segmentation& seg);

// Long-format rows plus per (metric, shift, timing) summaries.
struct AggregateRow {
  std::string resident;
  int shift = 0;
  Timing timing = Timing::Before;
  std::string metric;
  double value = 0.0;
};

struct AggregateCell {
  std::string metric;
  int shift = 0;
  Timing timing = Timing::Before;
  long n = 0;
  double mean = 0.0;
  std::optional<double> ci_low, ci_high;  // mean ± 1.96·sd/√n; absent for n < 2
};

struct AggregateTable {
  std::vector<AggregateRow> rows;
  std::vector<AggregateCell> cells;
};

// Throws InputError on a duplicate (resident, shift, timing).
AggregateTable aggregate_visits(const std::vector<MetricsRecord>& records);

// CSV files. Each begins with a "# <name> schema_version=1" comment line.
void write_metrics_csv(const std::vector<MetricsRecord>& records, const std::filesystem::path& path);
std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path);
void write_confusion_csv(const std::string& source_id, const ConfusionReport& report,
                         const std::filesystem::path& path);
void write_aggregate_csv(const AggregateTable& table, const std::filesystem::path& rows_path,
                         const std::filesystem::path& cells_path);

}  // namespace ringtower
