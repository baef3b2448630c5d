#include "ringtower/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace ringtower {
namespace {

std::string num(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : ""; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

double stamp(std::span<const double> timestamps, int frame) {
  if (frame < 0 || static_cast<std::size_t>(frame) >= timestamps.size())
    throw InputError("timestamps", "no timestamp for frame", frame);
  return timestamps[static_cast<std::size_t>(frame)];
}

std::optional<double> ratio(long num, long den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::ofstream open_csv(const std::filesystem::path& path, const char* name) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError(name, "cannot write " + path.string());
  out << "# " << name << " schema_version=" << kSchemaVersion << "\n";
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

constexpr const char* kMetricNames[] = {"completion_time_s", "number_of_errors", "error_percentage"};

}  // namespace

std::string_view to_string(Timing t) {
  switch (t) {
    case Timing::Before: return "before";
    case Timing::During: return "during";
    case Timing::After: return "after";
  }
  return "?";
}

std::optional<Timing> parse_timing(std::string_view name) {
  const std::string n = lower(name);
  if (n == "before") return Timing::Before;
  if (n == "during") return Timing::During;
  if (n == "after") return Timing::After;
  return std::nullopt;
}

double completion_time(const Segmentation& seg, std::span<const double> timestamps) {
  validate_segmentation(seg);
  double total = 0.0;
  for (TowerId t : kTowerOrder) {
    const auto& s = seg.segment(t);
    total += stamp(timestamps, s.end_frame) - stamp(timestamps, s.start_frame);
  }
  return total;
}

int count_errors(const ErrorIntervalSet& labels) {
  int n = 0;
  for (const auto& ivs : labels.intervals) n += static_cast<int>(ivs.size());
  return n;
}

double error_percentage(const ErrorIntervalSet& labels, std::span<const double> timestamps,
                        double completion) {
  if (!(completion > 0.0)) throw InputError("metrics", "completion time must be positive");
  double error_time = 0.0;
  for (const auto& ivs : labels.intervals)
    for (const auto& iv : ivs)
      error_time += stamp(timestamps, iv.end_frame) - stamp(timestamps, iv.start_frame);
  return error_time / completion;
}

MetricsRecord compute_metrics(const ErrorIntervalSet& labels, const Segmentation& seg,
                              std::span<const double> timestamps) {
  validate_labels(labels, seg);
  MetricsRecord rec;
  rec.source_id = seg.source_id;
  for (TowerId t : kTowerOrder) {
    const auto& s = seg.segment(t);
    TowerMetrics& m = rec.towers[slot(t)];
    m.time_s = stamp(timestamps, s.end_frame) - stamp(timestamps, s.start_frame);
    m.errors = static_cast<int>(labels.of(t).size());
    for (const auto& iv : labels.of(t))
      m.error_time_s += stamp(timestamps, iv.end_frame) - stamp(timestamps, iv.start_frame);
  }
  rec.completion_time_s = completion_time(seg, timestamps);
  rec.number_of_errors = count_errors(labels);
  rec.error_percentage = error_percentage(labels, timestamps, rec.completion_time_s);
  return rec;
}

std::optional<double> ConfusionCounts::accuracy() const { return ratio(tp + tn, total()); }
std::optional<double> ConfusionCounts::tpr() const { return ratio(tp, tp + fn); }
std::optional<double> ConfusionCounts::tnr() const { return ratio(tn, tn + fp); }
std::optional<double> ConfusionCounts::f1() const { return ratio(2 * tp, 2 * tp + fp + fn); }

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp, tn += o.tn, fp += o.fp, fn += o.fn;
  return *this;
}

ConfusionReport confusion(const ErrorIntervalSet& pred, const ErrorIntervalSet& truth,
                          const Segmentation& seg) {
  validate_segmentation(seg);
  validate_labels(pred, seg);
  validate_labels(truth, seg);
  ConfusionReport report;
  for (TowerId t : kTowerOrder) {
    const auto& s = seg.segment(t);
    std::vector<bool> p(static_cast<std::size_t>(s.length())), g(p.size());
    for (const auto& iv : pred.of(t))
      for (int f = iv.start_frame; f <= iv.end_frame; ++f) p[static_cast<std::size_t>(f - s.start_frame)] = true;
    for (const auto& iv : truth.of(t))
      for (int f = iv.start_frame; f <= iv.end_frame; ++f) g[static_cast<std::size_t>(f - s.start_frame)] = true;

    ConfusionCounts& c = report.per_tower[slot(t)];
    for (int f = s.start_frame; f <= s.end_frame; ++f) {
      if (seg.is_crash_frame(f)) continue;
      const auto i = static_cast<std::size_t>(f - s.start_frame);
      if (p[i] && g[i]) ++c.tp;
      else if (p[i]) ++c.fp;
      else if (g[i]) ++c.fn;
      else ++c.tn;
    }
    report.pooled += c;
  }
  return report;
}

AggregateTable aggregate_visits(const std::vector<MetricsRecord>& records) {
  std::set<std::tuple<std::string, int, Timing>> seen;
  AggregateTable table;
  std::map<std::tuple<std::string, int, Timing>, std::vector<double>> cells;
  for (const auto& r : records) {
    if (!seen.insert({r.resident, r.shift, r.timing}).second)
      throw InputError("aggregate", "duplicate visit for resident '" + r.resident + "', shift " +
                                        std::to_string(r.shift) + ", " +
                                        std::string(to_string(r.timing)));
    const double values[] = {r.completion_time_s, static_cast<double>(r.number_of_errors),
                             r.error_percentage};
    for (std::size_t m = 0; m < 3; ++m) {
      table.rows.push_back({r.resident, r.shift, r.timing, kMetricNames[m], values[m]});
      cells[{kMetricNames[m], r.shift, r.timing}].push_back(values[m]);
    }
  }
  // Long rows grouped by metric, in input order within each metric.
  std::stable_sort(table.rows.begin(), table.rows.end(), [](const auto& a, const auto& b) {
    auto rank = [](const std::string& m) {
      return std::find(std::begin(kMetricNames), std::end(kMetricNames), m) - std::begin(kMetricNames);
    };
    return rank(a.metric) < rank(b.metric);
  });

  for (const auto& [key, values] : cells) {
    AggregateCell cell;
    std::tie(cell.metric, cell.shift, cell.timing) = key;
    cell.n = static_cast<long>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    cell.mean = sum / static_cast<double>(cell.n);
    if (cell.n >= 2) {
      double ss = 0.0;
      for (double v : values) ss += (v - cell.mean) * (v - cell.mean);
      const double sd = std::sqrt(ss / static_cast<double>(cell.n - 1));
      const double half = 1.96 * sd / std::sqrt(static_cast<double>(cell.n));
      cell.ci_low = cell.mean - half;
      cell.ci_high = cell.mean + half;
    }
    table.cells.push_back(cell);
  }
  return table;
}

void write_metrics_csv(const std::vector<MetricsRecord>& records, const std::filesystem::path& path) {
  auto out = open_csv(path, "metrics");
  out << "source_id,resident,shift,timing,completion_time_s,number_of_errors,error_percentage";
  for (const char* field : {"time", "errors", "error_time"})
    for (TowerId t : kTowerOrder) {
      out << ',' << field << '_' << lower(to_string(t));
      if (std::string_view(field) != "errors") out << "_s";
    }
  out << '\n';
  for (const auto& r : records) {
    out << r.source_id << ',' << r.resident << ',' << r.shift << ',' << to_string(r.timing) << ','
        << num(r.completion_time_s) << ',' << r.number_of_errors << ',' << num(r.error_percentage);
    for (const auto& m : r.towers) out << ',' << num(m.time_s);
    for (const auto& m : r.towers) out << ',' << m.errors;
    for (const auto& m : r.towers) out << ',' << num(m.error_time_s);
    out << '\n';
  }
}

std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("metrics", "not found: " + path.string());
  std::string line;
  std::vector<MetricsRecord> out;
  bool header = false;
  long row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line.rfind("source_id,resident,shift,timing,", 0) != 0)
        throw InputError("metrics", "unexpected header in " + path.string());
      header = true;
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != 19) throw InputError("metrics", "expected 19 columns", row);
    try {
      MetricsRecord r;
      r.source_id = cells[0];
      r.resident = cells[1];
      r.shift = std::stoi(cells[2]);
      auto timing = parse_timing(cells[3]);
      if (!timing) throw InputError("metrics", "unknown timing '" + cells[3] + "'", row);
      r.timing = *timing;
      r.completion_time_s = std::stod(cells[4]);
      r.number_of_errors = std::stoi(cells[5]);
      r.error_percentage = std::stod(cells[6]);
      for (std::size_t t = 0; t < 4; ++t) {
        r.towers[t].time_s = std::stod(cells[7 + t]);
        r.towers[t].errors = std::stoi(cells[11 + t]);
        r.towers[t].error_time_s = std::stod(cells[15 + t]);
      }
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw InputError("metrics", "malformed number", row);
    }
    ++row;
  }
  return out;
}

void write_confusion_csv(const std::string& source_id, const ConfusionReport& report,
                         const std::filesystem::path& path) {
  auto out = open_csv(path, "confusion");
  out << "source_id,tower,tp,tn,fp,fn,accuracy,tpr,tnr,f1\n";
  auto row = [&](std::string_view tower, const ConfusionCounts& c) {
    out << source_id << ',' << tower << ',' << c.tp << ',' << c.tn << ',' << c.fp << ',' << c.fn
        << ',' << opt_num(c.accuracy()) << ',' << opt_num(c.tpr()) << ',' << opt_num(c.tnr())
        << ',' << opt_num(c.f1()) << '\n';
  };
  for (TowerId t : kTowerOrder) row(to_string(t), report.per_tower[slot(t)]);
  row("pooled", report.pooled);
}

void write_aggregate_csv(const AggregateTable& table, const std::filesystem::path& rows_path,
                         const std::filesystem::path& cells_path) {
  {
    auto out = open_csv(rows_path, "aggregate");
    out << "resident,shift,timing,metric,value\n";
    for (const auto& r : table.rows)
      out << r.resident << ',' << r.shift << ',' << to_string(r.timing) << ',' << r.metric << ','
          << num(r.value) << '\n';
  }
  auto out = open_csv(cells_path, "aggregate_cells");
  out << "# ci: normal approximation, mean +/- 1.96*sd/sqrt(n), sd with n-1; empty when n < 2\n";
  out << "metric,shift,timing,n,mean,ci_low,ci_high\n";
  for (const auto& c : table.cells)
    out << c.metric << ',' << c.shift << ',' << to_string(c.timing) << ',' << c.n << ','
        << num(c.mean) << ',' << opt_num(c.ci_low) << ',' << opt_num(c.ci_high) << '\n';
}

}  // namespace ringtower
