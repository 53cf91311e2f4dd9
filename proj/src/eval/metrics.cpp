#include <algorithm>
#include <cmath>
#include <numeric>

#include "hforest/eval.hpp"

namespace hforest {

namespace {
constexpr double kStabilityMargin = 0.05;
}

std::optional<std::size_t> convergence_index(const PrequentialReport& report, double threshold, std::size_t window) {
  const auto& r = report.records;
  if (window == 0 || r.size() < window) return std::nullopt;
  for (std::size_t i = window - 1; i < r.size(); ++i) {
    if (r[i].rolling_accuracy < threshold) continue;
    const std::size_t guard_end = std::min(i + window, r.size() - 1);
    bool stable = true;
    for (std::size_t j = i + 1; j <= guard_end && stable; ++j)
      stable = r[j].rolling_accuracy >= threshold - kStabilityMargin;
    if (stable) return i + 1;
  }
  return std::nullopt;
}

std::optional<std::size_t> convergence_index(const PrequentialReport& report, double threshold) {
  return convergence_index(report, threshold, report.rolling_window);
}

RunSummary aggregate_runs(std::span<const PrequentialReport> reports, double threshold) {
  if (reports.empty()) throw EvalError("aggregate_runs needs at least one report");
  const std::size_t length = reports.front().records.size();
  for (const auto& r : reports)
    if (r.records.size() != length) throw EvalError("LengthMismatch: reports cover different stream lengths");

  RunSummary s;
  s.runs = reports.size();
  std::vector<double> finals;
  std::vector<double> converged;
  for (const auto& r : reports) {
    if (auto a = r.final_accuracy()) finals.push_back(*a);
    if (auto c = convergence_index(r, threshold)) converged.push_back(static_cast<double>(*c));
  }
  // sorted summation keeps the result independent of report order
  std::sort(finals.begin(), finals.end());
  std::sort(converged.begin(), converged.end());
  if (!finals.empty()) {
    const double n = static_cast<double>(finals.size());
    double mean = std::accumulate(finals.begin(), finals.end(), 0.0) / n;
    if (finals.front() == finals.back()) mean = finals.front();
    double ss = 0.0;
    for (double a : finals) ss += (a - mean) * (a - mean);
    s.mean_accuracy = mean;
    s.stddev_accuracy = std::sqrt(ss / n);
  }
  s.converged_runs = converged.size();
  if (!converged.empty())
    s.mean_convergence_index =
        std::accumulate(converged.begin(), converged.end(), 0.0) / static_cast<double>(converged.size());
  return s;
}

DriftRecovery drift_recovery_trace(const PrequentialReport& report, const DriftSpec& spec) {
  DriftRecovery out;
  const std::size_t point = spec.drift_point();
  for (const auto& e : report.drift_events) {
    if (e.sample_index >= point) {
      out.latency = static_cast<std::ptrdiff_t>(e.sample_index - point);
      break;
    }
  }
  const auto& r = report.records;
  if (point == 0 || point >= r.size()) return out;
  const double before = r[point - 1].rolling_accuracy;
  double lowest = before;
  for (std::size_t i = point; i < r.size(); ++i) lowest = std::min(lowest, r[i].rolling_accuracy);
  out.accuracy_dip = before - lowest;
  return out;
}

}  // namespace hforest
