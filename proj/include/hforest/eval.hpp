#pragma once

// Prequential (test-then-train) evaluation and the metrics derived from it.

#include <cstddef>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hforest/core.hpp"
#include "hforest/forest.hpp"
#include "hforest/streams.hpp"

namespace hforest {

class EvalError : public Error {
 public:
  using Error::Error;
};

/// A model driven by the prequential loop. `predict` must not change what
/// the model has learned; `learn` trains on the instance just predicted.
class PrequentialModel {
 public:
  virtual ~PrequentialModel() = default;

  virtual TaskKind task() const noexcept = 0;
  virtual Prediction predict(const Instance& inst) = 0;
  /// Returns a drift event when the model raises one while learning.
  virtual std::optional<DriftEvent> learn(const Instance& inst) = 0;
  virtual std::size_t memory_estimate() const noexcept = 0;
};

enum class ModelKind { Single, RandomForest, Hybrid };

const char* to_string(ModelKind kind) noexcept;
/// Accepts "single", "rf" / "random-forest" and "hybrid".
ModelKind parse_model_kind(const std::string& name);

std::unique_ptr<PrequentialModel> make_model(ModelKind kind, const Schema& schema, const RunConfig& cfg);

struct MetricConfig {
  std::size_t rolling_window = 200;
  double convergence_threshold = 0.90;
  double regression_tolerance = 0.10;
  std::size_t repeats = 1;
  std::size_t memory_stride = 100;

  void validate() const;
};

struct SampleRecord {
  std::size_t index = 0;  // 0-based stream position
  double prediction = 0.0;
  double truth = 0.0;
  bool correct = false;
  double rolling_accuracy = 0.0;
  double cumulative_accuracy = 0.0;
  bool drift_flag = false;
  std::size_t memory_estimate = 0;  // latest snapshot
};

struct MemorySnapshot {
  std::size_t index = 0;
  std::size_t bytes = 0;
};

struct PrequentialReport {
  TaskKind task = TaskKind::Classification;
  std::size_t rolling_window = 0;
  std::vector<SampleRecord> records;
  std::vector<MemorySnapshot> memory;
  std::vector<DriftEvent> drift_events;
  bool complete = true;
  std::string error;  // set when the stream failed mid-run

  /// Cumulative accuracy after the last sample; nullopt for an empty report.
  std::optional<double> final_accuracy() const noexcept;
};

/// Predict, score, then train on every instance of `source`. A stream error
/// stops the run and yields a report flagged incomplete.
PrequentialReport run_prequential(PrequentialModel& model, StreamSource& source, const MetricConfig& cfg);

/// 1-based sample count at which the rolling accuracy (full window) first
/// reaches `threshold` and stays at or above threshold - 0.05 for the next
/// `window` samples that exist. nullopt when never reached.
std::optional<std::size_t> convergence_index(const PrequentialReport& report, double threshold, std::size_t window);
std::optional<std::size_t> convergence_index(const PrequentialReport& report, double threshold);

struct RunSummary {
  std::size_t runs = 0;
  std::optional<double> mean_accuracy;
  std::optional<double> stddev_accuracy;  // population
  std::optional<double> mean_convergence_index;
  std::size_t converged_runs = 0;
};

/// Mean / population stddev of the final accuracies and the mean convergence
/// index over runs that converged. Throws EvalError(LengthMismatch) when the
/// reports cover different stream lengths.
RunSummary aggregate_runs(std::span<const PrequentialReport> reports, double threshold);

struct DriftRecovery {
  std::optional<std::ptrdiff_t> latency;  // nullopt = not detected
  double accuracy_dip = 0.0;
};

/// Latency of the first drift event at or after the drift point, and the
/// drop from the rolling accuracy just before the drift point to its minimum
/// afterwards.
DriftRecovery drift_recovery_trace(const PrequentialReport& report, const DriftSpec& spec);

// --- output ------------------------------------------------------------------

/// CSV header: index,prediction,truth,correct,rolling_acc,cumulative_acc,drift_flag,mem_estimate
void write_trace_csv(std::ostream& out, const PrequentialReport& report, std::size_t downsample = 1);

}  // namespace hforest
