#pragma once

// Experiment runner behind the command-line tool: dataset + model + metric
// settings over a list of seeds, with atomic output files.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hforest/core.hpp"
#include "hforest/eval.hpp"
#include "hforest/streams.hpp"

namespace hforest {

enum class DatasetSource { Csv, Arff, Generator };

struct DatasetSpec {
  DatasetSource source = DatasetSource::Generator;
  std::filesystem::path path;         // Csv / Arff
  std::string generator = "waveform";  // Generator
  std::size_t count = 5000;            // Generator
  TaskKind task = TaskKind::Classification;  // Csv only; Arff infers it
  std::string target;                  // Csv / Arff; last column when empty
  std::vector<std::string> nominal_columns;

  /// File stem or generator name.
  std::string label() const;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  ModelKind model = ModelKind::Hybrid;
  RunConfig run;
  MetricConfig metric;
  std::optional<DriftSpec> drift;
  std::filesystem::path out_dir = "results";
  std::vector<std::uint64_t> seeds{1};
  /// Generator seed shared by every run; per-run seed when unset.
  std::optional<std::uint64_t> stream_seed;
  std::size_t trace_downsample = 1;
  std::size_t threads = 0;  // 0 = hardware concurrency

  /// Throws ConfigError.
  void validate() const;
};

/// Parses "abrupt:IDX" or "gradual:START:END". Classification streams get a
/// class rotation (c -> c+1 mod classes); regression streams reverse the order
/// of their numeric features. The permutation is filled in by `open_stream`.
DriftSpec parse_drift(const std::string& text);

/// Builds the instance stream for one seed, drift included.
std::unique_ptr<StreamSource> open_stream(const ExperimentConfig& cfg, std::uint64_t seed);

/// Runs every seed (in parallel when threads allow) and returns the reports
/// in seed order. Throws the first error raised by any run.
std::vector<PrequentialReport> run_seeds(const ExperimentConfig& cfg);

/// Runs `jobs` tasks on up to `threads` workers; rethrows the first failure.
void parallel_for(std::size_t jobs, std::size_t threads, const std::function<void(std::size_t)>& task);

/// Writes `content` to `path` through a temporary file and a rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitData = 3, kExitInternal = 4 };

/// Per-seed traces and summaries plus summary.json under cfg.out_dir.
int cmd_run(const ExperimentConfig& cfg, std::ostream& log);

struct ConfidenceRequest {
  std::vector<std::size_t> n_values;
  std::vector<std::size_t> m_values;
  std::optional<double> target;  // minimal-m mode when set
};

/// CSV grid "n,m,confidence", or "n,target,min_m" rows in minimal-m mode.
int cmd_confidence(const ConfidenceRequest& req, std::ostream& out, std::ostream& log);

/// One cmd_run per (d, k) cell under out_dir/d<d>_k<k>/, then sweep.csv.
int cmd_sweep(const ExperimentConfig& base, const std::vector<double>& d_values,
              const std::vector<std::size_t>& k_values, std::ostream& log);

/// Full command-line entry point.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hforest
