#include "hforest/experiment.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

namespace hforest {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_real(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::size_t parse_index(const std::string& text, const std::string& what) {
  std::size_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || text.empty())
    throw ConfigError("bad " + what + " '" + text + "'");
  return v;
}

std::vector<std::string> split_on(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, sep)) parts.push_back(part);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

void fill_permutation(DriftSpec& spec, const Schema& schema) {
  if (!spec.class_permutation.empty() || !spec.feature_permutation.empty()) return;
  if (schema.is_classification()) {
    const std::size_t c = schema.class_count();
    spec.class_permutation.resize(c);
    for (std::size_t i = 0; i < c; ++i) spec.class_permutation[i] = (i + 1) % c;
    return;
  }
  std::vector<std::size_t> numeric;
  for (std::size_t i = 0; i < schema.feature_count(); ++i)
    if (!schema.feature(i).is_nominal()) numeric.push_back(i);
  spec.feature_permutation.resize(schema.feature_count());
  std::iota(spec.feature_permutation.begin(), spec.feature_permutation.end(), 0);
  for (std::size_t i = 0; i < numeric.size(); ++i) spec.feature_permutation[numeric[i]] = numeric[numeric.size() - 1 - i];
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

struct SeedResult {
  json summary;
  std::optional<std::ptrdiff_t> latency;
};

std::string trace_name(std::uint64_t seed) { return "trace_seed" + std::to_string(seed) + ".csv"; }

RunSummary run_and_write(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto reports = run_seeds(cfg);
  fs::create_directories(cfg.out_dir);

  json latencies = json::array();
  parallel_for(reports.size(), cfg.threads, [&](std::size_t i) {
    std::ostringstream trace;
    write_trace_csv(trace, reports[i], cfg.trace_downsample);
    write_atomic(cfg.out_dir / trace_name(cfg.seeds[i]), trace.str());
  });
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& rep = reports[i];
    if (!rep.complete) throw DataError(DataErrorKind::ParseError, "stream stopped early: " + rep.error);
    json s;
    s["method"] = to_string(cfg.model);
    s["dataset"] = cfg.dataset.label();
    s["seed"] = cfg.seeds[i];
    s["samples"] = rep.records.size();
    s["final_accuracy"] = optional_json(rep.final_accuracy());
    const auto conv = convergence_index(rep, cfg.metric.convergence_threshold);
    s["convergence_index"] = conv ? json(*conv) : json(nullptr);
    s["memory_estimate"] = rep.memory.empty() ? 0 : rep.memory.back().bytes;
    json events = json::array();
    for (const auto& e : rep.drift_events) events.push_back(e.sample_index);
    s["drift_events"] = events;
    if (cfg.drift) {
      const auto rec = drift_recovery_trace(rep, *cfg.drift);
      s["drift_latency"] = rec.latency ? json(*rec.latency) : json(nullptr);
      s["accuracy_dip"] = rec.accuracy_dip;
      latencies.push_back(s["drift_latency"]);
    }
    write_atomic(cfg.out_dir / ("summary_seed" + std::to_string(cfg.seeds[i]) + ".json"), s.dump(2) + "\n");
  }

  const RunSummary sum = aggregate_runs(reports, cfg.metric.convergence_threshold);
  json agg;
  agg["method"] = to_string(cfg.model);
  agg["dataset"] = cfg.dataset.label();
  agg["seeds"] = cfg.seeds;
  agg["mean_accuracy"] = optional_json(sum.mean_accuracy);
  agg["stddev"] = optional_json(sum.stddev_accuracy);
  agg["convergence_index"] = optional_json(sum.mean_convergence_index);
  agg["converged_runs"] = sum.converged_runs;
  agg["drift_latencies"] = latencies;
  write_atomic(cfg.out_dir / "summary.json", agg.dump(2) + "\n");

  log << to_string(cfg.model) << " on " << cfg.dataset.label() << ": " << sum.runs << " run(s), mean accuracy "
      << (sum.mean_accuracy ? format_real(*sum.mean_accuracy) : "n/a") << ", stddev "
      << (sum.stddev_accuracy ? format_real(*sum.stddev_accuracy) : "n/a") << ", convergence index "
      << (sum.mean_convergence_index ? format_real(*sum.mean_convergence_index) : "not reached") << "\n";
  return sum;
}

template <class F>
int guarded(std::ostream& log, F&& body) {
  try {
    body();
    return kExitOk;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const UnreachableTarget& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    log << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const InstanceError& e) {
    log << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    log << "output error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    log << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace

std::string DatasetSpec::label() const {
  if (source == DatasetSource::Generator) return generator;
  return path.stem().string();
}

void ExperimentConfig::validate() const {
  run.validate();
  metric.validate();
  if (seeds.empty()) throw ConfigError("seed list is empty");
  if (dataset.source == DatasetSource::Generator) {
    if (dataset.generator != "waveform") throw ConfigError("unknown generator '" + dataset.generator + "'");
    if (dataset.count == 0) throw ConfigError("--count must be positive");
  } else if (dataset.path.empty()) {
    throw ConfigError("dataset path is empty");
  }
  if (trace_downsample == 0) throw ConfigError("trace downsample must be positive");
  if (std::abs(run.regression_correctness_tolerance - metric.regression_tolerance) > 0.0)
    throw ConfigError("model and metric regression tolerances differ");
}

DriftSpec parse_drift(const std::string& text) {
  const auto parts = split_on(text, ':');
  if (parts.size() == 2 && parts[0] == "abrupt") return DriftSpec::abrupt(parse_index(parts[1], "drift index"));
  if (parts.size() == 3 && parts[0] == "gradual")
    return DriftSpec::gradual(parse_index(parts[1], "drift start"), parse_index(parts[2], "drift end"));
  throw ConfigError("bad drift spec '" + text + "' (expected abrupt:IDX or gradual:START:END)");
}

std::unique_ptr<StreamSource> open_stream(const ExperimentConfig& cfg, std::uint64_t seed) {
  std::unique_ptr<StreamSource> base;
  const auto& ds = cfg.dataset;
  switch (ds.source) {
    case DatasetSource::Csv: {
      CsvDeclaration decl;
      decl.task = ds.task;
      decl.target = ds.target;
      decl.nominal_columns = ds.nominal_columns;
      base = load_csv(ds.path, decl);
      break;
    }
    case DatasetSource::Arff:
      base = load_arff(ds.path, ds.target);
      break;
    case DatasetSource::Generator:
      base = generate_waveform(ds.count, cfg.stream_seed.value_or(seed));
      break;
  }
  if (!cfg.drift) return base;
  DriftSpec spec = *cfg.drift;
  fill_permutation(spec, base->schema());
  return inject_drift(std::move(base), std::move(spec), seed);
}

void parallel_for(std::size_t jobs, std::size_t threads, const std::function<void(std::size_t)>& task) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, jobs);
  if (threads <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<PrequentialReport> run_seeds(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<PrequentialReport> reports(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), cfg.threads, [&](std::size_t i) {
    auto stream = open_stream(cfg, cfg.seeds[i]);
    RunConfig run = cfg.run;
    run.rng_seed = cfg.seeds[i];
    auto model = make_model(cfg.model, stream->schema(), run);
    reports[i] = run_prequential(*model, *stream, cfg.metric);
  });
  return reports;
}

void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw fs::filesystem_error("cannot open for writing", tmp, std::make_error_code(std::errc::io_error));
    out << content;
    out.flush();
    if (!out) throw fs::filesystem_error("write failed", tmp, std::make_error_code(std::errc::io_error));
  }
  fs::rename(tmp, path);
}

int cmd_run(const ExperimentConfig& cfg, std::ostream& log) {
  return guarded(log, [&] { run_and_write(cfg, log); });
}

int cmd_confidence(const ConfidenceRequest& req, std::ostream& out, std::ostream& log) {
  return guarded(log, [&] {
    if (req.n_values.empty()) throw ConfigError("confidence needs at least one n");
    for (auto n : req.n_values)
      if (n < 1) throw ConfigError("n must be at least 1");
    std::ostringstream buf;
    if (req.target) {
      buf << "n,target,min_m\n";
      for (auto n : req.n_values)
        buf << n << ',' << format_real(*req.target) << ',' << min_learners_for_confidence(n, *req.target) << '\n';
    } else {
      if (req.m_values.empty()) throw ConfigError("confidence grid needs at least one m");
      buf << "n,m,confidence\n";
      for (auto n : req.n_values)
        for (auto m : req.m_values) buf << n << ',' << m << ',' << format_real(confidence(n, m)) << '\n';
    }
    out << buf.str();
  });
}

int cmd_sweep(const ExperimentConfig& base, const std::vector<double>& d_values,
              const std::vector<std::size_t>& k_values, std::ostream& log) {
  return guarded(log, [&] {
    if (d_values.empty() || k_values.empty()) throw ConfigError("sweep needs at least one d and one k");
    base.validate();
    std::ostringstream csv;
    csv << "d,k,mean_acc,stddev,convergence_index\n";
    for (double d : d_values) {
      for (std::size_t k : k_values) {
        ExperimentConfig cell = base;
        cell.run.d_hybrid_impact = d;
        cell.run.k_window_size = k;
        cell.out_dir = base.out_dir / ("d" + format_real(d) + "_k" + std::to_string(k));
        const RunSummary s = run_and_write(cell, log);
        csv << format_real(d) << ',' << k << ',' << (s.mean_accuracy ? format_real(*s.mean_accuracy) : "") << ','
            << (s.stddev_accuracy ? format_real(*s.stddev_accuracy) : "") << ','
            << (s.mean_convergence_index ? format_real(*s.mean_convergence_index) : "") << '\n';
      }
    }
    fs::create_directories(base.out_dir);
    write_atomic(base.out_dir / "sweep.csv", csv.str());
  });
}

// --- command line --------------------------------------------------------------

namespace {

struct RawOptions {
  std::string csv, arff, generator, task = "classification", model = "hybrid", drift, seeds = "1", target;
  std::vector<std::string> nominal;
  std::optional<std::uint64_t> stream_seed;
};

void add_experiment_options(CLI::App& app, ExperimentConfig& cfg, RawOptions& raw, bool sweep) {
  // exactly one of these; checked in finish_config so a config file can supply it
  app.add_option("--csv", raw.csv, "CSV file with a header row (one of --csv, --arff, --generator)");
  app.add_option("--arff", raw.arff, "dense ARFF file");
  app.add_option("--generator", raw.generator, "synthetic generator (waveform)");
  app.add_option("--count", cfg.dataset.count, "instances to generate")->capture_default_str();
  app.add_option("--task", raw.task, "task for CSV input")
      ->check(CLI::IsMember({"classification", "regression"}))
      ->capture_default_str();
  app.add_option("--target", raw.target, "target column (default: last)");
  app.add_option("--nominal", raw.nominal, "CSV columns to read as nominal")->delimiter(',');
  app.add_option("--model", raw.model, "single | rf | hybrid")->capture_default_str();
  app.add_option("--m", cfg.run.weak_learner_count, "number of weak learners")->capture_default_str();
  if (!sweep) {
    app.add_option("--d", cfg.run.d_hybrid_impact, "hybrid impact d")->capture_default_str();
    app.add_option("--k", cfg.run.k_window_size, "controller window size k")->capture_default_str();
  }
  app.add_option("--delta", cfg.run.delta, "Hoeffding bound delta")->capture_default_str();
  app.add_option("--grace", cfg.run.grace_period, "grace period")->capture_default_str();
  app.add_option("--tie", cfg.run.tie_threshold, "tie threshold")->capture_default_str();
  app.add_option("--tol", cfg.run.regression_correctness_tolerance, "regression relative-error tolerance")
      ->capture_default_str();
  app.add_option("--drift-threshold", cfg.run.drift_threshold, "drift detector threshold")->capture_default_str();
  app.add_option("--drift", raw.drift, "inject drift: abrupt:IDX or gradual:START:END");
  app.add_option("--seeds", raw.seeds, "seed count N (seeds 1..N) or comma-separated list")->capture_default_str();
  app.add_option("--stream-seed", raw.stream_seed, "generator seed shared by all runs (default: per-run seed)");
  app.add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
  app.add_option("--wmetric", cfg.metric.rolling_window, "rolling accuracy window")->capture_default_str();
  app.add_option("--threshold", cfg.metric.convergence_threshold, "convergence accuracy threshold")
      ->capture_default_str();
  app.add_option("--mem-stride", cfg.metric.memory_stride, "samples between memory snapshots")->capture_default_str();
  app.add_option("--downsample", cfg.trace_downsample, "write every Nth trace row")->capture_default_str();
  app.add_option("--threads", cfg.threads, "worker threads (0 = all cores)")->capture_default_str();
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  if (text.find(',') == std::string::npos) {
    const std::size_t n = parse_index(text, "seed count");
    if (n == 0) throw ConfigError("--seeds must be at least 1");
    for (std::size_t i = 1; i <= n; ++i) seeds.push_back(i);
    return seeds;
  }
  for (const auto& part : split_on(text, ',')) seeds.push_back(parse_index(part, "seed"));
  return seeds;
}

void finish_config(ExperimentConfig& cfg, const RawOptions& raw) {
  auto& ds = cfg.dataset;
  const int sources = !raw.csv.empty() + !raw.arff.empty() + !raw.generator.empty();
  if (sources != 1) throw ConfigError("exactly one of --csv, --arff, --generator is required");
  if (!raw.csv.empty()) {
    ds.source = DatasetSource::Csv;
    ds.path = raw.csv;
  } else if (!raw.arff.empty()) {
    ds.source = DatasetSource::Arff;
    ds.path = raw.arff;
  } else {
    ds.source = DatasetSource::Generator;
    ds.generator = raw.generator;
  }
  ds.task = raw.task == "regression" ? TaskKind::Regression : TaskKind::Classification;
  ds.target = raw.target;
  ds.nominal_columns = raw.nominal;
  cfg.model = parse_model_kind(raw.model);
  cfg.metric.regression_tolerance = cfg.run.regression_correctness_tolerance;
  if (!raw.drift.empty()) cfg.drift = parse_drift(raw.drift);
  cfg.seeds = parse_seeds(raw.seeds);
  cfg.stream_seed = raw.stream_seed;
}

// CLI11 only reads config files for the top-level app, so a subcommand's
// --config FILE is expanded here into flags placed ahead of the command-line
// ones. Keys already given on the command line are skipped.
std::vector<std::string> expand_config(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::size_t at = 0;
  std::string file;
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      file = args[i + 1];
      at = i;
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
      at = i;
      break;
    }
  }
  if (at == 0) return args;
  args.erase(args.begin() + static_cast<std::ptrdiff_t>(at),
             args.begin() + static_cast<std::ptrdiff_t>(args[at] == "--config" ? at + 2 : at + 1));
  if (!fs::exists(file)) throw ConfigError("config file not found: " + file);

  std::set<std::string> given;
  for (std::size_t i = 2; i < args.size(); ++i)
    if (args[i].rfind("--", 0) == 0) given.insert(args[i].substr(2, args[i].find('=') - 2));
  std::vector<std::string> from_file;
  for (const auto& item : CLI::ConfigINI().from_file(file)) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty()) throw ConfigError("config sections are not supported: " + item.fullname());
    if (given.count(item.name)) continue;
    from_file.push_back("--" + item.name);
    std::string joined;
    for (const auto& v : item.inputs) joined += (joined.empty() ? "" : ",") + v;
    from_file.push_back(joined);
  }
  args.insert(args.begin() + 2, from_file.begin(), from_file.end());
  return args;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Streaming Hoeffding trees, random forests and hybrid forests with prequential evaluation", "hforest"};
  app.require_subcommand(1);

  ExperimentConfig run_cfg;
  RawOptions run_raw;
  auto* run = app.add_subcommand("run", "prequential run over one or more seeds");
  std::string config_file;  // consumed by expand_config before parsing
  run->add_option("--config", config_file, "key=value file; flags on the command line override it");
  add_experiment_options(*run, run_cfg, run_raw, false);

  ExperimentConfig sweep_cfg;
  RawOptions sweep_raw;
  std::vector<double> d_values{sweep_cfg.run.d_hybrid_impact};
  std::vector<std::size_t> k_values{sweep_cfg.run.k_window_size};
  auto* sweep = app.add_subcommand("sweep", "one run per (d, k) pair, plus a sweep.csv summary");
  sweep->add_option("--config", config_file, "key=value file; flags on the command line override it");
  add_experiment_options(*sweep, sweep_cfg, sweep_raw, true);
  sweep->add_option("--d", d_values, "hybrid impact values")->delimiter(',')->capture_default_str();
  sweep->add_option("--k", k_values, "window sizes")->delimiter(',')->capture_default_str();

  ConfidenceRequest conf;
  std::vector<std::string> n_text, m_text;
  auto* confcmd = app.add_subcommand("confidence", "feature coverage confidence grid or minimal learner count");
  confcmd->add_option("--n", n_text, "feature counts (list, or A..B or A..B:STEP)")->required()->delimiter(',');
  confcmd->add_option("--m", m_text, "learner counts (list, or A..B or A..B:STEP)")->delimiter(',');
  confcmd->add_option("--target", conf.target, "report the minimal m reaching this confidence");

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv);
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    std::vector<const char*> expanded;
    for (const auto& a : args) expanded.push_back(a.c_str());
    app.parse(static_cast<int>(expanded.size()), expanded.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (run->parsed()) {
    try {
      finish_config(run_cfg, run_raw);
    } catch (const ConfigError& e) {
      err << "config error: " << e.what() << "\n";
      return kExitConfig;
    }
    return cmd_run(run_cfg, err);
  }
  if (sweep->parsed()) {
    try {
      finish_config(sweep_cfg, sweep_raw);
    } catch (const ConfigError& e) {
      err << "config error: " << e.what() << "\n";
      return kExitConfig;
    }
    return cmd_sweep(sweep_cfg, d_values, k_values, err);
  }

  auto expand = [](const std::vector<std::string>& items) {
    std::vector<std::size_t> values;
    for (const auto& item : items) {
      const auto dots = item.find("..");
      if (dots == std::string::npos) {
        values.push_back(parse_index(item, "value"));
        continue;
      }
      const auto colon = item.find(':', dots);
      const std::size_t lo = parse_index(item.substr(0, dots), "range start");
      const std::size_t hi = parse_index(item.substr(dots + 2, colon == std::string::npos ? std::string::npos
                                                                                          : colon - dots - 2),
                                         "range end");
      const std::size_t step = colon == std::string::npos ? 1 : parse_index(item.substr(colon + 1), "range step");
      if (step == 0 || hi < lo) throw ConfigError("bad range '" + item + "'");
      for (std::size_t v = lo; v <= hi; v += step) values.push_back(v);
    }
    return values;
  };
  try {
    conf.n_values = expand(n_text);
    conf.m_values = expand(m_text);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return cmd_confidence(conf, out, err);
}

}  // namespace hforest
