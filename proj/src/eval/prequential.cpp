#include <algorithm>

#include "hforest/eval.hpp"

namespace hforest {

namespace {

class SingleTreeModel final : public PrequentialModel {
 public:
  SingleTreeModel(const Schema& schema, const RunConfig& cfg) : tree_(make_tree(schema, TreeParams::from(cfg))) {}

  TaskKind task() const noexcept override { return tree_->schema().task(); }
  Prediction predict(const Instance& inst) override { return tree_->predict(inst); }
  std::optional<DriftEvent> learn(const Instance& inst) override {
    tree_->learn(inst);
    return std::nullopt;
  }
  std::size_t memory_estimate() const noexcept override { return tree_->memory_estimate(); }

 private:
  std::unique_ptr<IncrementalTree> tree_;
};

class RandomForestModel final : public PrequentialModel {
 public:
  RandomForestModel(const Schema& schema, const RunConfig& cfg) : forest_(schema, cfg) {}

  TaskKind task() const noexcept override { return forest_.schema().task(); }
  Prediction predict(const Instance& inst) override { return forest_.predict(inst); }
  std::optional<DriftEvent> learn(const Instance& inst) override {
    forest_.learn(inst);
    return std::nullopt;
  }
  std::size_t memory_estimate() const noexcept override { return forest_.memory_estimate(); }

 private:
  RandomForest forest_;
};

class HybridForestModel final : public PrequentialModel {
 public:
  HybridForestModel(const Schema& schema, const RunConfig& cfg) : forest_(schema, cfg) {}

  TaskKind task() const noexcept override { return forest_.schema().task(); }
  Prediction predict(const Instance& inst) override {
    pending_ = forest_.predict(inst);
    return pending_->decision.emitted;
  }
  std::optional<DriftEvent> learn(const Instance& inst) override {
    if (!pending_) pending_ = forest_.predict(inst);
    auto event = forest_.update(inst, *pending_);
    pending_.reset();
    return event;
  }
  std::size_t memory_estimate() const noexcept override { return forest_.memory_estimate(); }

 private:
  HybridForest forest_;
  std::optional<HybridForest::Outputs> pending_;
};

}  // namespace

const char* to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Single: return "single";
    case ModelKind::RandomForest: return "rf";
    case ModelKind::Hybrid: return "hybrid";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "single") return ModelKind::Single;
  if (name == "rf" || name == "random-forest") return ModelKind::RandomForest;
  if (name == "hybrid") return ModelKind::Hybrid;
  throw ConfigError("unknown model '" + name + "' (expected single, rf or hybrid)");
}

std::unique_ptr<PrequentialModel> make_model(ModelKind kind, const Schema& schema, const RunConfig& cfg) {
  cfg.validate();
  switch (kind) {
    case ModelKind::Single: return std::make_unique<SingleTreeModel>(schema, cfg);
    case ModelKind::RandomForest: return std::make_unique<RandomForestModel>(schema, cfg);
    case ModelKind::Hybrid: return std::make_unique<HybridForestModel>(schema, cfg);
  }
  throw ConfigError("unknown model kind");
}

void MetricConfig::validate() const {
  if (rolling_window < 1) throw ConfigError("metric config: rolling window must be positive");
  if (!(convergence_threshold > 0.0 && convergence_threshold <= 1.0))
    throw ConfigError("metric config: convergence threshold must lie in (0,1]");
  if (!(regression_tolerance > 0.0 && regression_tolerance < 1.0))
    throw ConfigError("metric config: regression tolerance must lie in (0,1)");
  if (repeats < 1) throw ConfigError("metric config: repeats must be positive");
  if (memory_stride < 1) throw ConfigError("metric config: memory stride must be positive");
}

std::optional<double> PrequentialReport::final_accuracy() const noexcept {
  if (records.empty()) return std::nullopt;
  return records.back().cumulative_accuracy;
}

PrequentialReport run_prequential(PrequentialModel& model, StreamSource& source, const MetricConfig& cfg) {
  cfg.validate();
  if (model.task() != source.schema().task())
    throw EvalError(std::string("TaskMismatch: model is ") + to_string(model.task()) + ", stream is " +
                    to_string(source.schema().task()));

  PrequentialReport report;
  report.task = source.schema().task();
  report.rolling_window = cfg.rolling_window;
  if (auto n = source.length()) report.records.reserve(*n);

  std::vector<std::uint8_t> ring(cfg.rolling_window, 0);
  std::size_t in_window = 0;
  std::size_t correct_total = 0;
  std::size_t last_snapshot = 0;

  for (std::size_t i = 0;; ++i) {
    std::optional<Instance> inst;
    try {
      inst = source.next();
    } catch (const Error& e) {
      report.complete = false;
      report.error = e.what();
      break;
    }
    if (!inst) break;

    const Prediction prediction = model.predict(*inst);
    const bool correct = is_correct(prediction, inst->target, cfg.regression_tolerance);
    const auto drift = model.learn(*inst);

    const std::size_t slot = i % cfg.rolling_window;
    in_window += static_cast<std::size_t>(correct) - ring[slot];
    ring[slot] = correct ? 1 : 0;
    correct_total += correct ? 1 : 0;
    const std::size_t span = std::min(i + 1, cfg.rolling_window);

    if (i == 0 || (i + 1) % cfg.memory_stride == 0) {
      last_snapshot = model.memory_estimate();
      report.memory.push_back(MemorySnapshot{i, last_snapshot});
    }
    if (drift) report.drift_events.push_back(*drift);

    report.records.push_back(SampleRecord{
        i, prediction.emitted(), target_as_real(inst->target), correct,
        static_cast<double>(in_window) / static_cast<double>(span),
        static_cast<double>(correct_total) / static_cast<double>(i + 1), drift.has_value(), last_snapshot});
  }
  return report;
}

}  // namespace hforest
