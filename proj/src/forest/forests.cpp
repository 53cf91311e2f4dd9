#include "hforest/forest.hpp"

namespace hforest {

WeakLearnerBag::WeakLearnerBag(const Schema& schema, const RunConfig& cfg)
    : bags_(generate_bags(schema, cfg.weak_learner_count, cfg.rng_seed)) {
  const auto params = TreeParams::from(cfg);
  trees_.reserve(bags_.size());
  for (const auto& bag : bags_) trees_.push_back(make_tree(project_schema(schema, bag), params));
  scratch_.resize(bags_.size());
}

void WeakLearnerBag::predict_all(const Instance& inst, std::vector<Prediction>& out) {
  out.clear();
  out.reserve(trees_.size());
  for (std::size_t i = 0; i < trees_.size(); ++i) {
    project_instance(inst, bags_[i], scratch_[i]);
    out.push_back(trees_[i]->predict(scratch_[i]));
  }
}

void WeakLearnerBag::learn_all(const Instance& inst) {
  for (std::size_t i = 0; i < trees_.size(); ++i) {
    project_instance(inst, bags_[i], scratch_[i]);
    trees_[i]->learn(scratch_[i]);
  }
}

std::size_t WeakLearnerBag::memory_estimate() const noexcept {
  std::size_t bytes = 0;
  for (const auto& t : trees_) bytes += t->memory_estimate();
  return bytes;
}

HybridForest::HybridForest(const Schema& schema, const RunConfig& cfg)
    : schema_(schema),
      cfg_(cfg),
      main_((cfg.validate(), make_tree(schema, TreeParams::from(cfg)))),
      weak_(schema, cfg),
      controller_(cfg.d_hybrid_impact, cfg.k_window_size, cfg.drift_threshold,
                  cfg.regression_correctness_tolerance) {}

HybridForest::Outputs HybridForest::predict(const Instance& inst) {
  validate_instance(schema_, inst);
  Prediction main = main_->predict(inst);
  std::vector<Prediction> weak;
  weak_.predict_all(inst, weak);
  auto decision = controller_.decide(weak, main);
  return Outputs{std::move(main), std::move(weak), std::move(decision)};
}

std::optional<DriftEvent> HybridForest::update(const Instance& inst, const Outputs& outputs) {
  auto event = controller_.record(outputs.decision, outputs.main, inst.target, samples_);
  main_->learn(inst);
  weak_.learn_all(inst);
  ++samples_;
  return event;
}

HybridForest::StepResult HybridForest::step(const Instance& inst) {
  const Outputs outputs = predict(inst);
  auto drift = update(inst, outputs);
  return StepResult{outputs.decision.emitted, outputs.decision.branch, drift};
}

std::size_t HybridForest::memory_estimate() const noexcept {
  return main_->memory_estimate() + weak_.memory_estimate();
}

RandomForest::RandomForest(const Schema& schema, const RunConfig& cfg)
    : schema_(schema), weak_((cfg.validate(), schema), cfg) {
  if (weak_.size() == 0) throw ConfigError("random forest needs at least one weak learner");
}

Prediction RandomForest::predict(const Instance& inst) {
  validate_instance(schema_, inst);
  weak_.predict_all(inst, outputs_);
  return combine_weak_only(outputs_);
}

void RandomForest::learn(const Instance& inst) { weak_.learn_all(inst); }

Prediction RandomForest::step(const Instance& inst) {
  Prediction p = predict(inst);
  learn(inst);
  return p;
}

}  // namespace hforest
