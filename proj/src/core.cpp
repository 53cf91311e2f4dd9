#include "hforest/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace hforest {

FeatureSpec FeatureSpec::numeric(std::string name) {
  return FeatureSpec{std::move(name), FeatureKind::Numeric, 0};
}

FeatureSpec FeatureSpec::nominal(std::string name, std::size_t category_count) {
  return FeatureSpec{std::move(name), FeatureKind::Nominal, category_count};
}

const char* to_string(TaskKind task) noexcept {
  return task == TaskKind::Classification ? "classification" : "regression";
}

Schema::Schema(std::vector<FeatureSpec> features, TaskKind task, std::size_t class_count)
    : features_(std::move(features)), task_(task), class_count_(class_count) {
  if (features_.empty()) throw ConfigError("schema: feature list is empty");
  std::unordered_set<std::string> names;
  for (const auto& f : features_) {
    if (!names.insert(f.name).second)
      throw ConfigError("schema: duplicate feature name '" + f.name + "'");
    if (f.is_nominal() && f.category_count < 2)
      throw ConfigError("schema: nominal feature '" + f.name + "' needs at least 2 categories");
  }
  if (task_ == TaskKind::Classification && class_count_ < 2)
    throw ConfigError("schema: classification needs at least 2 classes");
}

Schema Schema::classification(std::vector<FeatureSpec> features, std::size_t class_count) {
  return Schema(std::move(features), TaskKind::Classification, class_count);
}

Schema Schema::regression(std::vector<FeatureSpec> features) {
  return Schema(std::move(features), TaskKind::Regression, 0);
}

const char* to_string(InstanceErrorKind kind) noexcept {
  switch (kind) {
    case InstanceErrorKind::ArityMismatch: return "ArityMismatch";
    case InstanceErrorKind::ValueOutOfDomain: return "ValueOutOfDomain";
    case InstanceErrorKind::TargetKindMismatch: return "TargetKindMismatch";
  }
  return "?";
}

InstanceError::InstanceError(InstanceErrorKind kind, std::string field, const std::string& detail)
    : Error(std::string(to_string(kind)) + " in '" + field + "': " + detail),
      kind_(kind),
      field_(std::move(field)) {}

std::optional<InstanceError> check_instance(const Schema& schema, const Instance& inst) {
  if (inst.values.size() != schema.feature_count()) {
    std::ostringstream os;
    os << "expected " << schema.feature_count() << " values, got " << inst.values.size();
    return InstanceError(InstanceErrorKind::ArityMismatch, "values", os.str());
  }
  for (std::size_t i = 0; i < inst.values.size(); ++i) {
    const auto& spec = schema.feature(i);
    const double v = inst.values[i];
    if (!std::isfinite(v))
      return InstanceError(InstanceErrorKind::ValueOutOfDomain, spec.name, "non-finite value");
    if (spec.is_nominal()) {
      if (v < 0.0 || v != std::floor(v) || v >= static_cast<double>(spec.category_count)) {
        std::ostringstream os;
        os << "category " << v << " outside [0," << spec.category_count << ")";
        return InstanceError(InstanceErrorKind::ValueOutOfDomain, spec.name, os.str());
      }
    }
  }
  if (schema.is_classification()) {
    if (!inst.has_label())
      return InstanceError(InstanceErrorKind::TargetKindMismatch, "target",
                           "classification schema needs a class label");
    if (inst.label() >= schema.class_count()) {
      std::ostringstream os;
      os << "class " << inst.label() << " outside [0," << schema.class_count() << ")";
      return InstanceError(InstanceErrorKind::ValueOutOfDomain, "target", os.str());
    }
  } else {
    if (inst.has_label())
      return InstanceError(InstanceErrorKind::TargetKindMismatch, "target",
                           "regression schema needs a real target");
    if (!std::isfinite(inst.target_value()))
      return InstanceError(InstanceErrorKind::ValueOutOfDomain, "target", "non-finite target");
  }
  return std::nullopt;
}

void validate_instance(const Schema& schema, const Instance& inst) {
  if (auto err = check_instance(schema, inst)) throw *err;
}

Prediction Prediction::from_distribution(std::span<const double> weights) {
  Prediction p;
  p.is_classification_ = true;
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  p.probabilities_.resize(weights.size());
  if (total > 0.0) {
    for (std::size_t i = 0; i < weights.size(); ++i) p.probabilities_[i] = weights[i] / total;
  } else if (!weights.empty()) {
    std::fill(p.probabilities_.begin(), p.probabilities_.end(),
              1.0 / static_cast<double>(weights.size()));
  }
  // strict > keeps the lowest index among equal weights
  std::size_t best = 0;
  for (std::size_t i = 1; i < weights.size(); ++i)
    if (weights[i] > weights[best]) best = i;
  p.label_ = best;
  return p;
}

Prediction Prediction::classification(std::size_t label, std::vector<double> probabilities) {
  Prediction p;
  p.is_classification_ = true;
  p.label_ = label;
  p.probabilities_ = std::move(probabilities);
  return p;
}

Prediction Prediction::regression(double value) {
  Prediction p;
  p.value_ = value;
  return p;
}

bool is_correct(const Prediction& prediction, const Target& truth, double regression_tolerance) {
  if (const auto* label = std::get_if<ClassLabel>(&truth))
    return prediction.is_classification() && prediction.label() == label->index;
  const double y = std::get<double>(truth);
  const double denom = std::max(std::abs(y), kRelativeErrorFloor);
  return std::abs(prediction.value() - y) / denom <= regression_tolerance;
}

double target_as_real(const Target& target) noexcept {
  if (const auto* label = std::get_if<ClassLabel>(&target)) return static_cast<double>(label->index);
  return std::get<double>(target);
}

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("run config: " + msg); };
  if (!(delta > 0.0 && delta < 1.0)) fail("delta must lie in (0,1)");
  if (grace_period < 1) fail("grace_period must be positive");
  if (!(tie_threshold >= 0.0) || !std::isfinite(tie_threshold)) fail("tie_threshold must be >= 0");
  if (!(d_hybrid_impact >= 0.0 && d_hybrid_impact <= 1.0)) fail("d_hybrid_impact must lie in [0,1]");
  if (k_window_size < 1) fail("k_window_size must be positive");
  if (!(regression_correctness_tolerance > 0.0 && regression_correctness_tolerance < 1.0))
    fail("regression_correctness_tolerance must lie in (0,1)");
  if (!(drift_threshold > 0.0 && drift_threshold <= 1.0)) fail("drift_threshold must lie in (0,1]");
}

}  // namespace hforest
