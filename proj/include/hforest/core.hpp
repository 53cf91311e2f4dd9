#pragma once

// Domain types shared by every module: feature schemas, stream instances,
// predictions and the run configuration.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace hforest {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration value (schema declaration, RunConfig, CLI flags).
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class FeatureKind { Numeric, Nominal };

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::Numeric;
  std::size_t category_count = 0;  // only meaningful for Nominal

  static FeatureSpec numeric(std::string name);
  static FeatureSpec nominal(std::string name, std::size_t category_count);

  bool is_nominal() const noexcept { return kind == FeatureKind::Nominal; }
  bool operator==(const FeatureSpec&) const = default;
};

enum class TaskKind { Classification, Regression };

const char* to_string(TaskKind task) noexcept;

/// Ordered feature description plus the learning task. Immutable once built.
class Schema {
 public:
  /// Throws ConfigError when the features are empty, names collide, a
  /// nominal feature has fewer than two categories, or a classification
  /// task has fewer than two classes.
  static Schema classification(std::vector<FeatureSpec> features, std::size_t class_count);
  static Schema regression(std::vector<FeatureSpec> features);

  std::span<const FeatureSpec> features() const noexcept { return features_; }
  const FeatureSpec& feature(std::size_t i) const { return features_.at(i); }
  std::size_t feature_count() const noexcept { return features_.size(); }
  TaskKind task() const noexcept { return task_; }
  bool is_classification() const noexcept { return task_ == TaskKind::Classification; }
  /// Zero for regression schemas.
  std::size_t class_count() const noexcept { return class_count_; }

  bool operator==(const Schema&) const = default;

 private:
  Schema(std::vector<FeatureSpec> features, TaskKind task, std::size_t class_count);

  std::vector<FeatureSpec> features_;
  TaskKind task_;
  std::size_t class_count_;
};

struct ClassLabel {
  std::size_t index = 0;
  auto operator<=>(const ClassLabel&) const = default;
};

using Target = std::variant<ClassLabel, double>;

/// One stream sample. Nominal values are stored as their integral category
/// index; missing values are not representable.
struct Instance {
  std::vector<double> values;
  Target target;

  bool has_label() const noexcept { return std::holds_alternative<ClassLabel>(target); }
  std::size_t label() const { return std::get<ClassLabel>(target).index; }
  double target_value() const { return std::get<double>(target); }

  bool operator==(const Instance&) const = default;
};

enum class InstanceErrorKind { ArityMismatch, ValueOutOfDomain, TargetKindMismatch };

const char* to_string(InstanceErrorKind kind) noexcept;

class InstanceError : public Error {
 public:
  InstanceError(InstanceErrorKind kind, std::string field, const std::string& detail);

  InstanceErrorKind kind() const noexcept { return kind_; }
  /// Name of the offending feature, "target", or "values" for arity errors.
  const std::string& field() const noexcept { return field_; }

 private:
  InstanceErrorKind kind_;
  std::string field_;
};

/// Returns the first violated Instance invariant, or nullopt when `inst`
/// is well formed against `schema`.
std::optional<InstanceError> check_instance(const Schema& schema, const Instance& inst);

/// Throwing form of check_instance.
void validate_instance(const Schema& schema, const Instance& inst);

/// Output of a learner. Classification predictions carry the emitted class
/// and a probability (or normalized vote) vector; regression predictions
/// carry a single value.
class Prediction {
 public:
  /// Normalizes `weights`, emitting the arg-max (lowest index on ties).
  /// An all-zero vector yields the uniform distribution.
  static Prediction from_distribution(std::span<const double> weights);
  /// `probabilities` must already be normalized.
  static Prediction classification(std::size_t label, std::vector<double> probabilities);
  static Prediction regression(double value);

  bool is_classification() const noexcept { return is_classification_; }
  std::size_t label() const noexcept { return label_; }
  std::span<const double> probabilities() const noexcept { return probabilities_; }
  double value() const noexcept { return value_; }
  /// Class index (as a real) or the regression value.
  double emitted() const noexcept {
    return is_classification_ ? static_cast<double>(label_) : value_;
  }

  bool operator==(const Prediction&) const = default;

 private:
  Prediction() = default;

  bool is_classification_ = false;
  std::size_t label_ = 0;
  std::vector<double> probabilities_;
  double value_ = 0.0;
};

/// Denominator floor used when the true regression target is zero.
inline constexpr double kRelativeErrorFloor = 1e-12;

/// Classification: label equality. Regression: |pred - y| / max(|y|, 1e-12)
/// must not exceed `regression_tolerance`.
bool is_correct(const Prediction& prediction, const Target& truth, double regression_tolerance);

/// Reals carry the target value; labels carry their class index.
double target_as_real(const Target& target) noexcept;

struct RunConfig {
  double delta = 1e-7;
  std::size_t grace_period = 200;
  double tie_threshold = 0.05;
  std::size_t weak_learner_count = 100;
  double d_hybrid_impact = 0.2;
  std::size_t k_window_size = 15;
  double regression_correctness_tolerance = 0.10;
  double drift_threshold = 0.5;
  std::uint64_t rng_seed = 1;

  /// Throws ConfigError naming the first out-of-range field.
  void validate() const;
};

}  // namespace hforest
