#pragma once

// Weak-learner generation, vote combination, the impact controller with its
// drift detector, and the two forest models built from them.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "hforest/core.hpp"
#include "hforest/hoeffding/tree.hpp"

namespace hforest {

// ---------------------------------------------------------------------------
// Feature bags
// ---------------------------------------------------------------------------

/// Features visible to one weak learner: distinct, strictly increasing indices.
struct FeatureBag {
  std::size_t learner_id = 0;
  std::vector<std::size_t> features;

  bool operator==(const FeatureBag&) const = default;
};

/// ceil(sqrt(f_total)), capped at f_total.
std::size_t weak_learner_feature_count(std::size_t f_total);

/// `m` bags of weak_learner_feature_count(f) features each, drawn uniformly
/// without replacement inside a bag and independently across bags.
std::vector<FeatureBag> generate_bags(const Schema& schema, std::size_t m, std::uint64_t rng_seed);

/// Schema restricted to the bag's features, in bag order.
Schema project_schema(const Schema& schema, const FeatureBag& bag);

/// Writes the bag's view of `inst` into `out`, reusing its storage.
void project_instance(const Instance& inst, const FeatureBag& bag, Instance& out);

// ---------------------------------------------------------------------------
// Feature coverage confidence
// ---------------------------------------------------------------------------

class UnreachableTarget : public Error {
 public:
  using Error::Error;
};

/// Probability that a given feature is drawn at least once when m learners
/// each draw sqrt(n) features with replacement out of n:
///   1 - ((n - 1) / n)^(m sqrt(n)),  with real-valued sqrt(n).
double confidence(std::size_t n, std::size_t m);

/// Smallest m with confidence(n, m) >= target. Requires n >= 2 and
/// 0 < target < 1; throws UnreachableTarget for target >= 1.
std::size_t min_learners_for_confidence(std::size_t n, double target);

// ---------------------------------------------------------------------------
// Combination
// ---------------------------------------------------------------------------

/// Plurality over weak outputs plus the main output, one vote each; ties go
/// to the main tree's class. With no weak outputs the main output passes
/// through unchanged.
Prediction combine_classification(std::span<const Prediction> weak, const Prediction& main);

/// Arithmetic mean of weak outputs and the main output.
Prediction combine_regression(std::span<const Prediction> weak, const Prediction& main);

/// Dispatches on the main output's kind.
Prediction combine(std::span<const Prediction> weak, const Prediction& main);

/// Random-forest combination over weak outputs only. Classification ties go
/// to the lowest learner id among the tied classes; a single output passes
/// through unchanged. `outputs` must be non-empty.
Prediction combine_weak_only(std::span<const Prediction> outputs);

// ---------------------------------------------------------------------------
// Impact controller
// ---------------------------------------------------------------------------

/// Fixed-length FIFO of binary records with a running sum.
class PerformanceWindow {
 public:
  PerformanceWindow(std::size_t length, bool initial);

  /// Appends a record, evicting the oldest.
  void push(bool record) noexcept;
  void fill(bool value) noexcept;

  std::size_t size() const noexcept { return buffer_.size(); }
  std::size_t sum() const noexcept { return sum_; }
  double fraction() const noexcept { return static_cast<double>(sum_) / static_cast<double>(buffer_.size()); }
  /// Records oldest first.
  std::vector<bool> contents() const;

 private:
  std::vector<std::uint8_t> buffer_;
  std::size_t head_ = 0;  // index of the oldest record
  std::size_t sum_ = 0;
};

struct DriftEvent {
  std::size_t sample_index = 0;
  double fraction = 0.0;

  bool operator==(const DriftEvent&) const = default;
};

enum class ControllerBranch { Ensemble, MainTree };

/// Decides between the vote and the main tree from the window of past
/// correctness, and flags drift when the ensemble keeps being right while the
/// main tree is wrong.
class ImpactController {
 public:
  struct Decision {
    Prediction emitted;
    Prediction ensemble;
    ControllerBranch branch;
  };

  ImpactController(double d_hybrid_impact, std::size_t k_window_size, double drift_threshold,
                   double regression_tolerance);

  /// The performance window starts filled with ones.
  ControllerBranch branch() const noexcept;
  Decision decide(std::span<const Prediction> weak, const Prediction& main) const;

  /// Pushes the emitted prediction's correctness into the performance window
  /// and the "ensemble right, main wrong" bit into the disagreement window.
  /// The disagreement window is reset to zeros whenever an event fires.
  std::optional<DriftEvent> record(const Decision& decision, const Prediction& main, const Target& truth,
                                   std::size_t sample_index);

  const PerformanceWindow& performance() const noexcept { return performance_; }
  const PerformanceWindow& disagreement() const noexcept { return disagreement_; }

 private:
  double d_;
  std::size_t k_;
  double drift_threshold_;
  double tolerance_;
  PerformanceWindow performance_;
  PerformanceWindow disagreement_;
};

// ---------------------------------------------------------------------------
// Forests
// ---------------------------------------------------------------------------

/// Weak trees with their bags; each tree only ever sees its projected view.
class WeakLearnerBag {
 public:
  WeakLearnerBag(const Schema& schema, const RunConfig& cfg);

  /// Predictions in learner-id order, written into `out`.
  void predict_all(const Instance& inst, std::vector<Prediction>& out);
  void learn_all(const Instance& inst);

  std::size_t size() const noexcept { return trees_.size(); }
  std::span<const FeatureBag> bags() const noexcept { return bags_; }
  const IncrementalTree& tree(std::size_t i) const { return *trees_.at(i); }
  std::size_t memory_estimate() const noexcept;

 private:
  std::vector<FeatureBag> bags_;
  std::vector<std::unique_ptr<IncrementalTree>> trees_;
  std::vector<Instance> scratch_;
};

/// One full-feature main tree plus `m` weak learners, switched by the impact
/// controller. Each step predicts before it trains.
class HybridForest {
 public:
  struct Outputs {
    Prediction main;
    std::vector<Prediction> weak;
    ImpactController::Decision decision;
  };

  struct StepResult {
    Prediction prediction;
    ControllerBranch branch;
    std::optional<DriftEvent> drift;
  };

  HybridForest(const Schema& schema, const RunConfig& cfg);

  /// Test phase: collect every tree's output and the controller's choice.
  Outputs predict(const Instance& inst);
  /// Train phase: update both windows with the outputs of `predict`, then
  /// train every tree on `inst`.
  std::optional<DriftEvent> update(const Instance& inst, const Outputs& outputs);
  /// predict followed by update.
  StepResult step(const Instance& inst);

  const Schema& schema() const noexcept { return schema_; }
  const IncrementalTree& main_tree() const noexcept { return *main_; }
  const WeakLearnerBag& weak_learners() const noexcept { return weak_; }
  const ImpactController& controller() const noexcept { return controller_; }
  std::size_t samples_seen() const noexcept { return samples_; }
  std::size_t memory_estimate() const noexcept;

 private:
  Schema schema_;
  RunConfig cfg_;
  std::unique_ptr<IncrementalTree> main_;
  WeakLearnerBag weak_;
  ImpactController controller_;
  std::size_t samples_ = 0;
};

/// Plain forest of weak learners, no main tree, no controller.
class RandomForest {
 public:
  RandomForest(const Schema& schema, const RunConfig& cfg);

  Prediction predict(const Instance& inst);
  void learn(const Instance& inst);
  Prediction step(const Instance& inst);

  const Schema& schema() const noexcept { return schema_; }
  const WeakLearnerBag& weak_learners() const noexcept { return weak_; }
  std::size_t memory_estimate() const noexcept { return weak_.memory_estimate(); }

 private:
  Schema schema_;
  WeakLearnerBag weak_;
  std::vector<Prediction> outputs_;
};

}  // namespace hforest
