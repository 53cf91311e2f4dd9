#pragma once

// Per-leaf sufficient statistics and the candidate-split search built on them.

#include <array>
#include <cstddef>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "hforest/core.hpp"

namespace hforest {

/// Raised when a split evaluation is requested on a leaf with fewer than two
/// observations.
class InsufficientData : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Classification statistics
// ---------------------------------------------------------------------------

/// Welford running mean / M2 accumulator.
struct GaussianEstimator {
  double weight = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double value) noexcept;
  /// Sample variance (n - 1 denominator); zero below two observations.
  double variance() const noexcept;
  double stddev() const noexcept;
  /// Estimated fraction of the mass at or below `value`. A degenerate
  /// (zero-variance) estimator is a step at its mean.
  double probability_at_most(double value) const noexcept;
};

/// Class-by-category count table for one nominal feature.
class NominalClassObserver {
 public:
  NominalClassObserver(std::size_t category_count, std::size_t class_count);

  void observe(std::size_t category, std::size_t label) noexcept;
  double count(std::size_t category, std::size_t label) const noexcept {
    return counts_[category * class_count_ + label];
  }
  std::size_t category_count() const noexcept { return category_count_; }
  std::size_t class_count() const noexcept { return class_count_; }

 private:
  std::size_t category_count_;
  std::size_t class_count_;
  std::vector<double> counts_;
};

/// Per-class Gaussian estimators plus the global min / max of one numeric
/// feature.
class GaussianClassObserver {
 public:
  static constexpr std::size_t kCandidateThresholds = 10;

  explicit GaussianClassObserver(std::size_t class_count);

  void observe(double value, std::size_t label) noexcept;
  const GaussianEstimator& estimator(std::size_t label) const { return per_class_.at(label); }
  double min() const noexcept { return min_; }
  double max() const noexcept { return max_; }
  bool empty() const noexcept { return !(min_ <= max_); }

  /// Ten equal-width interior points of [min, max]; empty when the feature
  /// was constant so far.
  std::vector<double> candidate_thresholds() const;

  /// Estimated class counts on the (<= threshold) side and the (> threshold) side.
  std::pair<std::vector<double>, std::vector<double>> split_counts(double threshold) const;

 private:
  std::vector<GaussianEstimator> per_class_;
  double min_;
  double max_;
};

using ClassObserver = std::variant<NominalClassObserver, GaussianClassObserver>;

class ClassLeafStats {
 public:
  explicit ClassLeafStats(const Schema& schema);

  /// Counts the instance and feeds every feature observer.
  void observe(const Instance& inst);

  double total() const noexcept { return total_; }
  std::span<const double> class_counts() const noexcept { return class_counts_; }
  const ClassObserver& observer(std::size_t feature) const { return observers_.at(feature); }
  std::size_t feature_count() const noexcept { return observers_.size(); }
  /// True when at most one class has been seen.
  bool is_pure() const noexcept;

  /// Counted scalar fields of a leaf for this schema (memory cost model).
  static std::size_t field_count(const Schema& schema);

 private:
  std::vector<double> class_counts_;
  std::vector<ClassObserver> observers_;
  double total_ = 0.0;
};

// ---------------------------------------------------------------------------
// Regression statistics
// ---------------------------------------------------------------------------

/// Running count, sum and sum of squares of a real target.
struct TargetStats {
  double count = 0.0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double y) noexcept {
    count += 1.0;
    sum += y;
    sum_sq += y * y;
  }
  TargetStats& operator+=(const TargetStats& o) noexcept;
  TargetStats operator-(const TargetStats& o) const noexcept;
  double mean() const noexcept { return count > 0.0 ? sum / count : 0.0; }
  /// Population variance, clamped at zero.
  double variance() const noexcept;
  double stddev() const noexcept;
};

class NominalRegressionObserver {
 public:
  explicit NominalRegressionObserver(std::size_t category_count) : per_category_(category_count) {}

  void observe(std::size_t category, double y) noexcept { per_category_[category].add(y); }
  std::span<const TargetStats> per_category() const noexcept { return per_category_; }

 private:
  std::vector<TargetStats> per_category_;
};

/// Equal-width histogram of target statistics over one numeric feature.
/// Until `freeze` is called the raw (value, target) pairs are buffered; at
/// freeze time the range is fixed to the buffered min / max and never
/// changes afterwards (later out-of-range values land in the edge bins).
class HistogramRegressionObserver {
 public:
  static constexpr std::size_t kBins = 64;

  void observe(double value, double y);
  void freeze();
  bool frozen() const noexcept { return frozen_; }
  double low() const noexcept { return low_; }
  double high() const noexcept { return high_; }

  /// Bin contents; computed from the buffer when not frozen yet.
  std::vector<TargetStats> bins() const;
  /// Interior bin edges: threshold j separates bins [0, j) from [j, kBins).
  std::vector<double> thresholds() const;

 private:
  std::pair<double, double> range() const;
  static std::size_t bin_of(double value, double low, double high) noexcept;

  bool frozen_ = false;
  double low_ = 0.0;
  double high_ = 0.0;
  std::vector<TargetStats> bins_;
  std::vector<std::pair<double, double>> pending_;
};

using RegressionObserver = std::variant<NominalRegressionObserver, HistogramRegressionObserver>;

class RegLeafStats {
 public:
  explicit RegLeafStats(const Schema& schema);

  void observe(const Instance& inst);
  void freeze_histograms();

  const TargetStats& target() const noexcept { return target_; }
  double total() const noexcept { return target_.count; }
  const RegressionObserver& observer(std::size_t feature) const { return observers_.at(feature); }
  std::size_t feature_count() const noexcept { return observers_.size(); }

  static std::size_t field_count(const Schema& schema);

 private:
  TargetStats target_;
  std::vector<RegressionObserver> observers_;
};

// ---------------------------------------------------------------------------
// Candidate splits
// ---------------------------------------------------------------------------

enum class SplitKind { Null, Nominal, NumericThreshold };

struct CandidateSplit {
  SplitKind kind = SplitKind::Null;
  std::size_t feature = 0;
  double threshold = 0.0;
  double merit = 0.0;

  bool is_null() const noexcept { return kind == SplitKind::Null; }
};

struct SplitPair {
  CandidateSplit best;
  CandidateSplit second;
};

/// Entropy in bits of an unnormalized count vector.
double entropy_bits(std::span<const double> counts) noexcept;

/// Best and runner-up by information gain, one candidate per feature plus the
/// null split (merit 0, which wins ties). `allowed` may be empty (every
/// feature) or hold one flag per feature. Throws InsufficientData when the
/// leaf saw fewer than two instances.
SplitPair best_two_splits_classification(const ClassLeafStats& leaf, const std::vector<bool>& allowed = {});

/// Best and runner-up by standard-deviation reduction normalized by the
/// leaf's own standard deviation (scores in [0,1]).
SplitPair best_two_splits_regression(const RegLeafStats& leaf, const std::vector<bool>& allowed = {});

struct SplitCheck {
  bool split = false;
  SplitPair candidates;
  double epsilon = 0.0;
};

struct TreeParams {
  double delta = 1e-7;
  std::size_t grace_period = 200;
  double tie_threshold = 0.05;

  static TreeParams from(const RunConfig& cfg) {
    return TreeParams{cfg.delta, cfg.grace_period, cfg.tie_threshold};
  }
};

/// Gain-difference test with R = log2(class_count) and n = leaf count.
SplitCheck try_split_classification(const ClassLeafStats& leaf, const TreeParams& params,
                                    const Schema& schema, const std::vector<bool>& allowed = {});

/// Ratio test (second / best < 1 - epsilon) with R = 1.
SplitCheck try_split_regression(const RegLeafStats& leaf, const TreeParams& params,
                                const std::vector<bool>& allowed = {});

}  // namespace hforest
