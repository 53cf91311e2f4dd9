#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hforest/hoeffding/bound.hpp"
#include "hforest/hoeffding/leaf_stats.hpp"

namespace hforest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t as_index(double v) noexcept { return static_cast<std::size_t>(v); }

bool feature_allowed(const std::vector<bool>& allowed, std::size_t f) noexcept {
  return allowed.empty() || allowed[f];
}

// Keeps the two highest merits; the incumbent wins ties so the null split,
// inserted first, is preferred over zero-merit candidates.
void offer(SplitPair& pair, const CandidateSplit& c) noexcept {
  if (c.merit > pair.best.merit) {
    pair.second = pair.best;
    pair.best = c;
  } else if (c.merit > pair.second.merit) {
    pair.second = c;
  }
}

double info_gain(std::span<const double> parent, const std::vector<std::vector<double>>& branches) {
  const double total = std::accumulate(parent.begin(), parent.end(), 0.0);
  if (total <= 0.0) return 0.0;
  double children = 0.0;
  for (const auto& b : branches) {
    const double w = std::accumulate(b.begin(), b.end(), 0.0);
    if (w > 0.0) children += (w / total) * entropy_bits(b);
  }
  return entropy_bits(parent) - children;
}

double normalized_sdr(const TargetStats& parent, std::span<const TargetStats> branches) {
  const double sd = parent.stddev();
  if (!(sd > 0.0) || parent.count <= 0.0) return 0.0;
  double weighted = 0.0;
  for (const auto& b : branches)
    if (b.count > 0.0) weighted += (b.count / parent.count) * b.stddev();
  return std::clamp((sd - weighted) / sd, 0.0, 1.0);
}

}  // namespace

// --- GaussianEstimator -----------------------------------------------------

void GaussianEstimator::add(double value) noexcept {
  weight += 1.0;
  const double d = value - mean;
  mean += d / weight;
  m2 += d * (value - mean);
  if (m2 < 0.0) m2 = 0.0;
}

double GaussianEstimator::variance() const noexcept {
  return weight > 1.0 ? m2 / (weight - 1.0) : 0.0;
}

double GaussianEstimator::stddev() const noexcept { return std::sqrt(variance()); }

double GaussianEstimator::probability_at_most(double value) const noexcept {
  const double sd = stddev();
  if (!(sd > 0.0)) return value >= mean ? 1.0 : 0.0;
  return 0.5 * std::erfc(-(value - mean) / (sd * std::sqrt(2.0)));
}

// --- NominalClassObserver --------------------------------------------------

NominalClassObserver::NominalClassObserver(std::size_t category_count, std::size_t class_count)
    : category_count_(category_count),
      class_count_(class_count),
      counts_(category_count * class_count, 0.0) {}

void NominalClassObserver::observe(std::size_t category, std::size_t label) noexcept {
  counts_[category * class_count_ + label] += 1.0;
}

// --- GaussianClassObserver -------------------------------------------------

GaussianClassObserver::GaussianClassObserver(std::size_t class_count)
    : per_class_(class_count), min_(kInf), max_(-kInf) {}

void GaussianClassObserver::observe(double value, std::size_t label) noexcept {
  per_class_[label].add(value);
  min_ = std::min(min_, value);
  max_ = std::max(max_, value);
}

std::vector<double> GaussianClassObserver::candidate_thresholds() const {
  std::vector<double> out;
  if (empty() || !(max_ > min_)) return out;
  out.reserve(kCandidateThresholds);
  const double step = (max_ - min_) / static_cast<double>(kCandidateThresholds + 1);
  for (std::size_t i = 1; i <= kCandidateThresholds; ++i)
    out.push_back(min_ + step * static_cast<double>(i));
  return out;
}

std::pair<std::vector<double>, std::vector<double>> GaussianClassObserver::split_counts(
    double threshold) const {
  std::vector<double> lhs(per_class_.size(), 0.0);
  std::vector<double> rhs(per_class_.size(), 0.0);
  for (std::size_t c = 0; c < per_class_.size(); ++c) {
    const auto& est = per_class_[c];
    if (est.weight <= 0.0) continue;
    const double le = est.weight * est.probability_at_most(threshold);
    lhs[c] = le;
    rhs[c] = est.weight - le;
  }
  return {std::move(lhs), std::move(rhs)};
}

// --- ClassLeafStats --------------------------------------------------------

ClassLeafStats::ClassLeafStats(const Schema& schema) : class_counts_(schema.class_count(), 0.0) {
  observers_.reserve(schema.feature_count());
  for (const auto& f : schema.features()) {
    if (f.is_nominal())
      observers_.emplace_back(NominalClassObserver(f.category_count, schema.class_count()));
    else
      observers_.emplace_back(GaussianClassObserver(schema.class_count()));
  }
}

void ClassLeafStats::observe(const Instance& inst) {
  const std::size_t label = inst.label();
  class_counts_[label] += 1.0;
  total_ += 1.0;
  for (std::size_t f = 0; f < observers_.size(); ++f) {
    const double v = inst.values[f];
    std::visit(
        [&](auto& obs) {
          using T = std::decay_t<decltype(obs)>;
          if constexpr (std::is_same_v<T, NominalClassObserver>)
            obs.observe(as_index(v), label);
          else
            obs.observe(v, label);
        },
        observers_[f]);
  }
}

bool ClassLeafStats::is_pure() const noexcept {
  return std::count_if(class_counts_.begin(), class_counts_.end(), [](double c) { return c > 0.0; }) <= 1;
}

std::size_t ClassLeafStats::field_count(const Schema& schema) {
  const std::size_t c = schema.class_count();
  std::size_t fields = c + 1;  // class counts + total
  for (const auto& f : schema.features())
    fields += f.is_nominal() ? f.category_count * c : 3 * c + 2;
  return fields;
}

// --- TargetStats -----------------------------------------------------------

TargetStats& TargetStats::operator+=(const TargetStats& o) noexcept {
  count += o.count;
  sum += o.sum;
  sum_sq += o.sum_sq;
  return *this;
}

TargetStats TargetStats::operator-(const TargetStats& o) const noexcept {
  return TargetStats{count - o.count, sum - o.sum, sum_sq - o.sum_sq};
}

double TargetStats::variance() const noexcept {
  if (count <= 0.0) return 0.0;
  const double m = sum / count;
  return std::max(0.0, sum_sq / count - m * m);
}

double TargetStats::stddev() const noexcept { return std::sqrt(variance()); }

// --- HistogramRegressionObserver -------------------------------------------

std::size_t HistogramRegressionObserver::bin_of(double value, double low, double high) noexcept {
  if (value <= low) return 0;
  if (value > high) return kBins - 1;
  const double width = (high - low) / static_cast<double>(kBins);
  const double pos = std::ceil((value - low) / width);
  if (!(pos >= 1.0)) return 0;
  return std::min(kBins - 1, static_cast<std::size_t>(pos) - 1);
}

void HistogramRegressionObserver::observe(double value, double y) {
  if (frozen_)
    bins_[bin_of(value, low_, high_)].add(y);
  else
    pending_.emplace_back(value, y);
}

std::pair<double, double> HistogramRegressionObserver::range() const {
  if (frozen_) return {low_, high_};
  if (pending_.empty()) return {0.0, 0.0};
  auto [lo, hi] = std::minmax_element(pending_.begin(), pending_.end(),
                                      [](const auto& a, const auto& b) { return a.first < b.first; });
  return {lo->first, hi->first};
}

void HistogramRegressionObserver::freeze() {
  if (frozen_) return;
  std::tie(low_, high_) = range();
  bins_.assign(kBins, TargetStats{});
  for (const auto& [v, y] : pending_) bins_[bin_of(v, low_, high_)].add(y);
  pending_.clear();
  pending_.shrink_to_fit();
  frozen_ = true;
}

std::vector<TargetStats> HistogramRegressionObserver::bins() const {
  if (frozen_) return bins_;
  const auto [lo, hi] = range();
  std::vector<TargetStats> out(kBins);
  for (const auto& [v, y] : pending_) out[bin_of(v, lo, hi)].add(y);
  return out;
}

std::vector<double> HistogramRegressionObserver::thresholds() const {
  const auto [lo, hi] = range();
  std::vector<double> out;
  if (!(hi > lo)) return out;
  const double width = (hi - lo) / static_cast<double>(kBins);
  out.reserve(kBins - 1);
  for (std::size_t j = 1; j < kBins; ++j) out.push_back(lo + width * static_cast<double>(j));
  return out;
}

// --- RegLeafStats ----------------------------------------------------------

RegLeafStats::RegLeafStats(const Schema& schema) {
  observers_.reserve(schema.feature_count());
  for (const auto& f : schema.features()) {
    if (f.is_nominal())
      observers_.emplace_back(NominalRegressionObserver(f.category_count));
    else
      observers_.emplace_back(HistogramRegressionObserver{});
  }
}

void RegLeafStats::observe(const Instance& inst) {
  const double y = inst.target_value();
  target_.add(y);
  for (std::size_t f = 0; f < observers_.size(); ++f) {
    const double v = inst.values[f];
    std::visit(
        [&](auto& obs) {
          using T = std::decay_t<decltype(obs)>;
          if constexpr (std::is_same_v<T, NominalRegressionObserver>)
            obs.observe(as_index(v), y);
          else
            obs.observe(v, y);
        },
        observers_[f]);
  }
}

void RegLeafStats::freeze_histograms() {
  for (auto& obs : observers_)
    if (auto* h = std::get_if<HistogramRegressionObserver>(&obs)) h->freeze();
}

std::size_t RegLeafStats::field_count(const Schema& schema) {
  std::size_t fields = 3;
  for (const auto& f : schema.features())
    fields += f.is_nominal() ? 3 * f.category_count : 3 * HistogramRegressionObserver::kBins + 2;
  return fields;
}

// --- split search ----------------------------------------------------------

double entropy_bits(std::span<const double> counts) noexcept {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double c : counts) {
    if (c <= 0.0) continue;
    const double p = c / total;
    h -= p * std::log2(p);
  }
  return h;
}

SplitPair best_two_splits_classification(const ClassLeafStats& leaf, const std::vector<bool>& allowed) {
  if (leaf.total() < 2.0) throw InsufficientData("split evaluation needs at least 2 observations");
  SplitPair pair;  // both start as the null split with merit 0
  const auto parent = leaf.class_counts();
  const std::size_t classes = parent.size();

  for (std::size_t f = 0; f < leaf.feature_count(); ++f) {
    if (!feature_allowed(allowed, f)) continue;
    const auto& observer = leaf.observer(f);
    if (const auto* nominal = std::get_if<NominalClassObserver>(&observer)) {
      std::vector<std::vector<double>> branches(nominal->category_count(), std::vector<double>(classes));
      for (std::size_t v = 0; v < nominal->category_count(); ++v)
        for (std::size_t c = 0; c < classes; ++c) branches[v][c] = nominal->count(v, c);
      offer(pair, CandidateSplit{SplitKind::Nominal, f, 0.0, info_gain(parent, branches)});
    } else {
      const auto& gaussian = std::get<GaussianClassObserver>(observer);
      CandidateSplit best_here{SplitKind::Null, f, 0.0, -kInf};
      for (double t : gaussian.candidate_thresholds()) {
        auto [lhs, rhs] = gaussian.split_counts(t);
        const double gain = info_gain(parent, {std::move(lhs), std::move(rhs)});
        if (gain > best_here.merit) best_here = CandidateSplit{SplitKind::NumericThreshold, f, t, gain};
      }
      if (!best_here.is_null()) offer(pair, best_here);
    }
  }
  return pair;
}

SplitPair best_two_splits_regression(const RegLeafStats& leaf, const std::vector<bool>& allowed) {
  if (leaf.total() < 2.0) throw InsufficientData("split evaluation needs at least 2 observations");
  SplitPair pair;
  const TargetStats& parent = leaf.target();

  for (std::size_t f = 0; f < leaf.feature_count(); ++f) {
    if (!feature_allowed(allowed, f)) continue;
    const auto& observer = leaf.observer(f);
    if (const auto* nominal = std::get_if<NominalRegressionObserver>(&observer)) {
      offer(pair, CandidateSplit{SplitKind::Nominal, f, 0.0, normalized_sdr(parent, nominal->per_category())});
    } else {
      const auto& hist = std::get<HistogramRegressionObserver>(observer);
      const auto bins = hist.bins();
      const auto thresholds = hist.thresholds();
      TargetStats total;
      for (const auto& b : bins) total += b;
      CandidateSplit best_here{SplitKind::Null, f, 0.0, -kInf};
      TargetStats left;
      for (std::size_t j = 1; j <= thresholds.size(); ++j) {
        left += bins[j - 1];
        const std::array<TargetStats, 2> sides{left, total - left};
        const double score = normalized_sdr(total, sides);
        if (score > best_here.merit)
          best_here = CandidateSplit{SplitKind::NumericThreshold, f, thresholds[j - 1], score};
      }
      if (!best_here.is_null()) offer(pair, best_here);
    }
  }
  return pair;
}

SplitCheck try_split_classification(const ClassLeafStats& leaf, const TreeParams& params,
                                    const Schema& schema, const std::vector<bool>& allowed) {
  SplitCheck check;
  if (leaf.total() < 2.0) return check;
  check.candidates = best_two_splits_classification(leaf, allowed);
  check.epsilon = hoeffding_epsilon(HoeffdingBoundParams(
      information_gain_range(schema.class_count()), params.delta, static_cast<std::size_t>(leaf.total())));
  const auto& [best, second] = check.candidates;
  if (best.is_null() || !(best.merit > 0.0)) return check;
  check.split = passes_hoeffding_test(best.merit - second.merit, check.epsilon, params.tie_threshold);
  return check;
}

SplitCheck try_split_regression(const RegLeafStats& leaf, const TreeParams& params,
                                const std::vector<bool>& allowed) {
  SplitCheck check;
  if (leaf.total() < 2.0) return check;
  check.candidates = best_two_splits_regression(leaf, allowed);
  check.epsilon =
      hoeffding_epsilon(HoeffdingBoundParams(1.0, params.delta, static_cast<std::size_t>(leaf.total())));
  const auto& [best, second] = check.candidates;
  if (best.is_null() || !(best.merit > 0.0)) return check;
  const double ratio = second.merit / best.merit;
  check.split = passes_hoeffding_test(1.0 - ratio, check.epsilon, params.tie_threshold);
  return check;
}

}  // namespace hforest
