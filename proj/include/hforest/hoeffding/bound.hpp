#pragma once

#include <cstddef>

#include "hforest/core.hpp"

namespace hforest {

/// Inputs of the Hoeffding bound: value range R, confidence parameter delta
/// and observation count n. Construction enforces R >= 0, 0 < delta < 1, n >= 1.
class HoeffdingBoundParams {
 public:
  HoeffdingBoundParams(double range, double delta, std::size_t n);

  double range() const noexcept { return range_; }
  double delta() const noexcept { return delta_; }
  std::size_t n() const noexcept { return n_; }

 private:
  double range_;
  double delta_;
  std::size_t n_;
};

/// epsilon = sqrt(R^2 ln(1/delta) / (2n)): with probability 1 - delta the true
/// mean of an R-bounded variable is at least (observed mean - epsilon).
double hoeffding_epsilon(const HoeffdingBoundParams& p);

/// Range of information gain measured in bits for `class_count` classes.
double information_gain_range(std::size_t class_count);

/// The split rule shared by both tree kinds: split when the observed margin
/// beats epsilon, or when epsilon itself fell under the tie threshold.
inline bool passes_hoeffding_test(double margin, double epsilon, double tie_threshold) noexcept {
  return margin > epsilon || epsilon < tie_threshold;
}

}  // namespace hforest
