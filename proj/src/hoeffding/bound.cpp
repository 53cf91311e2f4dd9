#include "hforest/hoeffding/bound.hpp"

#include <cmath>

namespace hforest {

HoeffdingBoundParams::HoeffdingBoundParams(double range, double delta, std::size_t n)
    : range_(range), delta_(delta), n_(n) {
  if (!(range >= 0.0) || !std::isfinite(range)) throw ConfigError("hoeffding bound: range must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("hoeffding bound: delta must lie in (0,1)");
  if (n < 1) throw ConfigError("hoeffding bound: n must be positive");
}

double hoeffding_epsilon(const HoeffdingBoundParams& p) {
  const double r = p.range();
  return std::sqrt(r * r * std::log(1.0 / p.delta()) / (2.0 * static_cast<double>(p.n())));
}

double information_gain_range(std::size_t class_count) {
  return std::log2(static_cast<double>(class_count < 2 ? 2 : class_count));
}

}  // namespace hforest
