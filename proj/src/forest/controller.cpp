#include "hforest/forest.hpp"

namespace hforest {

PerformanceWindow::PerformanceWindow(std::size_t length, bool initial)
    : buffer_(length, initial ? 1 : 0), sum_(initial ? length : 0) {
  if (length == 0) throw ConfigError("window length must be positive");
}

void PerformanceWindow::push(bool record) noexcept {
  sum_ -= buffer_[head_];
  buffer_[head_] = record ? 1 : 0;
  sum_ += buffer_[head_];
  head_ = (head_ + 1) % buffer_.size();
}

void PerformanceWindow::fill(bool value) noexcept {
  std::fill(buffer_.begin(), buffer_.end(), value ? 1 : 0);
  sum_ = value ? buffer_.size() : 0;
  head_ = 0;
}

std::vector<bool> PerformanceWindow::contents() const {
  std::vector<bool> out;
  out.reserve(buffer_.size());
  for (std::size_t i = 0; i < buffer_.size(); ++i) out.push_back(buffer_[(head_ + i) % buffer_.size()] != 0);
  return out;
}

ImpactController::ImpactController(double d_hybrid_impact, std::size_t k_window_size, double drift_threshold,
                                   double regression_tolerance)
    : d_(d_hybrid_impact),
      k_(k_window_size),
      drift_threshold_(drift_threshold),
      tolerance_(regression_tolerance),
      performance_(k_window_size, true),
      disagreement_(k_window_size, false) {}

ControllerBranch ImpactController::branch() const noexcept {
  return static_cast<double>(performance_.sum()) > d_ * static_cast<double>(k_) ? ControllerBranch::Ensemble
                                                                                 : ControllerBranch::MainTree;
}

ImpactController::Decision ImpactController::decide(std::span<const Prediction> weak,
                                                    const Prediction& main) const {
  Prediction ensemble = combine(weak, main);
  const ControllerBranch chosen = branch();
  Prediction emitted = chosen == ControllerBranch::Ensemble ? ensemble : main;
  return Decision{std::move(emitted), std::move(ensemble), chosen};
}

std::optional<DriftEvent> ImpactController::record(const Decision& decision, const Prediction& main,
                                                   const Target& truth, std::size_t sample_index) {
  performance_.push(is_correct(decision.emitted, truth, tolerance_));
  disagreement_.push(is_correct(decision.ensemble, truth, tolerance_) && !is_correct(main, truth, tolerance_));
  if (disagreement_.fraction() > drift_threshold_) {
    DriftEvent event{sample_index, disagreement_.fraction()};
    disagreement_.fill(false);
    return event;
  }
  return std::nullopt;
}

}  // namespace hforest
