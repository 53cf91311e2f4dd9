#include <array>
#include <string>

#include "hforest/streams.hpp"

namespace hforest {

namespace {

// Triangular base waves h1, h2, h3 over the 21 attribute positions, each
// peaking at 6 (the UCI/CART waveform definition).
constexpr std::array<std::array<double, WaveformStream::kAttributes>, 3> kBaseWaves{{
    {0, 1, 2, 3, 4, 5, 6, 5, 4, 3, 2, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0},
    {0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 2, 3, 4, 5, 6, 5, 4, 3, 2, 1, 0},
    {0, 0, 0, 0, 0, 1, 2, 3, 4, 5, 6, 5, 4, 3, 2, 1, 0, 0, 0, 0, 0},
}};

// class -> pair of base waves mixed
constexpr std::array<std::array<std::size_t, 2>, 3> kClassWaves{{{0, 1}, {0, 2}, {1, 2}}};

}  // namespace

Schema waveform_schema() {
  std::vector<FeatureSpec> features;
  for (std::size_t i = 0; i < WaveformStream::kAttributes; ++i)
    features.push_back(FeatureSpec::numeric("att" + std::to_string(i + 1)));
  return Schema::classification(std::move(features), WaveformStream::kClasses);
}

WaveformStream::WaveformStream(std::size_t count, std::uint64_t rng_seed)
    : schema_(waveform_schema()), count_(count), rng_(rng_seed) {}

std::optional<Instance> WaveformStream::next() {
  if (emitted_ >= count_) return std::nullopt;
  ++emitted_;
  std::uniform_int_distribution<std::size_t> pick_class(0, kClasses - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  const std::size_t label = pick_class(rng_);
  const double u = unit(rng_);
  const auto& a = kBaseWaves[kClassWaves[label][0]];
  const auto& b = kBaseWaves[kClassWaves[label][1]];
  Instance inst;
  inst.values.resize(kAttributes);
  for (std::size_t i = 0; i < kAttributes; ++i) inst.values[i] = u * a[i] + (1.0 - u) * b[i] + noise(rng_);
  inst.target = ClassLabel{label};
  return inst;
}

std::unique_ptr<StreamSource> generate_waveform(std::size_t count, std::uint64_t rng_seed) {
  return std::make_unique<WaveformStream>(count, rng_seed);
}

}  // namespace hforest
