#include <array>
#include <charconv>

#include "hforest/eval.hpp"

namespace hforest {

namespace {

// Shortest round-trip representation; identical inputs give identical bytes.
void put_real(std::ostream& out, double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.write(buf.data(), ec == std::errc{} ? ptr - buf.data() : 0);
}

}  // namespace

void write_trace_csv(std::ostream& out, const PrequentialReport& report, std::size_t downsample) {
  if (downsample == 0) downsample = 1;
  out << "index,prediction,truth,correct,rolling_acc,cumulative_acc,drift_flag,mem_estimate\n";
  for (const auto& r : report.records) {
    if (r.index % downsample != 0 && !r.drift_flag) continue;
    out << r.index << ',';
    put_real(out, r.prediction);
    out << ',';
    put_real(out, r.truth);
    out << ',' << (r.correct ? 1 : 0) << ',';
    put_real(out, r.rolling_accuracy);
    out << ',';
    put_real(out, r.cumulative_accuracy);
    out << ',' << (r.drift_flag ? 1 : 0) << ',' << r.memory_estimate << '\n';
  }
}

}  // namespace hforest
