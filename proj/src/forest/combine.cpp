#include <algorithm>

#include "hforest/forest.hpp"

namespace hforest {

namespace {

struct VoteTally {
  std::vector<double> votes;
  double top = 0.0;
};

VoteTally tally(std::span<const Prediction> outputs, std::size_t class_count) {
  VoteTally t{std::vector<double>(class_count, 0.0), 0.0};
  for (const auto& p : outputs) {
    if (p.label() >= class_count) t.votes.resize(p.label() + 1, 0.0);
    t.votes[p.label()] += 1.0;
  }
  t.top = *std::max_element(t.votes.begin(), t.votes.end());
  return t;
}

// First voter (in id order) whose class holds the top count.
std::size_t first_tied_voter_class(std::span<const Prediction> outputs, const VoteTally& t) {
  for (const auto& p : outputs)
    if (t.votes[p.label()] == t.top) return p.label();
  return 0;
}

std::vector<double> normalized(std::vector<double> votes, double voters) {
  for (auto& v : votes) v /= voters;
  return votes;
}

}  // namespace

Prediction combine_classification(std::span<const Prediction> weak, const Prediction& main) {
  if (weak.empty()) return main;
  std::vector<Prediction> voters(weak.begin(), weak.end());
  voters.push_back(main);
  const auto t = tally(voters, main.probabilities().size());
  const std::size_t label =
      t.votes[main.label()] == t.top ? main.label() : first_tied_voter_class(weak, t);
  return Prediction::classification(label, normalized(t.votes, static_cast<double>(voters.size())));
}

Prediction combine_regression(std::span<const Prediction> weak, const Prediction& main) {
  if (weak.empty()) return main;
  double sum = 0.0;
  for (const auto& p : weak) sum += p.value();
  sum += main.value();
  return Prediction::regression(sum / static_cast<double>(weak.size() + 1));
}

Prediction combine(std::span<const Prediction> weak, const Prediction& main) {
  return main.is_classification() ? combine_classification(weak, main) : combine_regression(weak, main);
}

Prediction combine_weak_only(std::span<const Prediction> outputs) {
  if (outputs.empty()) throw ConfigError("combine_weak_only needs at least one output");
  if (outputs.size() == 1) return outputs.front();
  if (!outputs.front().is_classification()) {
    double sum = 0.0;
    for (const auto& p : outputs) sum += p.value();
    return Prediction::regression(sum / static_cast<double>(outputs.size()));
  }
  const auto t = tally(outputs, outputs.front().probabilities().size());
  return Prediction::classification(first_tied_voter_class(outputs, t),
                                    normalized(t.votes, static_cast<double>(outputs.size())));
}

}  // namespace hforest
