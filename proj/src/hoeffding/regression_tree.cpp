#include <algorithm>

#include "hforest/hoeffding/tree.hpp"
#include "tree_common.hpp"

namespace hforest {

HoeffdingRegressionTree::HoeffdingRegressionTree(Schema schema, TreeParams params)
    : schema_(std::move(schema)), params_(params) {
  if (schema_.is_classification()) throw ConfigError("HoeffdingRegressionTree needs a regression schema");
  if (params_.grace_period < 1) throw ConfigError("grace period must be positive");
  leaf_fields_ = RegLeafStats::field_count(schema_) + 2;
  nodes_.push_back(Node{RegLeaf{RegLeafStats(schema_), 0.0, 0.0}, kNoParent, 0});
}

NodeId HoeffdingRegressionTree::route(std::span<const double> values) const noexcept {
  return detail::route<RegLeaf>(nodes_, values);
}

std::vector<bool> HoeffdingRegressionTree::allowed_features(NodeId leaf_id) const {
  return detail::allowed_features<RegLeaf>(nodes_, leaf_id, schema_.feature_count());
}

Prediction HoeffdingRegressionTree::predict(const Instance& inst) const {
  const auto& leaf = std::get<RegLeaf>(nodes_[route(inst.values)].body);
  return Prediction::regression(leaf.stats.total() > 0.0 ? leaf.stats.target().mean() : leaf.fallback);
}

void HoeffdingRegressionTree::learn(const Instance& inst) {
  const NodeId id = route(inst.values);
  auto& leaf = std::get<RegLeaf>(nodes_[id].body);
  leaf.stats.observe(inst);
  const double seen = leaf.stats.total();
  if (seen - leaf.weight_at_last_check >= static_cast<double>(params_.grace_period)) {
    leaf.weight_at_last_check = seen;
    leaf.stats.freeze_histograms();
    attempt_split(id);
  }
}

void HoeffdingRegressionTree::attempt_split(NodeId leaf_id) {
  const auto& stats = std::get<RegLeaf>(nodes_[leaf_id].body).stats;
  const SplitCheck check = try_split_regression(stats, params_, allowed_features(leaf_id));
  if (!check.split) return;

  const double parent_mean = stats.target().mean();
  SplitTest split = detail::make_split(check.candidates.best, schema_);
  const auto child_depth = nodes_[leaf_id].depth + 1;
  for (auto& child : split.children) {
    child = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(Node{RegLeaf{RegLeafStats(schema_), parent_mean, 0.0}, leaf_id, child_depth});
  }
  leaves_ += split.children.size() - 1;
  max_depth_ = std::max<std::size_t>(max_depth_, child_depth);
  nodes_[leaf_id].body = std::move(split);
}

std::size_t HoeffdingRegressionTree::memory_estimate() const noexcept {
  std::size_t fields = 0;
  for (const auto& node : nodes_) {
    if (const auto* split = std::get_if<SplitTest>(&node.body))
      fields += split_field_count(*split);
    else
      fields += leaf_fields_;
  }
  return fields * 8;
}

}  // namespace hforest
