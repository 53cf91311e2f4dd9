#include <algorithm>

#include "hforest/hoeffding/tree.hpp"
#include "tree_common.hpp"

namespace hforest {

std::size_t split_field_count(const SplitTest& split) noexcept { return 3 + split.children.size(); }

HoeffdingTree::HoeffdingTree(Schema schema, TreeParams params)
    : schema_(std::move(schema)), params_(params) {
  if (!schema_.is_classification()) throw ConfigError("HoeffdingTree needs a classification schema");
  if (params_.grace_period < 1) throw ConfigError("grace period must be positive");
  leaf_fields_ = ClassLeafStats::field_count(schema_) + schema_.class_count() + 1;
  nodes_.push_back(Node{ClassLeaf{ClassLeafStats(schema_), std::vector<double>(schema_.class_count(), 0.0), 0.0},
                        kNoParent, 0});
}

NodeId HoeffdingTree::route(std::span<const double> values) const noexcept {
  return detail::route<ClassLeaf>(nodes_, values);
}

std::vector<bool> HoeffdingTree::allowed_features(NodeId leaf_id) const {
  return detail::allowed_features<ClassLeaf>(nodes_, leaf_id, schema_.feature_count());
}

Prediction HoeffdingTree::predict(const Instance& inst) const {
  const auto& leaf = std::get<ClassLeaf>(nodes_[route(inst.values)].body);
  if (leaf.stats.total() > 0.0) return Prediction::from_distribution(leaf.stats.class_counts());
  return Prediction::from_distribution(leaf.fallback);
}

void HoeffdingTree::learn(const Instance& inst) {
  const NodeId id = route(inst.values);
  auto& leaf = std::get<ClassLeaf>(nodes_[id].body);
  leaf.stats.observe(inst);
  const double seen = leaf.stats.total();
  if (seen - leaf.weight_at_last_check >= static_cast<double>(params_.grace_period)) {
    leaf.weight_at_last_check = seen;
    if (!leaf.stats.is_pure()) attempt_split(id);
  }
}

void HoeffdingTree::attempt_split(NodeId leaf_id) {
  const auto& stats = std::get<ClassLeaf>(nodes_[leaf_id].body).stats;
  const SplitCheck check = try_split_classification(stats, params_, schema_, allowed_features(leaf_id));
  if (!check.split) return;

  const std::vector<double> parent_dist(stats.class_counts().begin(), stats.class_counts().end());
  SplitTest split = detail::make_split(check.candidates.best, schema_);
  const auto child_depth = nodes_[leaf_id].depth + 1;
  for (auto& child : split.children) {
    child = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(Node{ClassLeaf{ClassLeafStats(schema_), parent_dist, 0.0}, leaf_id, child_depth});
  }
  leaves_ += split.children.size() - 1;
  max_depth_ = std::max<std::size_t>(max_depth_, child_depth);
  nodes_[leaf_id].body = std::move(split);
}

std::size_t HoeffdingTree::memory_estimate() const noexcept {
  std::size_t fields = 0;
  for (const auto& node : nodes_) {
    if (const auto* split = std::get_if<SplitTest>(&node.body))
      fields += split_field_count(*split);
    else
      fields += leaf_fields_;
  }
  return fields * 8;
}

std::unique_ptr<IncrementalTree> make_tree(const Schema& schema, const TreeParams& params) {
  if (schema.is_classification()) return std::make_unique<HoeffdingTree>(schema, params);
  return std::make_unique<HoeffdingRegressionTree>(schema, params);
}

}  // namespace hforest
