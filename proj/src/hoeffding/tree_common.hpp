#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "hforest/hoeffding/tree.hpp"

namespace hforest::detail {

template <class Leaf>
NodeId route(std::span<const TreeNode<Leaf>> nodes, std::span<const double> values) noexcept {
  NodeId id = 0;
  while (const auto* split = std::get_if<SplitTest>(&nodes[id].body))
    id = split->children[split->branch_for(values)];
  return id;
}

// A nominal feature may be tested at most once on any root-to-leaf path.
template <class Leaf>
std::vector<bool> allowed_features(std::span<const TreeNode<Leaf>> nodes, NodeId leaf,
                                   std::size_t feature_count) {
  std::vector<bool> allowed(feature_count, true);
  for (NodeId id = nodes[leaf].parent; id != kNoParent; id = nodes[id].parent) {
    const auto& split = std::get<SplitTest>(nodes[id].body);
    if (split.kind == SplitKind::Nominal) allowed[split.feature] = false;
  }
  return allowed;
}

inline SplitTest make_split(const CandidateSplit& c, const Schema& schema) {
  SplitTest s;
  s.kind = c.kind;
  s.feature = c.feature;
  s.threshold = c.threshold;
  const std::size_t arity = c.kind == SplitKind::Nominal ? schema.feature(c.feature).category_count : 2;
  s.children.resize(arity);
  return s;
}

}  // namespace hforest::detail
