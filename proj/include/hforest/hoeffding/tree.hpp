#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "hforest/core.hpp"
#include "hforest/hoeffding/leaf_stats.hpp"

namespace hforest {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoParent = static_cast<NodeId>(-1);

/// Internal node: nominal splits have one child per category, numeric
/// splits send `value <= threshold` to children[0] and the rest to children[1].
struct SplitTest {
  SplitKind kind = SplitKind::NumericThreshold;
  std::size_t feature = 0;
  double threshold = 0.0;
  std::vector<NodeId> children;

  std::size_t branch_for(std::span<const double> values) const noexcept {
    const double v = values[feature];
    if (kind == SplitKind::Nominal) return static_cast<std::size_t>(v);
    return v <= threshold ? 0 : 1;
  }
};

template <class Leaf>
struct TreeNode {
  std::variant<SplitTest, Leaf> body;
  NodeId parent = kNoParent;
  std::uint32_t depth = 0;

  bool is_leaf() const noexcept { return std::holds_alternative<Leaf>(body); }
};

/// Common surface of the incremental trees. A tree is single-writer: calls
/// must be serialized per instance, distinct trees are independent.
class IncrementalTree {
 public:
  virtual ~IncrementalTree() = default;

  virtual Prediction predict(const Instance& inst) const = 0;
  virtual void learn(const Instance& inst) = 0;

  virtual const Schema& schema() const noexcept = 0;
  virtual std::size_t node_count() const noexcept = 0;
  virtual std::size_t leaf_count() const noexcept = 0;
  virtual std::size_t depth() const noexcept = 0;
  /// Cost-model estimate: counted 8-byte fields over all nodes.
  virtual std::size_t memory_estimate() const noexcept = 0;
};

/// Fields of an internal node in the memory cost model.
std::size_t split_field_count(const SplitTest& split) noexcept;

struct ClassLeaf {
  ClassLeafStats stats;
  /// Distribution predicted while the leaf is still empty (the parent's at split time).
  std::vector<double> fallback;
  double weight_at_last_check = 0.0;
};

/// Incremental classification tree (VFDT): information-gain splits decided
/// by the Hoeffding bound, majority-class leaves.
class HoeffdingTree final : public IncrementalTree {
 public:
  using Node = TreeNode<ClassLeaf>;

  HoeffdingTree(Schema schema, TreeParams params);

  Prediction predict(const Instance& inst) const override;
  void learn(const Instance& inst) override;

  const Schema& schema() const noexcept override { return schema_; }
  std::size_t node_count() const noexcept override { return nodes_.size(); }
  std::size_t leaf_count() const noexcept override { return leaves_; }
  std::size_t depth() const noexcept override { return max_depth_; }
  std::size_t memory_estimate() const noexcept override;

  /// Leaf reached by `values`.
  NodeId route(std::span<const double> values) const noexcept;
  std::span<const Node> nodes() const noexcept { return nodes_; }

 private:
  void attempt_split(NodeId leaf_id);
  std::vector<bool> allowed_features(NodeId leaf_id) const;

  Schema schema_;
  TreeParams params_;
  std::vector<Node> nodes_;
  std::size_t leaves_ = 1;
  std::size_t max_depth_ = 0;
  std::size_t leaf_fields_;
};

struct RegLeaf {
  RegLeafStats stats;
  double fallback = 0.0;
  double weight_at_last_check = 0.0;
};

/// Incremental regression tree (VFRT-style): standard-deviation-reduction
/// splits, leaves predict the running target mean.
class HoeffdingRegressionTree final : public IncrementalTree {
 public:
  using Node = TreeNode<RegLeaf>;

  HoeffdingRegressionTree(Schema schema, TreeParams params);

  Prediction predict(const Instance& inst) const override;
  void learn(const Instance& inst) override;

  const Schema& schema() const noexcept override { return schema_; }
  std::size_t node_count() const noexcept override { return nodes_.size(); }
  std::size_t leaf_count() const noexcept override { return leaves_; }
  std::size_t depth() const noexcept override { return max_depth_; }
  std::size_t memory_estimate() const noexcept override;

  NodeId route(std::span<const double> values) const noexcept;
  std::span<const Node> nodes() const noexcept { return nodes_; }

 private:
  void attempt_split(NodeId leaf_id);
  std::vector<bool> allowed_features(NodeId leaf_id) const;

  Schema schema_;
  TreeParams params_;
  std::vector<Node> nodes_;
  std::size_t leaves_ = 1;
  std::size_t max_depth_ = 0;
  std::size_t leaf_fields_;
};

/// Classification or regression tree, chosen by the schema's task.
std::unique_ptr<IncrementalTree> make_tree(const Schema& schema, const TreeParams& params);

}  // namespace hforest
