#include <doctest.h>

#include <cmath>
#include <random>

#include "hforest/hoeffding/bound.hpp"
#include "hforest/hoeffding/tree.hpp"
#include "support/oracles.hpp"

using namespace hforest;
namespace oracle = hforest::testing::oracle;

TEST_CASE("epsilon anchors") {
  const double delta = std::exp(-2.0);
  CHECK(hoeffding_epsilon(HoeffdingBoundParams(1.0, delta, 1)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(hoeffding_epsilon(HoeffdingBoundParams(1.0, delta, 4)) == doctest::Approx(0.5).epsilon(1e-12));
  const double eps = hoeffding_epsilon(HoeffdingBoundParams(information_gain_range(3), 1e-7, 200));
  CHECK(std::abs(eps - oracle::kEpsilonLog3) <= 1e-12 * oracle::kEpsilonLog3);
}

TEST_CASE("epsilon parameters are range-checked") {
  CHECK_THROWS_AS(HoeffdingBoundParams(-1.0, 0.1, 1), ConfigError);
  CHECK_THROWS_AS(HoeffdingBoundParams(1.0, 0.0, 1), ConfigError);
  CHECK_THROWS_AS(HoeffdingBoundParams(1.0, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(HoeffdingBoundParams(1.0, 0.1, 0), ConfigError);
  CHECK(information_gain_range(2) == 1.0);
  CHECK(information_gain_range(4) == 2.0);
}

TEST_CASE("hoeffding test rule") {
  CHECK(passes_hoeffding_test(0.5, 0.3, 0.05));
  CHECK_FALSE(passes_hoeffding_test(0.1, 0.3, 0.05));
  CHECK(passes_hoeffding_test(0.0, 0.04, 0.05));
}

TEST_CASE("classification leaf statistics") {
  const Schema s = Schema::classification({FeatureSpec::numeric("x"), FeatureSpec::nominal("n", 2)}, 3);
  ClassLeafStats leaf(s);
  leaf.observe(Instance{{1.0, 0.0}, ClassLabel{0}});
  CHECK(leaf.total() == 1.0);
  CHECK(leaf.class_counts()[0] == 1.0);
  CHECK(leaf.class_counts()[1] == 0.0);
  CHECK(leaf.is_pure());

  ClassLeafStats constant(s);
  for (int i = 0; i < 10; ++i) constant.observe(Instance{{2.0, 1.0}, ClassLabel{1}});
  const auto& g = std::get<GaussianClassObserver>(constant.observer(0)).estimator(1);
  CHECK(g.mean == 2.0);
  CHECK(g.variance() == 0.0);
  CHECK_THROWS_AS(best_two_splits_classification(leaf), InsufficientData);
}

TEST_CASE("gaussian observer matches batch mean and variance") {
  const Schema s = Schema::classification({FeatureSpec::numeric("x")}, 2);
  ClassLeafStats leaf(s);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> dist(3.0, 2.0);
  std::vector<double> by_class[2];
  for (int i = 0; i < 100; ++i) {
    const double v = dist(rng);
    const std::size_t c = rng() % 2;
    by_class[c].push_back(v);
    leaf.observe(Instance{{v}, ClassLabel{c}});
  }
  const auto& obs = std::get<GaussianClassObserver>(leaf.observer(0));
  for (std::size_t c = 0; c < 2; ++c) {
    double mean = 0.0;
    for (double v : by_class[c]) mean += v;
    mean /= static_cast<double>(by_class[c].size());
    double ss = 0.0;
    for (double v : by_class[c]) ss += (v - mean) * (v - mean);
    const double var = ss / static_cast<double>(by_class[c].size() - 1);
    CHECK(obs.estimator(c).mean == doctest::Approx(mean).epsilon(1e-9));
    CHECK(obs.estimator(c).variance() == doctest::Approx(var).epsilon(1e-9));
  }
}

TEST_CASE("best splits on simple tables") {
  SUBCASE("perfect binary feature gives the class entropy") {
    const Schema s = Schema::classification({FeatureSpec::nominal("b", 2)}, 2);
    ClassLeafStats leaf(s);
    for (int i = 0; i < 20; ++i) leaf.observe(Instance{{static_cast<double>(i % 2)}, ClassLabel{std::size_t(i % 2)}});
    const auto pair = best_two_splits_classification(leaf);
    CHECK(pair.best.kind == SplitKind::Nominal);
    CHECK(pair.best.merit == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pair.second.is_null());
  }
  SUBCASE("independent feature leaves the null split on top") {
    const Schema s = Schema::classification({FeatureSpec::nominal("b", 2)}, 2);
    ClassLeafStats leaf(s);
    for (std::size_t v = 0; v < 2; ++v)
      for (std::size_t c = 0; c < 2; ++c)
        for (int r = 0; r < 5; ++r) leaf.observe(Instance{{static_cast<double>(v)}, ClassLabel{c}});
    CHECK(best_two_splits_classification(leaf).best.is_null());
  }
  SUBCASE("three-class table") {
    const Schema s = Schema::classification({FeatureSpec::nominal("b", 2)}, 3);
    ClassLeafStats leaf(s);
    const int table[2][3] = {{3, 1, 0}, {0, 2, 4}};
    for (std::size_t v = 0; v < 2; ++v)
      for (std::size_t c = 0; c < 3; ++c)
        for (int r = 0; r < table[v][c]; ++r) leaf.observe(Instance{{static_cast<double>(v)}, ClassLabel{c}});
    CHECK(best_two_splits_classification(leaf).best.merit == doctest::Approx(oracle::kGainSmallTable).epsilon(1e-12));
  }
}

TEST_CASE("perfect feature splits at the first checkpoint where epsilon drops under the gap") {
  // gap 1 bit, R = 1, delta 1e-7: epsilon < 1 needs n > ln(1e7)/2 = 8.06; checkpoints every 2
  const Schema s = Schema::classification({FeatureSpec::nominal("b", 2), FeatureSpec::nominal("noise", 2)}, 2);
  HoeffdingTree tree(s, TreeParams{1e-7, 2, 0.0});
  for (int i = 0; i < 10; ++i) {
    const std::size_t label = static_cast<std::size_t>(i % 2);
    tree.learn(Instance{{static_cast<double>(label), static_cast<double>((i / 2) % 2)}, ClassLabel{label}});
    if (i + 1 < 10) REQUIRE(tree.node_count() == 1);
  }
  CHECK(tree.node_count() == 3);
  const auto& root = std::get<SplitTest>(tree.nodes()[0].body);
  CHECK(root.feature == 0);
}

TEST_CASE("leaf prediction") {
  const Schema s = Schema::classification({FeatureSpec::nominal("b", 2)}, 2);
  SUBCASE("single leaf with counts [3,1]") {
    HoeffdingTree tree(s, TreeParams{});
    for (std::size_t c : {0, 0, 0, 1}) tree.learn(Instance{{0.0}, ClassLabel{c}});
    const Prediction p = tree.predict(Instance{{1.0}, ClassLabel{0}});
    CHECK(p.label() == 0);
    CHECK(p.probabilities()[0] == 0.75);
    CHECK(p.probabilities()[1] == 0.25);
  }
  SUBCASE("stump routes to its branch") {
    HoeffdingTree tree(s, TreeParams{0.5, 10, 0.0});
    for (int i = 0; i < 10; ++i) tree.learn(Instance{{static_cast<double>(i % 2)}, ClassLabel{std::size_t(i % 2)}});
    REQUIRE(tree.node_count() == 3);
    for (int i = 0; i < 5; ++i) tree.learn(Instance{{1.0}, ClassLabel{1}});
    const Prediction p = tree.predict(Instance{{1.0}, ClassLabel{0}});
    CHECK(p.label() == 1);
    CHECK(p.probabilities()[1] == 1.0);
  }
  SUBCASE("an empty child predicts its parent's distribution") {
    HoeffdingTree tree(s, TreeParams{0.5, 4, 0.0});
    for (std::size_t c : {0, 1, 0, 0}) tree.learn(Instance{{static_cast<double>(c)}, ClassLabel{c}});
    REQUIRE(tree.node_count() == 3);
    const Prediction p = tree.predict(Instance{{1.0}, ClassLabel{0}});
    CHECK(p.label() == 0);
    CHECK(p.probabilities()[0] == 0.75);
  }
}

namespace {

struct Constraint {
  SplitKind kind;
  std::size_t feature;
  double threshold;
  std::size_t branch;
};

bool satisfies(const std::vector<double>& v, const std::vector<Constraint>& path) {
  for (const auto& c : path) {
    if (c.kind == SplitKind::Nominal) {
      if (static_cast<std::size_t>(v[c.feature]) != c.branch) return false;
    } else if ((v[c.feature] <= c.threshold) != (c.branch == 0)) {
      return false;
    }
  }
  return true;
}

template <class Tree>
void enumerate_paths(const Tree& tree, NodeId id, std::vector<Constraint>& path,
                     std::vector<std::pair<NodeId, std::vector<Constraint>>>& out) {
  const auto& node = tree.nodes()[id];
  if (node.is_leaf()) {
    out.emplace_back(id, path);
    return;
  }
  const auto& split = std::get<SplitTest>(node.body);
  for (std::size_t b = 0; b < split.children.size(); ++b) {
    path.push_back(Constraint{split.kind, split.feature, split.threshold, b});
    enumerate_paths(tree, split.children[b], path, out);
    path.pop_back();
  }
}

}  // namespace

TEST_CASE("every instance reaches exactly one leaf") {
  const Schema s = Schema::classification(
      {FeatureSpec::numeric("x"), FeatureSpec::numeric("y"), FeatureSpec::nominal("n", 3)}, 3);
  HoeffdingTree tree(s, TreeParams{0.01, 20, 0.1});
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  auto draw = [&] {
    Instance inst{{g(rng), g(rng), static_cast<double>(rng() % 3)}, ClassLabel{0}};
    inst.target = ClassLabel{static_cast<std::size_t>(inst.values[0] > 0) + static_cast<std::size_t>(inst.values[1] > 0.5)};
    return inst;
  };
  for (int i = 0; i < 4000; ++i) tree.learn(draw());
  REQUIRE(tree.depth() >= 2);

  std::vector<Constraint> path;
  std::vector<std::pair<NodeId, std::vector<Constraint>>> paths;
  enumerate_paths(tree, 0, path, paths);
  CHECK(paths.size() == tree.leaf_count());
  for (int i = 0; i < 100; ++i) {
    const Instance inst = draw();
    std::size_t matches = 0;
    NodeId leaf = 0;
    for (const auto& [id, constraints] : paths)
      if (satisfies(inst.values, constraints)) {
        ++matches;
        leaf = id;
      }
    CHECK(matches == 1);
    CHECK(tree.route(inst.values) == leaf);
  }
}

TEST_CASE("a nominal feature is tested at most once per path") {
  const Schema s = Schema::classification({FeatureSpec::nominal("a", 2), FeatureSpec::nominal("b", 2)}, 2);
  HoeffdingTree tree(s, TreeParams{0.3, 5, 0.2});
  std::mt19937_64 rng(5);
  for (int i = 0; i < 3000; ++i) {
    const std::size_t a = rng() % 2, b = rng() % 2;
    tree.learn(Instance{{double(a), double(b)}, ClassLabel{(a ^ b) ^ (rng() % 10 == 0)}});
  }
  std::vector<Constraint> path;
  std::vector<std::pair<NodeId, std::vector<Constraint>>> paths;
  enumerate_paths(tree, 0, path, paths);
  for (const auto& [id, constraints] : paths) {
    std::vector<int> seen(2, 0);
    for (const auto& c : constraints) ++seen[c.feature];
    CHECK(seen[0] <= 1);
    CHECK(seen[1] <= 1);
  }
}

TEST_CASE("regression leaf statistics") {
  TargetStats t;
  for (double y : {1.0, 2.0, 3.0}) t.add(y);
  CHECK(t.mean() == 2.0);
  CHECK(t.variance() == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  TargetStats c;
  for (int i = 0; i < 5; ++i) c.add(4.2);
  CHECK(c.variance() == doctest::Approx(0.0));

  const Schema s = Schema::regression({FeatureSpec::numeric("x")});
  RegLeafStats leaf(s);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(50.0, 7.0);
  std::vector<double> ys;
  for (int i = 0; i < 500; ++i) {
    ys.push_back(g(rng));
    leaf.observe(Instance{{g(rng)}, ys.back()});
  }
  double mean = 0.0;
  for (double y : ys) mean += y;
  mean /= 500.0;
  double ss = 0.0;
  for (double y : ys) ss += (y - mean) * (y - mean);
  CHECK(leaf.target().mean() == doctest::Approx(mean).epsilon(1e-9));
  CHECK(leaf.target().variance() == doctest::Approx(ss / 500.0).epsilon(1e-9));

  leaf.freeze_histograms();
  double binned = 0.0;
  for (const auto& b : std::get<HistogramRegressionObserver>(leaf.observer(0)).bins()) binned += b.count;
  CHECK(binned == 500.0);
}

TEST_CASE("regression split with one informative feature") {
  // normalized SDR is 1 for the perfect feature and the runner-up is the null
  // split, so the ratio test passes once epsilon(n) < 1, i.e. n >= 9 for delta 1e-7
  const Schema s = Schema::regression({FeatureSpec::nominal("b", 2)});
  HoeffdingRegressionTree tree(s, TreeParams{1e-7, 1, 0.0});
  for (int i = 0; i < 9; ++i) {
    const double b = i % 2;
    tree.learn(Instance{{b}, b == 0 ? 10.0 : 20.0});
    if (i + 1 < 9) REQUIRE(tree.node_count() == 1);
  }
  CHECK(tree.node_count() == 3);
  // the empty child falls back to the parent mean (5 x 10 + 4 x 20) / 9
  CHECK(tree.predict(Instance{{1.0}, 0.0}).value() == doctest::Approx(130.0 / 9.0));
  tree.learn(Instance{{1.0}, 20.0});
  CHECK(tree.predict(Instance{{1.0}, 0.0}).value() == 20.0);
}

TEST_CASE("numeric regression split separates two constant groups") {
  const Schema s = Schema::regression({FeatureSpec::numeric("x"), FeatureSpec::numeric("noise")});
  HoeffdingRegressionTree tree(s, TreeParams{1e-7, 50, 0.0});
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 400; ++i) {
    const double x = u(rng);
    tree.learn(Instance{{x, u(rng)}, x <= 0.5 ? 1.0 : 5.0});
  }
  REQUIRE(tree.node_count() >= 3);
  const auto& root = std::get<SplitTest>(tree.nodes()[0].body);
  CHECK(root.feature == 0);
  CHECK(root.threshold == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("identical targets never split") {
  const Schema s = Schema::regression({FeatureSpec::numeric("x"), FeatureSpec::nominal("n", 3)});
  HoeffdingRegressionTree tree(s, TreeParams{0.5, 5, 0.0});
  std::mt19937_64 rng(4);
  for (int i = 0; i < 500; ++i) tree.learn(Instance{{double(rng() % 100), double(rng() % 3)}, 7.0});
  CHECK(tree.node_count() == 1);
}

TEST_CASE("memory estimate follows the node cost model") {
  const Schema s = Schema::classification({FeatureSpec::nominal("b", 2)}, 2);
  HoeffdingTree tree(s, TreeParams{0.5, 10, 0.0});
  const std::size_t leaf_bytes = tree.memory_estimate();
  CHECK(leaf_bytes % 8 == 0);
  for (int i = 0; i < 10; ++i) tree.learn(Instance{{static_cast<double>(i % 2)}, ClassLabel{std::size_t(i % 2)}});
  REQUIRE(tree.node_count() == 3);
  CHECK(tree.memory_estimate() == 2 * leaf_bytes + (3 + 2) * 8);
}
