#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <set>

#include "valq/errors.hpp"
#include "valq/markoff.hpp"

using namespace valq;

namespace {

// All Markoff numbers up to `limit` by direct search over x <= y, solving for z.
std::set<long> markoff_numbers_upto(long limit) {
  std::set<long> out;
  for (long x = 1; x <= limit; ++x) {
    for (long y = x; y <= limit; ++y) {
      // z^2 - 3xy z + x^2 + y^2 = 0
      const long b = 3 * x * y;
      const long disc = b * b - 4 * (x * x + y * y);
      if (disc < 0) continue;
      const long r = static_cast<long>(std::llround(std::sqrt(static_cast<double>(disc))));
      if (r * r != disc) continue;
      for (long z : {(b - r) / 2, (b + r) / 2}) {
        if ((b - r) % 2 == 0 && z >= 1 && z <= limit) {
          out.insert(x);
          out.insert(y);
          out.insert(z);
        }
      }
    }
  }
  return out;
}

const MarkoffNode& find_m(const std::vector<MarkoffNode>& nodes, long m) {
  for (const MarkoffNode& n : nodes)
    if (n.m == m) return n;
  throw std::runtime_error("missing m");
}

const MarkoffNode* find_path(const std::vector<MarkoffNode>& nodes, const std::string& path) {
  for (const MarkoffNode& n : nodes)
    if (n.kind == MarkoffNode::Kind::vertex && n.path == path) return &n;
  return nullptr;
}

}  // namespace

TEST(Tree, SmallestMarkoffNumbersAgreeWithSearch) {
  const std::vector<MarkoffNode> nodes = tree(5);
  std::vector<long> from_tree;
  for (std::size_t i : sorted_by_m(nodes)) {
    if (nodes[i].m <= 233) from_tree.push_back(nodes[i].m.get_si());
  }
  const std::set<long> oracle = markoff_numbers_upto(233);
  EXPECT_EQ(from_tree, std::vector<long>(oracle.begin(), oracle.end()));
  EXPECT_EQ(from_tree, (std::vector<long>{1, 2, 5, 13, 29, 34, 89, 169, 194, 233}));
}

TEST(Tree, EveryTripleSolvesTheEquation) {
  for (const MarkoffNode& n : tree(6)) {
    EXPECT_EQ(n.a * n.a + n.b * n.b + n.m * n.m, 3 * n.a * n.b * n.m) << n.path;
  }
}

TEST(Tree, OrientationOfTriples) {
  const std::vector<MarkoffNode> nodes = tree(3);
  const MarkoffNode& n194 = find_m(nodes, 194);
  EXPECT_EQ(n194.a, 13);
  EXPECT_EQ(n194.b, 5);
  const MarkoffNode& n433 = find_m(nodes, 433);
  EXPECT_EQ(n433.a, 5);
  EXPECT_EQ(n433.b, 29);
  EXPECT_EQ(nodes[0].kind, MarkoffNode::Kind::one);
  EXPECT_EQ(nodes[1].kind, MarkoffNode::Kind::two);
  EXPECT_EQ(nodes[2].m, 5);
  // Regions point back at the nodes that carry a and b.
  for (const MarkoffNode& n : nodes) {
    if (n.kind != MarkoffNode::Kind::vertex) continue;
    EXPECT_EQ(nodes[static_cast<std::size_t>(n.left_region)].m, n.a);
    EXPECT_EQ(nodes[static_cast<std::size_t>(n.right_region)].m, n.b);
  }
}

TEST(Tree, DepthLimit) { EXPECT_THROW(tree(25), ResourceError); }

TEST(Theta, CongruencesAndShape) {
  for (const MarkoffNode& n : tree(4)) {
    const MarkoffTheta t = theta(n);
    const Integer m = n.m;
    EXPECT_TRUE(t.k1 >= 0 && t.k1 < m);
    EXPECT_TRUE(t.k2 >= 0 && t.k2 < m);
    Integer r1 = (n.a * t.k1 - n.b) % m, r2 = (n.b * t.k2 - n.a) % m;
    EXPECT_EQ(r1, 0) << "m=" << m;
    EXPECT_EQ(r2, 0) << "m=" << m;
    // theta = (-3m + 2k + sqrt(9m^2 - 4)) / (2m), compared numerically.
    const double root = std::sqrt(9.0 * m.get_d() * m.get_d() - 4.0);
    const double expect1 = (-3.0 * m.get_d() + 2.0 * t.k1.get_d() + root) / (2.0 * m.get_d());
    EXPECT_NEAR(t.theta1.value(64).to_double(), expect1, 1e-9);
    const Integer D = 9 * m * m - 4;
    EXPECT_EQ(t.theta1.discriminant(), m % 2 == 0 ? Integer(D / 4) : D);
  }
}

TEST(Theta, KnownIrrationalities) {
  const std::vector<MarkoffNode> nodes = tree(2);
  // k = 0 for m = 1, one unit left of the golden ratio conjugate.
  EXPECT_EQ(theta(nodes[0]).theta1, parse_surd("(-1+sqrt(5))/2").translated(-1));
  EXPECT_EQ(theta(nodes[1]).theta2, parse_surd("-1+sqrt(2)"));
  EXPECT_EQ(theta(find_m(nodes, 5)).theta1, parse_surd("(-11+sqrt(221))/10"));
  EXPECT_EQ(theta(find_m(tree(3), 34)).theta1.discriminant(), 2600);
}

TEST(Theta, LagrangeConstantsIncreaseBelowThree) {
  const std::vector<MarkoffNode> nodes = tree(4);
  double prev = 0.0;
  for (std::size_t i : sorted_by_m(nodes)) {
    const double L = theta(nodes[i]).L.to_double();
    EXPECT_GT(L, prev);
    EXPECT_LT(L, 3.0);
    prev = L;
  }
  EXPECT_NEAR(theta(nodes[0]).L.to_double(), std::sqrt(5.0), 1e-15);
}

TEST(Theta, ShiftingKByMTranslatesTheta) {
  const MarkoffTheta t = theta(find_m(tree(2), 13), 96);
  const BigComplex v = val(t.theta1, 64).value;
  const BigComplex shifted = val(t.theta1.translated(1), 64).value;
  EXPECT_LT(abs(v - shifted).to_double(), 1e-18);
}

TEST(Neighbors, MatchTreeEdges) {
  const std::vector<MarkoffNode> nodes = tree(8);
  const std::size_t K = 5;
  for (const MarkoffNode& n : tree(2)) {
    const NeighborSequences seq = neighbor_sequences(n, K);
    // Walk the tree: left edge goes L then R..., right edge R then L...
    auto expect_walk = [&](const std::vector<Neighbor>& got, std::string path, char first, char then) {
      ASSERT_EQ(got.size(), K);
      if (first) path += first;
      for (std::size_t k = 0; k < K; ++k) {
        const MarkoffNode* node = find_path(nodes, path);
        ASSERT_NE(node, nullptr) << path;
        EXPECT_EQ(got[k].n, node->m) << "m=" << n.m << " path=" << path;
        EXPECT_EQ(got[k].node.a, node->a);
        EXPECT_EQ(got[k].node.b, node->b);
        path += then;
      }
    };
    switch (n.kind) {
      case MarkoffNode::Kind::one:
        EXPECT_TRUE(seq.left.empty());
        expect_walk(seq.right, "", 0, 'L');
        break;
      case MarkoffNode::Kind::two:
        EXPECT_TRUE(seq.right.empty());
        expect_walk(seq.left, "", 0, 'R');
        break;
      case MarkoffNode::Kind::vertex:
        expect_walk(seq.left, n.path, 'L', 'R');
        expect_walk(seq.right, n.path, 'R', 'L');
        break;
    }
  }
  const NeighborSequences five = neighbor_sequences(nodes[2], 2);
  EXPECT_EQ(five.left[0].n, 13);
  EXPECT_EQ(five.right[0].n, 29);
}

TEST(Observations, HoldOnSmallTree) {
  ObservationOptions opts;
  opts.depth = 2;
  opts.K = 3;
  opts.trend_nodes = 2;
  opts.target = 64;
  opts.jobs = 2;
  const ObservationReport r = observation_report(opts);
  EXPECT_TRUE(r.iv_holds());
  EXPECT_TRUE(r.v_holds());
  EXPECT_TRUE(r.vi_holds());
  EXPECT_TRUE(r.vii_holds());
  EXPECT_TRUE(r.conjugate_mismatch.empty());
  EXPECT_EQ(r.real_nodes, (std::vector<std::size_t>{0, 1}));
  EXPECT_NEAR(r.re_min.to_double(), 706.32481354, 1e-8);
  EXPECT_NEAR(r.re_max.to_double(), 709.89289091, 1e-8);
  EXPECT_NEAR(r.im_max.to_double(), 0.267039735, 1e-9);
  const MarkoffValue& five = r.values[2];
  EXPECT_NEAR(five.val1.re.to_double(), 708.90991972, 1e-8);
  EXPECT_NEAR(five.val1.im.to_double(), 0.267039735, 1e-9);
  for (const MarkoffValue& v : r.values) {
    EXPECT_LT(abs(v.val2 - conj(v.val1)).to_double(), 1e-15);
  }
}
