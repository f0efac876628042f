// Markoff triples x^2 + y^2 + z^2 = 3xyz arranged as a binary tree, the
// refined Markoff irrationalities and the experiments run on them.
//
// A tree vertex (a, b, m) has region a on its left, region b on its right and
// the new region m below. Its children are (a, m, 3am - b) on the left and
// (m, b, 3mb - a) on the right; the root is (1, 2, 5). The regions 1 and 2
// sit above the root and are carried as two special nodes with triples
// (1, 1, 1) and (1, 1, 2).
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "valq/heckeval.hpp"
#include "valq/numerics.hpp"
#include "valq/quadratic.hpp"

namespace valq {

struct MarkoffNode {
  enum class Kind { one, two, vertex };

  Kind kind = Kind::vertex;
  Integer m, a, b;
  std::string path;  // L/R word from the root vertex; empty for the root and the special nodes
  // Indices into the tree() result; -1 when absent.
  long left_region = -1, right_region = -1;
  long left_child = -1, right_child = -1;

  std::size_t depth() const { return path.size(); }
};

// Special nodes first (m = 1, m = 2), then vertices breadth first down to
// path length `depth`.
std::vector<MarkoffNode> tree(int depth);

// Node indices ordered by (m, path).
std::vector<std::size_t> sorted_by_m(const std::vector<MarkoffNode>& nodes);

struct MarkoffTheta {
  QuadIrr theta1, theta2;
  BigReal L;       // sqrt(9 - 4/m^2)
  Integer k1, k2;  // a k1 = b, b k2 = a (mod m), in [0, m)
};

// theta_j = (-3m + 2 k_j + sqrt(9m^2 - 4)) / (2m). For even m the form is
// imprimitive and theta_j carries the reduced discriminant (9m^2 - 4) / 4.
MarkoffTheta theta(const MarkoffNode& node, Precision prec = 128);

// The node whose region is theta_{i,j} for a number in a neighbor sequence.
struct Neighbor {
  Integer n;
  MarkoffNode node;  // triple only; tree indices are not set
};

struct NeighborSequences {
  std::vector<Neighbor> left, right;  // n_1..n_K along each descending edge
};

// For m = 1 only the right sequence exists, for m = 2 only the left one.
NeighborSequences neighbor_sequences(const MarkoffNode& node, std::size_t K);

struct ObservationOptions {
  int depth = 3;
  std::size_t K = 4;               // neighbor terms per side
  std::size_t trend_nodes = 3;     // neighbor trends for this many smallest m
  Precision target = 96;
  unsigned jobs = 1;
};

struct MarkoffValue {
  std::size_t node = 0;
  MarkoffTheta theta;
  BigComplex val1, val2;
};

// Observation (vi) at one vertex (m, m', m'') = (a, b, m) and j = 1, 2.
struct Betweenness {
  std::size_t vertex = 0;
  int j = 1;
  bool re_between = false;
  bool im_between = false;
  bool exceptional = false;  // the (1, 2, 5) vertex: only the real parts are compared
  bool holds() const { return re_between && (exceptional || im_between); }
};

// Observation (vii): |val(theta_{k,1}^R) - val(theta_1)| on the right,
// |val(theta_{k,2}^L) - val(theta_2)| on the left.
struct NeighborTrend {
  std::size_t node = 0;
  char side = 'R';
  std::vector<Integer> n;
  std::vector<BigComplex> values;
  std::vector<BigReal> deltas;
  bool decreasing() const;
};

struct ObservationReport {
  std::vector<MarkoffNode> nodes;
  std::vector<MarkoffValue> values;  // one per node, in node order
  Precision target = 0;

  std::vector<std::size_t> real_nodes;         // (iv): |Im val(theta_1)| below tolerance
  std::vector<std::size_t> sign_violations;    // (v): nodes with m >= 5 and the wrong sign of Im
  std::vector<std::size_t> conjugate_mismatch; // val(theta_2) != conj(val(theta_1))
  std::vector<Betweenness> betweenness;        // (vi)
  std::vector<NeighborTrend> trends;           // (vii)

  // Extremes over all val(theta_{i,j}).
  BigReal re_min{kMinPrecision}, re_max{kMinPrecision}, im_max{kMinPrecision};

  bool iv_holds() const;
  bool v_holds() const { return sign_violations.empty(); }
  bool vi_holds() const;
  bool vii_holds() const;
};

ObservationReport observation_report(const ObservationOptions& opts);

}  // namespace valq
