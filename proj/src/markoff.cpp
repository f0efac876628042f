#include "valq/markoff.hpp"

#include <algorithm>
#include <deque>
#include <optional>
#include <tuple>

#include "valq/errors.hpp"
#include "valq/parallel.hpp"

namespace valq {

namespace {

Integer inverse_mod(const Integer& x, const Integer& m) {
  Integer out;
  if (mpz_invert(out.get_mpz_t(), x.get_mpz_t(), m.get_mpz_t()) == 0) {
    throw DomainError("markoff: " + x.get_str() + " is not invertible mod " + m.get_str());
  }
  return out;
}

Integer least_residue(const Integer& x, const Integer& m) {
  Integer r = x % m;
  if (r < 0) r += m;
  return r;
}

QuadIrr markoff_irrationality(const Integer& m, const Integer& k) {
  // Root (-B + sqrt(9m^2 - 4)) / (2m) of (m, 3m - 2k, (k^2 - 3mk + 1) / m).
  const Integer num = k * k - 3 * m * k + 1;
  if (num % m != 0) throw DomainError("markoff: k^2 != -1 mod m for m = " + m.get_str());
  return QuadIrr::make(m, 3 * m - 2 * k, num / m);
}

bool between(const BigReal& x, const BigReal& lo, const BigReal& hi) {
  return lo <= hi ? (lo <= x && x <= hi) : (hi <= x && x <= lo);
}

MarkoffNode vertex(Integer a, Integer b, Integer m) {
  MarkoffNode n;
  n.kind = MarkoffNode::Kind::vertex;
  n.a = std::move(a);
  n.b = std::move(b);
  n.m = std::move(m);
  return n;
}

}  // namespace

std::vector<MarkoffNode> tree(int depth) {
  if (depth < 0) throw DomainError("markoff tree: depth must be non-negative");
  if (depth > 24) throw ResourceError("markoff tree: depth " + std::to_string(depth) + " is too large");
  std::vector<MarkoffNode> nodes;
  MarkoffNode one;
  one.kind = MarkoffNode::Kind::one;
  one.m = 1;
  one.a = 1;
  one.b = 1;
  MarkoffNode two = one;
  two.kind = MarkoffNode::Kind::two;
  two.m = 2;
  nodes.push_back(one);
  nodes.push_back(two);

  MarkoffNode root = vertex(1, 2, 5);
  root.left_region = 0;
  root.right_region = 1;
  nodes.push_back(root);

  std::deque<std::size_t> queue{2};
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    if (static_cast<int>(nodes[i].depth()) >= depth) continue;
    const MarkoffNode parent = nodes[i];

    MarkoffNode left = vertex(parent.a, parent.m, 3 * parent.a * parent.m - parent.b);
    left.path = parent.path + "L";
    left.left_region = parent.left_region;
    left.right_region = static_cast<long>(i);
    nodes[i].left_child = static_cast<long>(nodes.size());
    nodes.push_back(std::move(left));
    queue.push_back(nodes.size() - 1);

    MarkoffNode right = vertex(parent.m, parent.b, 3 * parent.m * parent.b - parent.a);
    right.path = parent.path + "R";
    right.left_region = static_cast<long>(i);
    right.right_region = parent.right_region;
    nodes[i].right_child = static_cast<long>(nodes.size());
    nodes.push_back(std::move(right));
    queue.push_back(nodes.size() - 1);
  }
  return nodes;
}

std::vector<std::size_t> sorted_by_m(const std::vector<MarkoffNode>& nodes) {
  std::vector<std::size_t> order(nodes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::tie(nodes[x].m, nodes[x].path) < std::tie(nodes[y].m, nodes[y].path);
  });
  return order;
}

MarkoffTheta theta(const MarkoffNode& node, Precision prec) {
  const Integer& m = node.m;
  if (m <= 0) throw DomainError("markoff: m must be positive");
  Integer k1 = 0, k2 = 0;
  if (m > 1) {
    k1 = least_residue(node.b * inverse_mod(node.a, m), m);
    k2 = least_residue(node.a * inverse_mod(node.b, m), m);
  }
  BigReal mm(m, prec);
  BigReal L = sqrt(BigReal(9L, prec) - BigReal(4L, prec) / (mm * mm), prec);
  return MarkoffTheta{markoff_irrationality(m, k1), markoff_irrationality(m, k2), std::move(L), k1, k2};
}

NeighborSequences neighbor_sequences(const MarkoffNode& node, std::size_t K) {
  NeighborSequences out;
  const Integer& m = node.m;
  const bool has_left = node.kind != MarkoffNode::Kind::one;
  const bool has_right = node.kind != MarkoffNode::Kind::two;

  // n_0 is the region across the edge above; each further term is the region
  // across the next edge down, n_{k+1} = 3m n_k - n_{k-1}.
  auto walk = [&](Integer prev, Integer cur, bool right_side) {
    std::vector<Neighbor> seq;
    for (std::size_t k = 0; k < K; ++k) {
      Integer next = 3 * m * cur - prev;
      MarkoffNode n = right_side ? vertex(m, cur, next) : vertex(cur, m, next);
      seq.push_back(Neighbor{next, std::move(n)});
      prev = std::move(cur);
      cur = std::move(next);
    }
    return seq;
  };

  switch (node.kind) {
    case MarkoffNode::Kind::one:
      // Region 1 borders 2 along the top edge, then 5, 13, 34, ...
      out.right = walk(1, 2, true);
      break;
    case MarkoffNode::Kind::two:
      out.left = walk(1, 1, false);
      break;
    case MarkoffNode::Kind::vertex:
      if (has_left) out.left = walk(node.b, node.a, false);
      if (has_right) out.right = walk(node.a, node.b, true);
      break;
  }
  return out;
}

bool NeighborTrend::decreasing() const {
  for (std::size_t i = 1; i < deltas.size(); ++i) {
    if (!(deltas[i] < deltas[i - 1])) return false;
  }
  return !deltas.empty();
}

bool ObservationReport::iv_holds() const {
  for (std::size_t i : real_nodes) {
    if (nodes[i].kind == MarkoffNode::Kind::vertex) return false;
  }
  return true;
}

bool ObservationReport::vi_holds() const {
  return std::all_of(betweenness.begin(), betweenness.end(), [](const Betweenness& b) { return b.holds(); });
}

bool ObservationReport::vii_holds() const {
  return std::all_of(trends.begin(), trends.end(), [](const NeighborTrend& t) { return t.decreasing(); });
}

ObservationReport observation_report(const ObservationOptions& opts) {
  ObservationReport report;
  report.nodes = tree(opts.depth);
  report.target = opts.target;
  const auto& nodes = report.nodes;

  // Every val needed, evaluated in one parallel batch.
  std::vector<QuadIrr> points;
  std::vector<MarkoffTheta> thetas;
  for (const MarkoffNode& n : nodes) {
    thetas.push_back(theta(n, opts.target));
    points.push_back(thetas.back().theta1);
    points.push_back(thetas.back().theta2);
  }

  const std::vector<std::size_t> order = sorted_by_m(nodes);
  for (std::size_t t = 0; t < std::min(opts.trend_nodes, order.size()); ++t) {
    const std::size_t i = order[t];
    const NeighborSequences seq = neighbor_sequences(nodes[i], opts.K);
    for (const auto* side : {&seq.right, &seq.left}) {
      if (side->empty()) continue;
      NeighborTrend trend;
      trend.node = i;
      trend.side = side == &seq.right ? 'R' : 'L';
      for (const Neighbor& nb : *side) {
        trend.n.push_back(nb.n);
        const MarkoffTheta th = theta(nb.node, opts.target);
        points.push_back(trend.side == 'R' ? th.theta1 : th.theta2);
      }
      report.trends.push_back(std::move(trend));
    }
  }

  std::vector<std::optional<BigComplex>> vals(points.size());
  parallel_for(points.size(), opts.jobs, [&](std::size_t i) { vals[i] = val(points[i], opts.target).value; });

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    report.values.push_back(MarkoffValue{i, std::move(thetas[i]), std::move(*vals[2 * i]), std::move(*vals[2 * i + 1])});
  }
  std::size_t next = 2 * nodes.size();
  for (NeighborTrend& trend : report.trends) {
    const MarkoffValue& base = report.values[trend.node];
    const BigComplex& limit = trend.side == 'R' ? base.val1 : base.val2;
    for (std::size_t k = 0; k < trend.n.size(); ++k) {
      trend.values.push_back(std::move(*vals[next++]));
      trend.deltas.push_back(abs(trend.values.back() - limit));
    }
  }

  const BigReal tol = ldexp(BigReal(1L, opts.target), -static_cast<long>(opts.target / 2));
  report.re_min = report.values.front().val1.re;
  report.re_max = report.re_min;
  report.im_max = BigReal(0L, opts.target);
  for (const MarkoffValue& v : report.values) {
    const MarkoffNode& n = nodes[v.node];
    if (abs(v.val1.im) < tol) report.real_nodes.push_back(v.node);
    if (n.kind == MarkoffNode::Kind::vertex && !(v.val1.im.sign() > 0 && v.val2.im.sign() < 0)) {
      report.sign_violations.push_back(v.node);
    }
    if (!(abs(v.val2 - conj(v.val1)) < tol)) report.conjugate_mismatch.push_back(v.node);
    for (const BigComplex* z : {&v.val1, &v.val2}) {
      if (z->re < report.re_min) report.re_min = z->re;
      if (z->re > report.re_max) report.re_max = z->re;
      if (abs(z->im) > report.im_max) report.im_max = abs(z->im);
    }
  }

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const MarkoffNode& n = nodes[i];
    if (n.kind != MarkoffNode::Kind::vertex) continue;
    const MarkoffValue& left = report.values[static_cast<std::size_t>(n.left_region)];
    const MarkoffValue& right = report.values[static_cast<std::size_t>(n.right_region)];
    const MarkoffValue& below = report.values[i];
    for (int j = 1; j <= 2; ++j) {
      const BigComplex& x = j == 1 ? left.val1 : left.val2;
      const BigComplex& y = j == 1 ? right.val1 : right.val2;
      const BigComplex& z = j == 1 ? below.val1 : below.val2;
      Betweenness b;
      b.vertex = i;
      b.j = j;
      b.exceptional = n.path.empty();
      b.re_between = between(z.re, x.re, y.re);
      b.im_between = between(z.im, x.im, y.im);
      report.betweenness.push_back(b);
    }
  }
  return report;
}

}  // namespace valq
