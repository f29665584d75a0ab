// Copyright 2026 The gnnaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "gnnaudit/graph.hpp"
#include "gnnaudit/layers.hpp"
#include "gnnaudit/sampling.hpp"

namespace gnnaudit {

/// A sample as the attacker sees it: node, label, L-hop neighborhood in a
/// graph view, and the features of that neighborhood.
struct NodeTuple {
  NodeId node_id = 0;
  std::vector<double> features;
  int label = 0;
  bool member = false;
  std::vector<NodeId> neighborhood;
  std::map<NodeId, std::vector<double>> neighbor_features;
};

/// One tuple per train node followed by one per test node, neighborhoods
/// taken in the regime's edge set.
inline std::vector<NodeTuple> BuildTuples(const Graph& g, const Split& split, int hops, Regime regime) {
  if (hops < 1) throw InvalidArgument("tuple neighborhoods need L >= 1");
  const Adjacency adj = RegimeAdjacency(g, split, regime);
  auto row = [&](NodeId v) {
    const auto r = g.features().row(v);
    return std::vector<double>(r.data(), r.data() + r.size());
  };
  std::vector<NodeTuple> out;
  for (const auto* side : {&split.train_nodes, &split.test_nodes}) {
    for (NodeId v : *side) {
      NodeTuple t;
      t.node_id = v;
      t.features = row(v);
      t.label = g.label(v);
      t.member = side == &split.train_nodes;
      t.neighborhood = LHopNeighborhood(adj, v, hops);
      for (NodeId u : t.neighborhood) t.neighbor_features.emplace(u, row(u));
      out.push_back(std::move(t));
    }
  }
  return out;
}

struct SwapWitness {
  NodeId node_id = 0;
  std::vector<NodeId> before;  // neighborhood the tuple carries
  std::vector<NodeId> after;   // neighborhood the swapped training graph implies
};

struct SwapVerdict {
  bool compatible = true;
  std::vector<SwapWitness> witnesses;
  bool support_break = false;
};

namespace detail {

/// Member tuples carry neighborhoods in the training view (induced on the
/// train set); the non-member tuple carries its neighborhood in the full
/// graph, which is how it is queried. Swapping member m with non-member t
/// keeps every tuple as it was and puts t in m's slot, so the swap is
/// consistent only if the carried neighborhoods equal the ones the swapped
/// train set S' = S - m + t would produce. In transductive mode every tuple
/// uses the full graph.
inline std::vector<SwapWitness> SwapWitnesses(const Graph& g, const std::vector<char>& train_mask, NodeId member,
                                              NodeId nonmember, int hops, bool transductive) {
  std::vector<SwapWitness> out;
  if (transductive) return out;
  std::vector<char> swapped = train_mask;
  swapped[member] = 0;
  swapped[nonmember] = 1;
  const Adjacency before(g.node_count(), InducedEdges(g.edges(), train_mask));
  const Adjacency after(g.node_count(), InducedEdges(g.edges(), swapped));

  // Only nodes within L hops of m or t in the full graph can see a change.
  std::vector<NodeId> candidates = LHopNeighborhood(g, member, hops);
  const auto near_t = LHopNeighborhood(g, nonmember, hops);
  candidates.insert(candidates.end(), near_t.begin(), near_t.end());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  for (NodeId v : candidates) {
    if (!train_mask[v] || v == member || v == nonmember) continue;
    auto b = LHopNeighborhood(before, v, hops);
    auto a = LHopNeighborhood(after, v, hops);
    if (a != b) out.push_back({v, std::move(b), std::move(a)});
  }
  {
    auto carried = LHopNeighborhood(g, nonmember, hops);
    auto implied = LHopNeighborhood(after, nonmember, hops);
    if (carried != implied) out.push_back({nonmember, std::move(carried), std::move(implied)});
  }
  {
    auto carried = LHopNeighborhood(before, member, hops);
    auto implied = LHopNeighborhood(g, member, hops);
    if (carried != implied) out.push_back({member, std::move(carried), std::move(implied)});
  }
  std::sort(out.begin(), out.end(), [](const SwapWitness& x, const SwapWitness& y) { return x.node_id < y.node_id; });
  return out;
}

inline void CheckSwapSides(const Split& split, NodeId member, NodeId nonmember) {
  if (member >= split.node_count || nonmember >= split.node_count) {
    throw InvalidArgument("swap node id out of range");
  }
  const auto mask = split.TrainMask();
  if (!mask[member]) throw InvalidArgument("swap member " + std::to_string(member) + " is not a train node");
  if (mask[nonmember]) {
    throw InvalidArgument("swap non-member " + std::to_string(nonmember) + " is not a test node");
  }
}

}  // namespace detail

/// Exchangeability of one member/non-member swap for a node-induced
/// (random) training graph. At L = 1 the swap is compatible exactly when
/// both nodes are isolated in the full graph.
inline SwapVerdict CheckSwap(const Graph& g, const Split& split, NodeId member, NodeId nonmember, int hops,
                             bool transductive = false) {
  if (hops < 1) throw InvalidArgument("swap check needs L >= 1");
  detail::CheckSwapSides(split, member, nonmember);
  SwapVerdict v;
  v.witnesses = detail::SwapWitnesses(g, split.TrainMask(), member, nonmember, hops, transductive);
  v.compatible = v.witnesses.empty();
  return v;
}

struct SnowballReplay {
  std::vector<NodeId> nodes;  // sorted
  bool replayable = true;     // false when the swapped-in node would need draws that were never made
};

/// Re-runs a recorded snowball traversal. With a swap, `member` is removed
/// from the process: its expansions are skipped and draws that reached it
/// are dropped. `nonmember` takes over member's slot only where the slot
/// did not depend on member's identity: a reseed, or a class seed of the
/// same label. A substituted node can only replay member's expansion when
/// both expansions are empty (the draws of the new node were never made).
inline SnowballReplay ReplaySnowball(const Graph& g, const SnowballTrace& trace,
                                     std::optional<std::pair<NodeId, NodeId>> swap = std::nullopt) {
  SnowballReplay r;
  std::vector<char> in(g.node_count(), 0);
  const NodeId m = swap ? swap->first : kNoNode;
  const NodeId t = swap ? swap->second : kNoNode;
  bool substituted = false;
  for (const auto& ev : trace.events) {
    switch (ev.kind) {
      case SnowballEvent::Kind::kSeed:
      case SnowballEvent::Kind::kReseed:
        if (ev.node == m) {
          if (ev.kind == SnowballEvent::Kind::kReseed || g.label(t) == g.label(m)) {
            in[t] = 1;
            substituted = true;
          }
        } else {
          in[ev.node] = 1;
        }
        break;
      case SnowballEvent::Kind::kExpand:
        if (ev.node == m) {
          if (substituted && !(ev.draws.empty() && g.degree(t) == 0)) r.replayable = false;
          break;
        }
        if (!in[ev.node]) break;
        for (NodeId w : ev.draws) {
          if (w != m) in[w] = 1;
        }
        break;
    }
  }
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (in[v]) r.nodes.push_back(v);
  }
  return r;
}

/// Rebuilds a snowball split from its recorded traversal alone.
inline Split RebuildSnowballSplit(const Graph& g, const Split& recorded) {
  if (!recorded.trace) throw InvalidArgument("split has no snowball trace");
  Split s = PartitionByTrainNodes(g, ReplaySnowball(g, *recorded.trace).nodes);
  s.strategy = Strategy::kSnowball;
  s.params = recorded.params;
  s.rng_seed = recorded.rng_seed;
  EdgeList traversal;
  for (const auto& ev : recorded.trace->events) {
    if (ev.kind != SnowballEvent::Kind::kExpand) continue;
    for (NodeId w : ev.draws) traversal.push_back(MakeEdge(ev.node, w));
  }
  Canonicalize(traversal);
  s.traversal_edges = std::move(traversal);
  s.trace = recorded.trace;
  return s;
}

/// Snowball swap check against a split whose trace is trusted.
inline SwapVerdict CheckSwapSnowballTrusted(const Graph& g, const Split& split, NodeId member, NodeId nonmember,
                                            int hops, bool transductive = false) {
  if (!split.trace) throw InvalidArgument("snowball swap check needs the split's trace");
  if (hops < 1) throw InvalidArgument("swap check needs L >= 1");
  detail::CheckSwapSides(split, member, nonmember);
  SwapVerdict v;
  const auto replay = ReplaySnowball(g, *split.trace, std::make_pair(member, nonmember));
  std::vector<NodeId> expected;
  for (NodeId u : split.train_nodes) {
    if (u != member) expected.push_back(u);
  }
  expected.push_back(nonmember);
  std::sort(expected.begin(), expected.end());
  v.support_break = !replay.replayable || replay.nodes != expected;
  v.witnesses = detail::SwapWitnesses(g, split.TrainMask(), member, nonmember, hops, transductive);
  v.compatible = v.witnesses.empty() && !v.support_break;
  return v;
}

/// Snowball variant: besides the neighborhood comparison, replays the
/// recorded traversal with the swap imposed and flags a support break when
/// the replay does not yield exactly S - m + t. The stored split must be
/// reproducible from its own parameters and seed.
inline SwapVerdict CheckSwapSnowball(const Graph& g, const Split& split, NodeId member, NodeId nonmember,
                                     int hops, bool transductive = false) {
  if (split.strategy != Strategy::kSnowball || !split.trace) {
    throw InvalidArgument("snowball swap check needs a snowball split with its trace");
  }
  const Split regenerated = SnowballSplit(g, split.trace->target_size, split.params, split.rng_seed);
  if (regenerated.train_nodes != split.train_nodes || regenerated.trace != split.trace) {
    throw InvalidArgument("stored split does not match its recorded parameters and seed");
  }
  return CheckSwapSnowballTrusted(g, split, member, nonmember, hops, transductive);
}

/// Swap check dispatching on the split's strategy.
inline SwapVerdict CheckSplitSwap(const Graph& g, const Split& split, NodeId member, NodeId nonmember, int hops,
                                  bool transductive = false) {
  if (split.strategy == Strategy::kSnowball) {
    return CheckSwapSnowballTrusted(g, split, member, nonmember, hops, transductive);
  }
  return CheckSwap(g, split, member, nonmember, hops, transductive);
}

struct ViolationEstimate {
  double rate = 0.0;
  double wilson_low = 0.0;
  double wilson_high = 0.0;
  std::size_t trials = 0;
  std::size_t violations = 0;
};

/// 95% Wilson score interval.
inline ViolationEstimate WilsonEstimate(std::size_t violations, std::size_t trials) {
  ViolationEstimate e;
  e.trials = trials;
  e.violations = violations;
  if (trials == 0) return e;
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(violations) / n;
  const double denom = 1.0 + z * z / n;
  const double center = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  e.rate = p;
  // the bounds touch 0 and 1 exactly at the extremes; cancellation would leave residue
  e.wilson_low = violations == 0 ? 0.0 : std::max(0.0, center - half);
  e.wilson_high = violations == trials ? 1.0 : std::min(1.0, center + half);
  return e;
}

/// Monte-Carlo fraction of incompatible swaps: every trial draws a fresh
/// split, then a uniform member and a uniform non-member.
inline ViolationEstimate ViolationRate(const Graph& g, Strategy strategy, const SamplingParams& params, int hops,
                                       std::size_t trials, std::uint64_t seed, bool transductive = false) {
  if (trials < 1) throw InvalidArgument("violation rate needs at least one trial");
  std::size_t bad = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    const Split s = MakeSplit(g, strategy, params, DeriveSeed(seed, "violation-split", i));
    Rng rng(DeriveSeed(seed, "violation-pair", i));
    const NodeId m = s.train_nodes[rng.UniformIndex(s.train_nodes.size())];
    const NodeId t = s.test_nodes[rng.UniformIndex(s.test_nodes.size())];
    bad += !CheckSplitSwap(g, s, m, t, hops, transductive).compatible;
  }
  return WilsonEstimate(bad, trials);
}

}  // namespace gnnaudit
