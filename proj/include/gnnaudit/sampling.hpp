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

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gnnaudit/common.hpp"
#include "gnnaudit/graph.hpp"

namespace gnnaudit {

enum class Strategy { kRandom, kSnowball };

inline std::string ToString(Strategy s) { return s == Strategy::kRandom ? "random" : "snowball"; }

inline Strategy ParseStrategy(std::string_view s) {
  if (s == "random") return Strategy::kRandom;
  if (s == "snowball") return Strategy::kSnowball;
  throw InvalidArgument("unknown sampling strategy '" + std::string(s) + "'");
}

struct SamplingParams {
  double train_fraction = 0.1;
  int k = 3;                 // snowball: max neighbors drawn per frontier node
  int seeds_per_class = 10;  // snowball: initial seeds per class
};

/// One step of a snowball traversal. kExpand lists the neighbors that were
/// drawn and processed for `node`, in draw order; a stage that hits the
/// target size stops mid-list, so the last expansion may be truncated.
struct SnowballEvent {
  enum class Kind { kSeed, kExpand, kReseed };
  Kind kind = Kind::kSeed;
  NodeId node = 0;
  std::vector<NodeId> draws;
  bool operator==(const SnowballEvent&) const = default;
};

struct SnowballTrace {
  std::size_t target_size = 0;
  std::vector<SnowballEvent> events;
  bool operator==(const SnowballTrace&) const = default;
};

/// Inductive train/test split. Node lists are sorted; the three edge lists
/// partition the graph's edges by endpoint membership.
struct Split {
  Strategy strategy = Strategy::kRandom;
  SamplingParams params;
  std::uint64_t rng_seed = 0;
  std::size_t node_count = 0;
  std::vector<NodeId> train_nodes;
  std::vector<NodeId> test_nodes;
  EdgeList train_edges;
  EdgeList test_edges;
  EdgeList cross_edges;
  EdgeList traversal_edges;           // snowball: edges actually walked
  std::optional<SnowballTrace> trace;  // snowball only

  std::vector<char> TrainMask() const {
    std::vector<char> m(node_count, 0);
    for (NodeId v : train_nodes) m[v] = 1;
    return m;
  }
};

/// Builds the node and edge partition for a given training node set.
inline Split PartitionByTrainNodes(const Graph& g, std::vector<NodeId> train_nodes) {
  Split s;
  s.node_count = g.node_count();
  std::sort(train_nodes.begin(), train_nodes.end());
  train_nodes.erase(std::unique(train_nodes.begin(), train_nodes.end()), train_nodes.end());
  const auto mask = NodeMask(g.node_count(), train_nodes);
  s.train_nodes = std::move(train_nodes);
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (!mask[v]) s.test_nodes.push_back(v);
  }
  for (const Edge& e : g.edges()) {
    const int inside = mask[e.u] + mask[e.v];
    if (inside == 2) {
      s.train_edges.push_back(e);
    } else if (inside == 0) {
      s.test_edges.push_back(e);
    } else {
      s.cross_edges.push_back(e);
    }
  }
  return s;
}

inline std::size_t TrainSizeFor(const Graph& g, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw InvalidArgument("train fraction must lie in (0,1)");
  }
  const auto size = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(g.node_count())));
  if (size == 0 || size >= g.node_count()) {
    throw InvalidArgument("train fraction " + FormatDouble(fraction) +
                          " leaves the train or test set empty");
  }
  return size;
}

/// Uniform node sampling without replacement; the train graph is the
/// induced subgraph.
inline Split RandomNodeSplit(const Graph& g, double fraction, std::uint64_t seed) {
  const std::size_t size = TrainSizeFor(g, fraction);
  std::vector<NodeId> all(g.node_count());
  for (NodeId v = 0; v < g.node_count(); ++v) all[v] = v;
  Rng rng(seed);
  Split s = PartitionByTrainNodes(g, rng.SampleWithoutReplacement(std::move(all), size));
  s.strategy = Strategy::kRandom;
  s.params.train_fraction = fraction;
  s.rng_seed = seed;
  return s;
}

/// Snowball sampling. Seeds are `seeds_per_class` uniform nodes of every
/// class; each stage draws up to k distinct neighbors of every frontier node
/// (ascending id order) and admits the ones not seen before. Draws that land
/// on already-sampled nodes still contribute their edge to the traversal. An
/// empty frontier is reseeded with one uniform unvisited node. Sampling stops
/// the moment `target_size` nodes are in.
inline Split SnowballSplit(const Graph& g, std::size_t target_size, const SamplingParams& params,
                           std::uint64_t seed) {
  if (params.k < 1) throw InvalidArgument("snowball k must be >= 1");
  if (params.seeds_per_class < 1) throw InvalidArgument("seeds_per_class must be >= 1");
  const std::size_t num_seeds =
      static_cast<std::size_t>(params.seeds_per_class) * static_cast<std::size_t>(g.num_classes());
  if (target_size < num_seeds) {
    throw InvalidArgument("target size " + std::to_string(target_size) + " smaller than seed set " +
                          std::to_string(num_seeds));
  }
  if (target_size >= g.node_count()) {
    throw InvalidArgument("target size leaves the test set empty");
  }

  Rng rng(seed);
  SnowballTrace trace;
  trace.target_size = target_size;
  std::vector<char> visited(g.node_count(), 0);
  std::vector<NodeId> admitted;
  EdgeList traversal;

  std::vector<std::vector<NodeId>> by_class(static_cast<std::size_t>(g.num_classes()));
  for (NodeId v = 0; v < g.node_count(); ++v) by_class[static_cast<std::size_t>(g.label(v))].push_back(v);
  std::vector<NodeId> frontier;
  for (int c = 0; c < g.num_classes(); ++c) {
    const auto& pool = by_class[static_cast<std::size_t>(c)];
    if (pool.size() < static_cast<std::size_t>(params.seeds_per_class)) {
      throw InvalidArgument("class " + std::to_string(c) + " has " + std::to_string(pool.size()) +
                            " nodes, fewer than seeds_per_class");
    }
    for (NodeId v : rng.SampleWithoutReplacement(pool, static_cast<std::size_t>(params.seeds_per_class))) {
      visited[v] = 1;
      admitted.push_back(v);
      frontier.push_back(v);
      trace.events.push_back({SnowballEvent::Kind::kSeed, v, {}});
    }
  }

  while (admitted.size() < target_size) {
    if (frontier.empty()) {
      std::vector<NodeId> unvisited;
      for (NodeId v = 0; v < g.node_count(); ++v) {
        if (!visited[v]) unvisited.push_back(v);
      }
      const NodeId r = unvisited[rng.UniformIndex(unvisited.size())];
      visited[r] = 1;
      admitted.push_back(r);
      frontier.push_back(r);
      trace.events.push_back({SnowballEvent::Kind::kReseed, r, {}});
      continue;
    }
    std::sort(frontier.begin(), frontier.end());
    std::vector<NodeId> next;
    for (NodeId u : frontier) {
      const auto nbrs = g.neighbors(u);
      auto draws = rng.SampleWithoutReplacement(std::vector<NodeId>(nbrs.begin(), nbrs.end()),
                                                static_cast<std::size_t>(params.k));
      SnowballEvent ev{SnowballEvent::Kind::kExpand, u, {}};
      for (NodeId w : draws) {
        ev.draws.push_back(w);
        traversal.push_back(MakeEdge(u, w));
        if (visited[w]) continue;
        visited[w] = 1;
        admitted.push_back(w);
        next.push_back(w);
        if (admitted.size() == target_size) break;
      }
      trace.events.push_back(std::move(ev));
      if (admitted.size() == target_size) break;
    }
    frontier = std::move(next);
  }

  Split s = PartitionByTrainNodes(g, std::move(admitted));
  s.strategy = Strategy::kSnowball;
  s.params = params;
  s.rng_seed = seed;
  Canonicalize(traversal);
  s.traversal_edges = std::move(traversal);
  s.trace = std::move(trace);
  return s;
}

inline Split SnowballSplit(const Graph& g, const SamplingParams& params, std::uint64_t seed) {
  return SnowballSplit(g, TrainSizeFor(g, params.train_fraction), params, seed);
}

inline Split MakeSplit(const Graph& g, Strategy strategy, const SamplingParams& params,
                       std::uint64_t seed) {
  if (strategy == Strategy::kRandom) {
    Split s = RandomNodeSplit(g, params.train_fraction, seed);
    s.params = params;
    return s;
  }
  return SnowballSplit(g, params, seed);
}

/// probs[k] = probability of degree k.
struct DegreeDistribution {
  std::vector<double> probs;

  double Mean() const {
    double m = 0.0;
    for (std::size_t k = 0; k < probs.size(); ++k) m += static_cast<double>(k) * probs[k];
    return m;
  }
};

inline DegreeDistribution EmpiricalDegreeDistribution(const Graph& g) {
  if (g.node_count() == 0) throw InvalidArgument("degree distribution of an empty graph");
  DegreeDistribution d;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    const std::size_t k = g.degree(v);
    if (k >= d.probs.size()) d.probs.resize(k + 1, 0.0);
    d.probs[k] += 1.0;
  }
  for (double& p : d.probs) p /= static_cast<double>(g.node_count());
  return d;
}

/// Degree law of a node-induced subgraph when every node is kept
/// independently with probability p: each of a node's l edges survives
/// with probability p, so q_k = sum_{l>=k} C(l,k) p^k (1-p)^(l-k) P_l.
inline DegreeDistribution PredictedDegreeDistribution(const DegreeDistribution& full, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("retention probability must lie in [0,1]");
  double total = 0.0;
  for (double v : full.probs) {
    if (v < 0.0) throw InvalidArgument("negative probability in degree distribution");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("degree distribution is not normalized");

  DegreeDistribution q;
  q.probs.assign(full.probs.size(), 0.0);
  if (q.probs.empty()) return q;
  if (p == 0.0) {
    q.probs[0] = 1.0;
    return q;
  }
  if (p == 1.0) return full;
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  for (std::size_t l = 0; l < full.probs.size(); ++l) {
    if (full.probs[l] == 0.0) continue;
    const double dl = static_cast<double>(l);
    for (std::size_t k = 0; k <= l; ++k) {
      const double dk = static_cast<double>(k);
      const double log_binom = std::lgamma(dl + 1) - std::lgamma(dk + 1) - std::lgamma(dl - dk + 1);
      q.probs[k] += std::exp(log_binom + dk * lp + (dl - dk) * lq) * full.probs[l];
    }
  }
  double sum = 0.0;
  for (double v : q.probs) sum += v;
  for (double& v : q.probs) v /= sum;
  return q;
}

inline double TotalVariation(const DegreeDistribution& a, const DegreeDistribution& b) {
  const std::size_t n = std::max(a.probs.size(), b.probs.size());
  double tv = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = k < a.probs.size() ? a.probs[k] : 0.0;
    const double y = k < b.probs.size() ? b.probs[k] : 0.0;
    tv += std::abs(x - y);
  }
  return 0.5 * tv;
}

// ---------------------------------------------------------------------------
// split.json

namespace detail {

inline nlohmann::ordered_json EdgesToJson(const EdgeList& edges) {
  auto arr = nlohmann::ordered_json::array();
  for (const Edge& e : edges) arr.push_back({e.u, e.v});
  return arr;
}

inline EdgeList EdgesFromJson(const nlohmann::json& arr) {
  EdgeList out;
  for (const auto& e : arr) out.push_back(MakeEdge(e.at(0).get<NodeId>(), e.at(1).get<NodeId>()));
  return out;
}

}  // namespace detail

inline nlohmann::ordered_json SplitToJson(const Split& s) {
  nlohmann::ordered_json j;
  j["strategy"] = ToString(s.strategy);
  j["params"] = {{"train_fraction", s.params.train_fraction},
                 {"k", s.params.k},
                 {"seeds_per_class", s.params.seeds_per_class}};
  j["rng_seed"] = s.rng_seed;
  j["node_count"] = s.node_count;
  j["train_nodes"] = s.train_nodes;
  j["train_edges"] = detail::EdgesToJson(s.train_edges);
  j["test_edges"] = detail::EdgesToJson(s.test_edges);
  j["cross_edges"] = detail::EdgesToJson(s.cross_edges);
  if (s.strategy == Strategy::kSnowball) {
    j["traversal_edges"] = detail::EdgesToJson(s.traversal_edges);
    if (s.trace) {
      nlohmann::ordered_json t;
      t["target_size"] = s.trace->target_size;
      auto events = nlohmann::ordered_json::array();
      for (const auto& ev : s.trace->events) {
        static constexpr const char* kKinds[] = {"seed", "expand", "reseed"};
        nlohmann::ordered_json e;
        e["kind"] = kKinds[static_cast<int>(ev.kind)];
        e["node"] = ev.node;
        if (ev.kind == SnowballEvent::Kind::kExpand) e["draws"] = ev.draws;
        events.push_back(std::move(e));
      }
      t["events"] = std::move(events);
      j["trace"] = std::move(t);
    }
  }
  return j;
}

inline std::string SerializeSplit(const Split& s) { return SplitToJson(s).dump() + "\n"; }

inline Split SplitFromJson(const nlohmann::json& j) {
  try {
    Split s;
    s.strategy = ParseStrategy(j.at("strategy").get<std::string>());
    const auto& p = j.at("params");
    s.params.train_fraction = p.at("train_fraction").get<double>();
    s.params.k = p.at("k").get<int>();
    s.params.seeds_per_class = p.at("seeds_per_class").get<int>();
    s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    s.node_count = j.at("node_count").get<std::size_t>();
    s.train_nodes = j.at("train_nodes").get<std::vector<NodeId>>();
    std::vector<char> mask(s.node_count, 0);
    for (NodeId v : s.train_nodes) {
      if (v >= s.node_count) throw InvalidArgument("split: train node out of range");
      mask[v] = 1;
    }
    for (NodeId v = 0; v < s.node_count; ++v) {
      if (!mask[v]) s.test_nodes.push_back(v);
    }
    s.train_edges = detail::EdgesFromJson(j.at("train_edges"));
    s.test_edges = detail::EdgesFromJson(j.at("test_edges"));
    s.cross_edges = detail::EdgesFromJson(j.at("cross_edges"));
    if (j.contains("traversal_edges")) s.traversal_edges = detail::EdgesFromJson(j.at("traversal_edges"));
    if (j.contains("trace")) {
      SnowballTrace t;
      t.target_size = j.at("trace").at("target_size").get<std::size_t>();
      for (const auto& e : j.at("trace").at("events")) {
        SnowballEvent ev;
        const auto kind = e.at("kind").get<std::string>();
        ev.kind = kind == "seed"     ? SnowballEvent::Kind::kSeed
                  : kind == "expand" ? SnowballEvent::Kind::kExpand
                  : kind == "reseed" ? SnowballEvent::Kind::kReseed
                                     : throw InvalidArgument("split: unknown trace event " + kind);
        ev.node = e.at("node").get<NodeId>();
        if (e.contains("draws")) ev.draws = e.at("draws").get<std::vector<NodeId>>();
        t.events.push_back(std::move(ev));
      }
      s.trace = std::move(t);
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("split.json: ") + e.what());
  }
}

inline Split ParseSplit(std::string_view text) {
  try {
    return SplitFromJson(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(std::string("split.json: ") + e.what());
  }
}

/// Checks the split against a graph: node count, disjoint cover, edge
/// partition. Throws on mismatch.
inline void ValidateSplit(const Graph& g, const Split& s) {
  if (s.node_count != g.node_count()) throw InvalidArgument("split node count does not match graph");
  const Split expect = PartitionByTrainNodes(g, s.train_nodes);
  if (expect.train_edges != s.train_edges || expect.test_edges != s.test_edges ||
      expect.cross_edges != s.cross_edges) {
    throw InvalidArgument("split edge lists do not partition the graph's edges");
  }
}

}  // namespace gnnaudit
