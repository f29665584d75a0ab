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

#include <Eigen/Dense>

#include <algorithm>
#include <compare>
#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gnnaudit/common.hpp"

namespace gnnaudit {

/// Node-major dense matrix: one row per node.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Undirected edge, always stored with u < v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  auto operator<=>(const Edge&) const = default;
};

inline Edge MakeEdge(NodeId a, NodeId b) {
  if (a == b) throw InvalidArgument("self-loop at node " + std::to_string(a));
  return a < b ? Edge{a, b} : Edge{b, a};
}

using EdgeList = std::vector<Edge>;

/// Sorts and deduplicates; every entry must already satisfy u < v.
inline void Canonicalize(EdgeList& edges) {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

/// Compressed neighbor lists over a fixed node range. Neighbor lists are
/// sorted ascending.
class Adjacency {
 public:
  Adjacency() = default;

  Adjacency(std::size_t node_count, const EdgeList& edges)
      : offsets_(node_count + 1, 0) {
    for (const Edge& e : edges) {
      if (e.u >= node_count || e.v >= node_count) {
        throw InvalidArgument("edge endpoint out of range");
      }
      ++offsets_[e.u + 1];
      ++offsets_[e.v + 1];
    }
    for (std::size_t i = 0; i < node_count; ++i) offsets_[i + 1] += offsets_[i];
    neighbors_.resize(offsets_.back());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (const Edge& e : edges) {
      neighbors_[fill[e.u]++] = e.v;
      neighbors_[fill[e.v]++] = e.u;
    }
    for (std::size_t i = 0; i < node_count; ++i) {
      std::sort(neighbors_.begin() + offsets_[i], neighbors_.begin() + offsets_[i + 1]);
    }
  }

  std::size_t node_count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {neighbors_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }

  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> neighbors_;
};

/// Immutable simple undirected attributed graph.
class Graph {
 public:
  Graph() = default;

  /// Validates and canonicalizes `edges` (dedup, u < v). Self-loops and
  /// out-of-range endpoints are rejected.
  Graph(std::size_t node_count, EdgeList edges, Matrix features, std::vector<int> labels,
        int num_classes)
      : node_count_(node_count),
        edges_(std::move(edges)),
        features_(std::move(features)),
        labels_(std::move(labels)),
        num_classes_(num_classes) {
    for (Edge& e : edges_) e = MakeEdge(e.u, e.v);
    Canonicalize(edges_);
    if (static_cast<std::size_t>(features_.rows()) != node_count_) {
      throw InvalidArgument("feature row count " + std::to_string(features_.rows()) +
                            " != node count " + std::to_string(node_count_));
    }
    if (labels_.size() != node_count_) {
      throw InvalidArgument("label count " + std::to_string(labels_.size()) +
                            " != node count " + std::to_string(node_count_));
    }
    if (num_classes_ < 1 && node_count_ > 0) throw InvalidArgument("num_classes must be >= 1");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i] < 0 || labels_[i] >= num_classes_) {
        throw InvalidArgument("label " + std::to_string(labels_[i]) + " of node " +
                              std::to_string(i) + " out of range");
      }
    }
    adjacency_ = Adjacency(node_count_, edges_);
  }

  std::size_t node_count() const { return node_count_; }
  std::size_t edge_count() const { return edges_.size(); }
  const EdgeList& edges() const { return edges_; }
  const Matrix& features() const { return features_; }
  std::size_t feature_dim() const { return static_cast<std::size_t>(features_.cols()); }
  const std::vector<int>& labels() const { return labels_; }
  int label(NodeId v) const { return labels_[v]; }
  int num_classes() const { return num_classes_; }
  const Adjacency& adjacency() const { return adjacency_; }
  std::span<const NodeId> neighbors(NodeId v) const { return adjacency_.neighbors(v); }
  std::size_t degree(NodeId v) const { return adjacency_.degree(v); }

 private:
  std::size_t node_count_ = 0;
  EdgeList edges_;
  Matrix features_;
  std::vector<int> labels_;
  int num_classes_ = 0;
  Adjacency adjacency_;
};

struct DatasetMeta {
  std::string name;
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  int num_classes = 0;
  std::size_t feature_dim = 0;
  double avg_degree = 0.0;
  double avg_homophily = 0.0;
};

inline double AverageDegree(const Graph& g) {
  if (g.node_count() == 0) throw InvalidArgument("average degree of an empty graph");
  return 2.0 * static_cast<double>(g.edge_count()) / static_cast<double>(g.node_count());
}

struct Homophily {
  std::vector<std::optional<double>> per_node;  // empty for isolated nodes
  std::optional<double> average;                // empty when every node is isolated
};

/// Fraction of each node's neighbors sharing its label; averaged over
/// non-isolated nodes.
inline Homophily LabelHomophily(const Graph& g) {
  Homophily h;
  h.per_node.resize(g.node_count());
  double sum = 0.0;
  std::size_t defined = 0;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    const auto nbrs = g.neighbors(v);
    if (nbrs.empty()) continue;
    std::size_t same = 0;
    for (NodeId u : nbrs) same += g.label(u) == g.label(v);
    const double frac = static_cast<double>(same) / static_cast<double>(nbrs.size());
    h.per_node[v] = frac;
    sum += frac;
    ++defined;
  }
  if (defined > 0) h.average = sum / static_cast<double>(defined);
  return h;
}

inline DatasetMeta DescribeGraph(const Graph& g, std::string name) {
  DatasetMeta m;
  m.name = std::move(name);
  m.node_count = g.node_count();
  m.edge_count = g.edge_count();
  m.num_classes = g.num_classes();
  m.feature_dim = g.feature_dim();
  m.avg_degree = g.node_count() ? AverageDegree(g) : 0.0;
  m.avg_homophily = LabelHomophily(g).average.value_or(0.0);
  return m;
}

inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

struct Subgraph {
  Graph graph;
  std::vector<NodeId> old_to_new;  // kNoNode for excluded nodes
  std::vector<NodeId> new_to_old;
};

/// Returns a membership mask; throws on out-of-range ids.
inline std::vector<char> NodeMask(std::size_t node_count, std::span<const NodeId> nodes) {
  std::vector<char> mask(node_count, 0);
  for (NodeId v : nodes) {
    if (v >= node_count) throw InvalidArgument("node id " + std::to_string(v) + " out of range");
    mask[v] = 1;
  }
  return mask;
}

/// Edges of `edges` with both endpoints inside `mask`.
inline EdgeList InducedEdges(const EdgeList& edges, const std::vector<char>& mask) {
  EdgeList out;
  for (const Edge& e : edges) {
    if (mask[e.u] && mask[e.v]) out.push_back(e);
  }
  return out;
}

/// Subgraph on `nodes`, re-indexed by ascending original id.
inline Subgraph InducedSubgraph(const Graph& g, std::span<const NodeId> nodes) {
  const auto mask = NodeMask(g.node_count(), nodes);
  Subgraph s;
  s.old_to_new.assign(g.node_count(), kNoNode);
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (!mask[v]) continue;
    s.old_to_new[v] = static_cast<NodeId>(s.new_to_old.size());
    s.new_to_old.push_back(v);
  }
  const std::size_t n = s.new_to_old.size();
  EdgeList edges;
  for (const Edge& e : g.edges()) {
    if (mask[e.u] && mask[e.v]) edges.push_back({s.old_to_new[e.u], s.old_to_new[e.v]});
  }
  Matrix x(static_cast<Eigen::Index>(n), g.features().cols());
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    x.row(static_cast<Eigen::Index>(i)) = g.features().row(s.new_to_old[i]);
    labels[i] = g.label(s.new_to_old[i]);
  }
  s.graph = Graph(n, std::move(edges), std::move(x), std::move(labels), g.num_classes());
  return s;
}

/// Nodes within `hops` of `v` (BFS), excluding `v`. Sorted ascending.
inline std::vector<NodeId> LHopNeighborhood(const Adjacency& adj, NodeId v, int hops) {
  if (v >= adj.node_count()) throw InvalidArgument("node id " + std::to_string(v) + " out of range");
  if (hops < 0) throw InvalidArgument("hop count must be >= 0");
  std::vector<NodeId> out;
  if (hops == 0) return out;
  std::vector<int> dist(adj.node_count(), -1);
  std::deque<NodeId> queue{v};
  dist[v] = 0;
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    if (dist[u] == hops) continue;
    for (NodeId w : adj.neighbors(u)) {
      if (dist[w] >= 0) continue;
      dist[w] = dist[u] + 1;
      out.push_back(w);
      queue.push_back(w);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<NodeId> LHopNeighborhood(const Graph& g, NodeId v, int hops) {
  return LHopNeighborhood(g.adjacency(), v, hops);
}

/// Erdos-Renyi G(n, p) with uniform(-1, 1) features and uniform labels.
inline Graph RandomGraph(std::size_t n, double edge_prob, std::size_t feature_dim, int num_classes,
                         std::uint64_t seed) {
  Rng rng(seed);
  EdgeList edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (rng.Uniform() < edge_prob) edges.push_back({u, v});
    }
  }
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(feature_dim));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.Uniform(-1.0, 1.0);
  }
  std::vector<int> labels(n);
  for (auto& y : labels) y = static_cast<int>(rng.UniformIndex(static_cast<std::uint64_t>(num_classes)));
  return Graph(n, std::move(edges), std::move(x), std::move(labels), num_classes);
}

}  // namespace gnnaudit
