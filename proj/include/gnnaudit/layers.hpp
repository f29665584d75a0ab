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
#include <string>
#include <vector>

#include "gnnaudit/graph.hpp"
#include "gnnaudit/sampling.hpp"

namespace gnnaudit {

/// Which edges message passing may use at inference time.
enum class Regime {
  kOrig,      // train-internal and test-internal edges
  kAllEdges,  // every edge, including train-test edges
  kNoGraph,   // no edges
};

inline std::string ToString(Regime r) {
  switch (r) {
    case Regime::kOrig: return "orig";
    case Regime::kAllEdges: return "all";
    case Regime::kNoGraph: return "none";
  }
  return "?";
}

inline Regime ParseRegime(std::string_view s) {
  if (s == "orig") return Regime::kOrig;
  if (s == "all") return Regime::kAllEdges;
  if (s == "none") return Regime::kNoGraph;
  throw InvalidArgument("unknown regime '" + std::string(s) + "' (expected orig|all|none)");
}

inline constexpr Regime kAllRegimes[] = {Regime::kOrig, Regime::kAllEdges, Regime::kNoGraph};

inline EdgeList ActiveEdges(const Graph& g, const Split& split, Regime regime) {
  switch (regime) {
    case Regime::kOrig: {
      EdgeList e = split.train_edges;
      e.insert(e.end(), split.test_edges.begin(), split.test_edges.end());
      Canonicalize(e);
      return e;
    }
    case Regime::kAllEdges: return g.edges();
    case Regime::kNoGraph: return {};
  }
  return {};
}

/// Adjacency over all nodes of `g` restricted to the regime's edges.
inline Adjacency RegimeAdjacency(const Graph& g, const Split& split, Regime regime) {
  return Adjacency(g.node_count(), ActiveEdges(g, split, regime));
}

namespace detail {

/// out_i = sum_{j in N(i) + i} h_j / sqrt(d_i d_j), d = degree + 1.
/// The operator is symmetric, so it is also its own adjoint.
inline Matrix GcnPropagate(const Adjacency& adj, const Matrix& h) {
  const auto n = static_cast<Eigen::Index>(adj.node_count());
  Vector inv_sqrt(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(adj.degree(static_cast<NodeId>(i)) + 1));
  }
  Matrix out(n, h.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double di = inv_sqrt[i];
    out.row(i) = (di * di) * h.row(i);
    for (NodeId j : adj.neighbors(static_cast<NodeId>(i))) out.row(i) += (di * inv_sqrt[j]) * h.row(j);
  }
  return out;
}

/// out_i = mean_{j in N(i)} h_j, zero for isolated nodes.
inline Matrix MeanAggregate(const Adjacency& adj, const Matrix& h) {
  const auto n = static_cast<Eigen::Index>(adj.node_count());
  Matrix out = Matrix::Zero(n, h.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto nbrs = adj.neighbors(static_cast<NodeId>(i));
    if (nbrs.empty()) continue;
    for (NodeId j : nbrs) out.row(i) += h.row(j);
    out.row(i) /= static_cast<double>(nbrs.size());
  }
  return out;
}

/// Adjoint of MeanAggregate: out_j = sum_{i in N(j)} g_i / |N(i)|.
inline Matrix MeanAggregateAdjoint(const Adjacency& adj, const Matrix& g) {
  const auto n = static_cast<Eigen::Index>(adj.node_count());
  Matrix out = Matrix::Zero(n, g.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto nbrs = adj.neighbors(static_cast<NodeId>(i));
    if (nbrs.empty()) continue;
    const double w = 1.0 / static_cast<double>(nbrs.size());
    for (NodeId j : nbrs) out.row(j) += w * g.row(i);
  }
  return out;
}

}  // namespace detail

inline constexpr double kLeakySlope = 0.2;

/// GCN propagation: z_i = W^T sum_{j in N(i)+i} x_j / sqrt(d_i d_j).
inline Matrix GcnLayer(const Matrix& x, const Adjacency& adj, const Matrix& w) {
  return detail::GcnPropagate(adj, x * w);
}

/// GraphSAGE mean aggregation: z_i = W1^T x_i + W2^T mean_{j in N(i)} x_j.
inline Matrix SageLayer(const Matrix& x, const Adjacency& adj, const Matrix& w1, const Matrix& w2) {
  return x * w1 + detail::MeanAggregate(adj, x) * w2;
}

/// Parameters of one attention head: projection plus the two halves of the
/// attention vector (source half scores x_i, neighbor half scores x_j).
struct GatHeadParams {
  Matrix w;      // in_dim x head_dim
  Matrix a_src;  // 1 x head_dim
  Matrix a_dst;  // 1 x head_dim
};

/// Multi-head graph attention. Every node attends over itself and its
/// neighbors with alpha_ij = softmax_j LeakyReLU(a^T [W x_i || W x_j]). The
/// caller applies the nonlinearity, so heads are concatenated pre-activation
/// (ReLU commutes with concatenation).
class GatLayerOp {
 public:
  Matrix Forward(const Matrix& x, const Adjacency& adj, const std::vector<GatHeadParams>& heads) {
    adj_ = &adj;
    x_ = x;
    heads_.clear();
    Eigen::Index total = 0;
    for (const auto& h : heads) total += h.w.cols();
    Matrix out(x.rows(), total);
    Eigen::Index col = 0;
    for (const auto& hp : heads) {
      HeadCache c;
      c.h = x * hp.w;
      const Vector s = c.h * hp.a_src.transpose();
      const Vector t = c.h * hp.a_dst.transpose();
      const auto n = x.rows();
      c.offsets.assign(static_cast<std::size_t>(n) + 1, 0);
      for (Eigen::Index i = 0; i < n; ++i) {
        c.offsets[static_cast<std::size_t>(i) + 1] =
            c.offsets[static_cast<std::size_t>(i)] + adj.degree(static_cast<NodeId>(i)) + 1;
      }
      c.pre.resize(c.offsets.back());
      c.alpha.resize(c.offsets.back());
      Matrix z = Matrix::Zero(n, hp.w.cols());
      for (Eigen::Index i = 0; i < n; ++i) {
        const std::size_t base = c.offsets[static_cast<std::size_t>(i)];
        std::size_t k = base;
        double peak = -std::numeric_limits<double>::infinity();
        ForEachAttended(static_cast<NodeId>(i), [&](NodeId j) {
          c.pre[k] = s[i] + t[j];
          const double e = c.pre[k] > 0 ? c.pre[k] : kLeakySlope * c.pre[k];
          c.alpha[k] = e;
          peak = std::max(peak, e);
          ++k;
        });
        double denom = 0.0;
        for (std::size_t q = base; q < k; ++q) {
          c.alpha[q] = std::exp(c.alpha[q] - peak);
          denom += c.alpha[q];
        }
        k = base;
        ForEachAttended(static_cast<NodeId>(i), [&](NodeId j) {
          c.alpha[k] /= denom;
          z.row(i) += c.alpha[k] * c.h.row(j);
          ++k;
        });
      }
      out.middleCols(col, z.cols()) = z;
      col += z.cols();
      heads_.push_back(std::move(c));
    }
    return out;
  }

  /// Accumulates parameter gradients into `grads` (same layout as the
  /// forward `heads`) and returns dL/dx when `want_input_grad`.
  Matrix Backward(const Matrix& d_out, const std::vector<GatHeadParams>& heads,
                  std::vector<GatHeadParams>& grads, bool want_input_grad) const {
    const auto n = x_.rows();
    Matrix dx;
    if (want_input_grad) dx = Matrix::Zero(n, x_.cols());
    Eigen::Index col = 0;
    for (std::size_t p = 0; p < heads.size(); ++p) {
      const auto& hp = heads[p];
      const auto& c = heads_[p];
      const Eigen::Index width = hp.w.cols();
      const Matrix dz = d_out.middleCols(col, width);
      col += width;
      Matrix dh = Matrix::Zero(n, width);
      Vector ds = Vector::Zero(n);
      Vector dt = Vector::Zero(n);
      std::vector<double> dalpha(c.alpha.size());
      for (Eigen::Index i = 0; i < n; ++i) {
        const std::size_t base = c.offsets[static_cast<std::size_t>(i)];
        std::size_t k = base;
        double weighted = 0.0;
        ForEachAttended(static_cast<NodeId>(i), [&](NodeId j) {
          dalpha[k] = dz.row(i).dot(c.h.row(j));
          dh.row(j) += c.alpha[k] * dz.row(i);
          weighted += c.alpha[k] * dalpha[k];
          ++k;
        });
        k = base;
        ForEachAttended(static_cast<NodeId>(i), [&](NodeId j) {
          const double de = c.alpha[k] * (dalpha[k] - weighted);
          const double dpre = c.pre[k] > 0 ? de : kLeakySlope * de;
          ds[i] += dpre;
          dt[j] += dpre;
          ++k;
        });
      }
      grads[p].a_src += ds.transpose() * c.h;
      grads[p].a_dst += dt.transpose() * c.h;
      dh += ds * hp.a_src;
      dh += dt * hp.a_dst;
      grads[p].w += x_.transpose() * dh;
      if (want_input_grad) dx += dh * hp.w.transpose();
    }
    return dx;
  }

  /// Attention coefficients of node i for head p, in self-then-neighbors order.
  std::vector<double> Attention(std::size_t head, NodeId i) const {
    const auto& c = heads_[head];
    return {c.alpha.begin() + static_cast<std::ptrdiff_t>(c.offsets[i]),
            c.alpha.begin() + static_cast<std::ptrdiff_t>(c.offsets[i + 1])};
  }

 private:
  struct HeadCache {
    Matrix h;
    std::vector<std::size_t> offsets;
    std::vector<double> pre;
    std::vector<double> alpha;
  };

  template <typename Fn>
  void ForEachAttended(NodeId i, Fn&& fn) const {
    fn(i);
    for (NodeId j : adj_->neighbors(i)) fn(j);
  }

  const Adjacency* adj_ = nullptr;
  Matrix x_;
  std::vector<HeadCache> heads_;
};

inline Matrix GatLayer(const Matrix& x, const Adjacency& adj, const std::vector<GatHeadParams>& heads) {
  GatLayerOp op;
  return op.Forward(x, adj, heads);
}

}  // namespace gnnaudit
