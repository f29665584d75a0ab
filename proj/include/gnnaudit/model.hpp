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

#include "gnnaudit/common.hpp"
#include "gnnaudit/graph.hpp"
#include "gnnaudit/layers.hpp"
#include "gnnaudit/sampling.hpp"

namespace gnnaudit {

enum class Arch { kGcn, kSage, kGat };

inline std::string ToString(Arch a) {
  switch (a) {
    case Arch::kGcn: return "gcn";
    case Arch::kSage: return "sage";
    case Arch::kGat: return "gat";
  }
  return "?";
}

inline Arch ParseArch(std::string_view s) {
  if (s == "gcn") return Arch::kGcn;
  if (s == "sage") return Arch::kSage;
  if (s == "gat") return Arch::kGat;
  throw InvalidArgument("unknown architecture '" + std::string(s) + "' (expected gcn|sage|gat)");
}

struct ModelConfig {
  Arch arch = Arch::kGcn;
  int hidden_dim = 64;
  int num_layers = 2;
  int gat_heads = 8;  // hidden layer only; the output layer has one head
  double dropout = 0.5;

  void Validate() const {
    if (hidden_dim < 1) throw InvalidArgument("hidden_dim must be >= 1");
    if (num_layers != 2) throw InvalidArgument("only 2-layer models are supported");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidArgument("dropout must lie in [0,1)");
    if (arch == Arch::kGat && (gat_heads < 1 || hidden_dim % gat_heads != 0)) {
      throw InvalidArgument("GAT hidden_dim must be divisible by gat_heads");
    }
  }
};

struct TrainConfig {
  double learning_rate = 0.01;
  double weight_decay = 5e-4;
  int epochs = 200;
  std::uint64_t init_seed = 0;

  void Validate() const {
    if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be > 0");
    if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
    if (weight_decay < 0.0) throw InvalidArgument("weight_decay must be >= 0");
  }
};

/// Learned weights. Tensor layout by architecture (row-vector convention,
/// z = x W):
///   gcn:  W0 [in x hidden], W1 [hidden x classes]
///   sage: W1_0, W2_0 [in x hidden], W1_1, W2_1 [hidden x classes]
///   gat:  per hidden head {W [in x hidden/heads], a_src, a_dst [1 x hidden/heads]},
///         then the output head {W [hidden x classes], a_src, a_dst [1 x classes]}
struct ModelParams {
  Arch arch = Arch::kGcn;
  std::size_t in_dim = 0;
  std::size_t hidden_dim = 0;
  std::size_t num_classes = 0;
  std::size_t heads = 1;
  std::uint64_t init_seed = 0;
  std::vector<Matrix> tensors;
};

inline std::vector<std::pair<Eigen::Index, Eigen::Index>> ParamShapes(const ModelConfig& cfg,
                                                                       std::size_t in_dim,
                                                                       std::size_t num_classes) {
  const auto f = static_cast<Eigen::Index>(in_dim);
  const auto h = static_cast<Eigen::Index>(cfg.hidden_dim);
  const auto c = static_cast<Eigen::Index>(num_classes);
  switch (cfg.arch) {
    case Arch::kGcn: return {{f, h}, {h, c}};
    case Arch::kSage: return {{f, h}, {f, h}, {h, c}, {h, c}};
    case Arch::kGat: {
      std::vector<std::pair<Eigen::Index, Eigen::Index>> shapes;
      const Eigen::Index per_head = h / cfg.gat_heads;
      for (int p = 0; p < cfg.gat_heads; ++p) {
        shapes.push_back({f, per_head});
        shapes.push_back({1, per_head});
        shapes.push_back({1, per_head});
      }
      shapes.push_back({h, c});
      shapes.push_back({1, c});
      shapes.push_back({1, c});
      return shapes;
    }
  }
  return {};
}

/// Glorot-uniform initialization of every tensor.
inline ModelParams InitParams(const ModelConfig& cfg, std::size_t in_dim, std::size_t num_classes,
                              std::uint64_t seed) {
  cfg.Validate();
  ModelParams p;
  p.arch = cfg.arch;
  p.in_dim = in_dim;
  p.hidden_dim = static_cast<std::size_t>(cfg.hidden_dim);
  p.num_classes = num_classes;
  p.heads = cfg.arch == Arch::kGat ? static_cast<std::size_t>(cfg.gat_heads) : 1;
  p.init_seed = seed;
  Rng rng(seed);
  for (auto [rows, cols] : ParamShapes(cfg, in_dim, num_classes)) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.Uniform(-limit, limit);
    }
    p.tensors.push_back(std::move(m));
  }
  return p;
}

inline ModelConfig ConfigOf(const ModelParams& p) {
  ModelConfig cfg;
  cfg.arch = p.arch;
  cfg.hidden_dim = static_cast<int>(p.hidden_dim);
  cfg.gat_heads = static_cast<int>(p.heads);
  return cfg;
}

/// Two-layer message-passing network: layer -> ReLU (-> dropout) -> layer.
/// Forward caches activations so Backward can return parameter gradients
/// in the ModelParams tensor layout.
class Network {
 public:
  explicit Network(const ModelParams& params) : params_(params) {
    if (params_.arch == Arch::kGat) {
      const std::size_t h = params_.heads;
      for (std::size_t p = 0; p < h; ++p) {
        hidden_heads_.push_back({params_.tensors[3 * p], params_.tensors[3 * p + 1],
                                 params_.tensors[3 * p + 2]});
      }
      output_head_.push_back({params_.tensors[3 * h], params_.tensors[3 * h + 1],
                              params_.tensors[3 * h + 2]});
    }
  }

  /// Logits for every row of `x`. With `dropout_rng`, inverted dropout at
  /// rate `dropout` is applied to the hidden layer.
  Matrix Forward(const Adjacency& adj, const Matrix& x, double dropout = 0.0,
                 Rng* dropout_rng = nullptr) {
    adj_ = &adj;
    x_ = &x;
    const auto& t = params_.tensors;
    switch (params_.arch) {
      case Arch::kGcn: hidden_pre_ = GcnLayer(x, adj, t[0]); break;
      case Arch::kSage:
        agg_x_ = detail::MeanAggregate(adj, x);
        hidden_pre_ = x * t[0] + agg_x_ * t[1];
        break;
      case Arch::kGat: hidden_pre_ = gat_hidden_.Forward(x, adj, hidden_heads_); break;
    }
    hidden_ = hidden_pre_.cwiseMax(0.0);
    mask_.resize(0, 0);
    if (dropout_rng != nullptr && dropout > 0.0) {
      mask_.resize(hidden_.rows(), hidden_.cols());
      const double keep = 1.0 / (1.0 - dropout);
      for (Eigen::Index i = 0; i < mask_.rows(); ++i) {
        for (Eigen::Index j = 0; j < mask_.cols(); ++j) {
          mask_(i, j) = dropout_rng->Uniform() < dropout ? 0.0 : keep;
        }
      }
      hidden_ = hidden_.cwiseProduct(mask_);
    }
    switch (params_.arch) {
      case Arch::kGcn: return GcnLayer(hidden_, adj, t[1]);
      case Arch::kSage:
        agg_hidden_ = detail::MeanAggregate(adj, hidden_);
        return hidden_ * t[2] + agg_hidden_ * t[3];
      case Arch::kGat: return gat_output_.Forward(hidden_, adj, output_head_);
    }
    return {};
  }

  /// Gradients of a scalar loss with respect to every parameter tensor,
  /// given dLoss/dLogits for the last Forward call.
  std::vector<Matrix> Backward(const Matrix& d_logits) const {
    const auto& t = params_.tensors;
    std::vector<Matrix> grads;
    for (const auto& m : t) grads.push_back(Matrix::Zero(m.rows(), m.cols()));
    Matrix d_hidden;
    switch (params_.arch) {
      case Arch::kGcn: {
        const Matrix dh1 = detail::GcnPropagate(*adj_, d_logits);
        grads[1] = hidden_.transpose() * dh1;
        d_hidden = dh1 * t[1].transpose();
        break;
      }
      case Arch::kSage: {
        grads[2] = hidden_.transpose() * d_logits;
        grads[3] = agg_hidden_.transpose() * d_logits;
        d_hidden = d_logits * t[2].transpose() +
                   detail::MeanAggregateAdjoint(*adj_, d_logits * t[3].transpose());
        break;
      }
      case Arch::kGat: {
        std::vector<GatHeadParams> g{ZeroLike(output_head_[0])};
        d_hidden = gat_output_.Backward(d_logits, output_head_, g, true);
        const std::size_t h = params_.heads;
        grads[3 * h] = g[0].w;
        grads[3 * h + 1] = g[0].a_src;
        grads[3 * h + 2] = g[0].a_dst;
        break;
      }
    }
    if (mask_.size() > 0) d_hidden = d_hidden.cwiseProduct(mask_);
    const Matrix d_pre = (hidden_pre_.array() > 0.0).cast<double>().matrix().cwiseProduct(d_hidden);
    switch (params_.arch) {
      case Arch::kGcn: grads[0] = x_->transpose() * detail::GcnPropagate(*adj_, d_pre); break;
      case Arch::kSage:
        grads[0] = x_->transpose() * d_pre;
        grads[1] = agg_x_.transpose() * d_pre;
        break;
      case Arch::kGat: {
        std::vector<GatHeadParams> g;
        for (const auto& hp : hidden_heads_) g.push_back(ZeroLike(hp));
        gat_hidden_.Backward(d_pre, hidden_heads_, g, false);
        for (std::size_t p = 0; p < g.size(); ++p) {
          grads[3 * p] = std::move(g[p].w);
          grads[3 * p + 1] = std::move(g[p].a_src);
          grads[3 * p + 2] = std::move(g[p].a_dst);
        }
        break;
      }
    }
    return grads;
  }

 private:
  static GatHeadParams ZeroLike(const GatHeadParams& p) {
    return {Matrix::Zero(p.w.rows(), p.w.cols()), Matrix::Zero(1, p.a_src.cols()),
            Matrix::Zero(1, p.a_dst.cols())};
  }

  const ModelParams& params_;
  std::vector<GatHeadParams> hidden_heads_;
  std::vector<GatHeadParams> output_head_;
  GatLayerOp gat_hidden_;
  GatLayerOp gat_output_;
  const Adjacency* adj_ = nullptr;
  const Matrix* x_ = nullptr;
  Matrix agg_x_;
  Matrix hidden_pre_;
  Matrix hidden_;
  Matrix agg_hidden_;
  Matrix mask_;
};

/// Per-node class posteriors and cross-entropy losses for one graph view.
struct PosteriorTable {
  Matrix probs;                // nodes x classes
  std::vector<double> losses;  // -log p_v[y_v]
  std::vector<int> labels;

  std::size_t size() const { return losses.size(); }

  int Predicted(NodeId v) const {
    Eigen::Index best = 0;
    probs.row(v).maxCoeff(&best);
    return static_cast<int>(best);
  }

  double Accuracy(std::span<const NodeId> nodes) const {
    if (nodes.empty()) return 0.0;
    std::size_t hit = 0;
    for (NodeId v : nodes) hit += Predicted(v) == labels[v];
    return static_cast<double>(hit) / static_cast<double>(nodes.size());
  }
};

/// Row-wise softmax and cross-entropy, max-subtracted.
inline PosteriorTable MakePosteriors(const Matrix& logits, std::span<const int> labels) {
  PosteriorTable t;
  t.probs.resize(logits.rows(), logits.cols());
  t.losses.resize(static_cast<std::size_t>(logits.rows()));
  t.labels.assign(labels.begin(), labels.end());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double peak = logits.row(i).maxCoeff();
    double denom = 0.0;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      t.probs(i, j) = std::exp(logits(i, j) - peak);
      denom += t.probs(i, j);
    }
    t.probs.row(i) /= denom;
    t.losses[static_cast<std::size_t>(i)] =
        std::log(denom) + peak - logits(i, labels[static_cast<std::size_t>(i)]);
  }
  return t;
}

/// Mean cross-entropy over all rows and its gradient w.r.t. the logits.
inline double MeanCrossEntropy(const Matrix& logits, std::span<const int> labels, Matrix* d_logits) {
  const PosteriorTable t = MakePosteriors(logits, labels);
  const double n = static_cast<double>(logits.rows());
  double loss = 0.0;
  for (double l : t.losses) loss += l;
  if (d_logits != nullptr) {
    *d_logits = t.probs;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) (*d_logits)(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
    *d_logits /= n;
  }
  return loss / n;
}

inline PosteriorTable Forward(const ModelParams& params, const Adjacency& adj, const Matrix& x,
                              std::span<const int> labels) {
  Network net(params);
  return MakePosteriors(net.Forward(adj, x), labels);
}

/// Training data restricted to the train side of a split: train node
/// features and train edges only, re-indexed to [0, |train|).
struct TrainGraph {
  Matrix x;
  std::vector<int> labels;
  Adjacency adj;
};

inline TrainGraph MakeTrainGraph(const Graph& g, const Split& split) {
  std::vector<NodeId> local(g.node_count(), kNoNode);
  TrainGraph tg;
  tg.x.resize(static_cast<Eigen::Index>(split.train_nodes.size()), g.features().cols());
  for (std::size_t i = 0; i < split.train_nodes.size(); ++i) {
    const NodeId v = split.train_nodes[i];
    local[v] = static_cast<NodeId>(i);
    tg.x.row(static_cast<Eigen::Index>(i)) = g.features().row(v);
    tg.labels.push_back(g.label(v));
  }
  EdgeList edges;
  for (const Edge& e : split.train_edges) {
    if (local[e.u] == kNoNode || local[e.v] == kNoNode) {
      throw InvalidArgument("train edge with an endpoint outside the train set");
    }
    edges.push_back(MakeEdge(local[e.u], local[e.v]));
  }
  tg.adj = Adjacency(split.train_nodes.size(), edges);
  return tg;
}

struct TrainResult {
  ModelParams params;
  double final_loss = 0.0;
};

/// Full-batch Adam on mean cross-entropy over the train graph. L2 weight
/// decay is added to the gradient.
inline TrainResult TrainOnGraph(const TrainGraph& tg, std::size_t num_classes, const ModelConfig& mcfg,
                                const TrainConfig& tcfg) {
  mcfg.Validate();
  tcfg.Validate();
  if (tg.labels.empty()) throw InvalidArgument("empty training set");
  TrainResult out;
  out.params = InitParams(mcfg, static_cast<std::size_t>(tg.x.cols()), num_classes, tcfg.init_seed);
  auto& tensors = out.params.tensors;
  std::vector<Matrix> m1, m2;
  for (const auto& t : tensors) {
    m1.push_back(Matrix::Zero(t.rows(), t.cols()));
    m2.push_back(Matrix::Zero(t.rows(), t.cols()));
  }
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  Rng dropout_rng(DeriveSeed(tcfg.init_seed, "dropout"));
  double b1 = 1.0, b2 = 1.0;
  for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
    Network net(out.params);
    const Matrix logits = net.Forward(tg.adj, tg.x, mcfg.dropout, &dropout_rng);
    Matrix d_logits;
    const double loss = MeanCrossEntropy(logits, tg.labels, &d_logits);
    if (!std::isfinite(loss)) {
      throw Divergence("non-finite training loss at epoch " + std::to_string(epoch), epoch);
    }
    out.final_loss = loss;
    auto grads = net.Backward(d_logits);
    b1 *= kBeta1;
    b2 *= kBeta2;
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      Matrix g = grads[i] + tcfg.weight_decay * tensors[i];
      m1[i] = kBeta1 * m1[i] + (1.0 - kBeta1) * g;
      m2[i] = kBeta2 * m2[i] + (1.0 - kBeta2) * g.cwiseProduct(g);
      const double lr = tcfg.learning_rate / (1.0 - b1);
      tensors[i].array() -= lr * m1[i].array() / ((m2[i].array() / (1.0 - b2)).sqrt() + kEps);
    }
  }
  return out;
}

/// Inductive training: reads only train nodes and train edges of `split`.
inline TrainResult Train(const Graph& g, const Split& split, const ModelConfig& mcfg,
                         const TrainConfig& tcfg) {
  return TrainOnGraph(MakeTrainGraph(g, split), static_cast<std::size_t>(g.num_classes()), mcfg, tcfg);
}

/// Posteriors for every node of `g` under the regime's edge set; dropout off.
inline PosteriorTable Infer(const ModelParams& params, const Graph& g, const Split& split, Regime regime) {
  if (params.in_dim != g.feature_dim() || params.num_classes != static_cast<std::size_t>(g.num_classes())) {
    throw InvalidArgument("model dimensions do not match the dataset");
  }
  const Adjacency adj = RegimeAdjacency(g, split, regime);
  return Forward(params, adj, g.features(), g.labels());
}

/// Compares analytic parameter gradients of the mean cross-entropy with
/// central finite differences (step 1e-5). Returns the maximum relative
/// error |a - n| / max(|a|, |n|, 1e-6) over all parameter entries.
inline double GradientCheck(const ModelConfig& cfg, const Graph& g, std::uint64_t probe_seed) {
  ModelParams params = InitParams(cfg, g.feature_dim(), static_cast<std::size_t>(g.num_classes()), probe_seed);
  const Adjacency& adj = g.adjacency();
  const auto& x = g.features();
  const auto& labels = g.labels();
  std::vector<Matrix> analytic;
  {
    Network net(params);
    Matrix d_logits;
    MeanCrossEntropy(net.Forward(adj, x), labels, &d_logits);
    analytic = net.Backward(d_logits);
  }
  auto loss_at = [&]() {
    Network net(params);
    return MeanCrossEntropy(net.Forward(adj, x), labels, nullptr);
  };
  constexpr double kStep = 1e-5;
  double worst = 0.0;
  for (std::size_t t = 0; t < params.tensors.size(); ++t) {
    Matrix& w = params.tensors[t];
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        const double saved = w(i, j);
        w(i, j) = saved + kStep;
        const double up = loss_at();
        w(i, j) = saved - kStep;
        const double down = loss_at();
        w(i, j) = saved;
        const double numeric = (up - down) / (2.0 * kStep);
        const double a = analytic[t](i, j);
        const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
        worst = std::max(worst, std::abs(a - numeric) / denom);
      }
    }
  }
  return worst;
}

}  // namespace gnnaudit
