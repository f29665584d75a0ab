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
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "gnnaudit/attack.hpp"
#include "gnnaudit/model.hpp"

namespace gnnaudit {

inline constexpr double kDivergenceFloor = 1e-12;
inline constexpr double kLogitEpsilon = 1e-6;

namespace detail {

inline std::vector<double> ClampRenormalize(std::span<const double> p) {
  std::vector<double> out(p.begin(), p.end());
  double sum = 0.0;
  for (double& v : out) {
    v = std::clamp(v, kDivergenceFloor, 1.0);
    sum += v;
  }
  for (double& v : out) v /= sum;
  return out;
}

}  // namespace detail

/// KL(p || q) in nats after clamping both inputs to [1e-12, 1] and
/// renormalizing.
inline double KlDivergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw InvalidArgument("KL: dimension mismatch");
  const auto a = detail::ClampRenormalize(p);
  const auto b = detail::ClampRenormalize(q);
  double kl = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) kl += a[i] * std::log(a[i] / b[i]);
  return std::max(kl, 0.0);
}

/// Jensen-Shannon divergence in nats, with 0 log 0 = 0. No clamping is
/// needed because the mixture is positive wherever either input is.
inline double JsDivergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw InvalidArgument("JS: dimension mismatch");
  // Separate sums keep JS(p, q) == JS(q, p) bit for bit.
  double kp = 0.0, kq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) kp += p[i] * std::log(p[i] / m);
    if (q[i] > 0.0) kq += q[i] * std::log(q[i] / m);
  }
  return std::clamp(0.5 * (kp + kq), 0.0, std::numbers::ln2);
}

inline std::vector<double> Row(const Matrix& m, Eigen::Index i) {
  return {m.row(i).data(), m.row(i).data() + m.cols()};
}

/// ln(p / (1 - p)) with p clamped to [1e-6, 1 - 1e-6].
inline double LogitTransform(double p) {
  p = std::clamp(p, kLogitEpsilon, 1.0 - kLogitEpsilon);
  return std::log(p / (1.0 - p));
}

inline double Sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Percentage decrease of test accuracy relative to train accuracy.
inline double PerformanceGap(double train_acc, double test_acc) {
  if (train_acc == 0.0) throw InvalidArgument("performance gap undefined for zero train accuracy");
  return (train_acc - test_acc) / train_acc * 100.0;
}

/// Empirical CDF: distinct sorted values with the fraction of samples <= each.
struct Ecdf {
  std::vector<double> values;
  std::vector<double> cumulative;

  double At(double x) const {
    const auto it = std::upper_bound(values.begin(), values.end(), x);
    if (it == values.begin()) return 0.0;
    return cumulative[static_cast<std::size_t>(it - values.begin()) - 1];
  }
};

inline Ecdf MakeEcdf(std::vector<double> samples) {
  Ecdf e;
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i + 1 < samples.size() && samples[i + 1] == samples[i]) continue;
    e.values.push_back(samples[i]);
    e.cumulative.push_back(static_cast<double>(i + 1) / n);
  }
  return e;
}

/// Equal-width bins over [lo, hi]; the last bin is closed.
struct Histogram {
  std::vector<double> edges;  // bins + 1
  std::vector<std::size_t> counts;
};

inline constexpr int kHistogramBins = 50;

inline Histogram MakeHistogram(std::span<const double> values, double lo, double hi, int bins = kHistogramBins) {
  if (!(hi > lo)) hi = lo + 1.0;
  Histogram h;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  const double width = (hi - lo) / bins;
  for (int b = 0; b <= bins; ++b) h.edges.push_back(b == bins ? hi : lo + width * b);
  for (double v : values) {
    auto b = static_cast<int>((v - lo) / width);
    b = std::clamp(b, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

struct NeighborJsRecord {
  NodeId node_id = 0;
  double mean_js = 0.0;
};

struct NeighborJsProfile {
  std::vector<NeighborJsRecord> records;  // ascending node id, isolated nodes omitted
  Ecdf ecdf;
};

/// Per-node mean JS divergence between a node's posterior and those of its
/// neighbors under `edges` (normally the split's train + test edges).
inline NeighborJsProfile NeighborJsProfileOf(const PosteriorTable& t, const EdgeList& edges) {
  const Adjacency adj(t.size(), edges);
  NeighborJsProfile out;
  std::vector<double> values;
  for (NodeId v = 0; v < t.size(); ++v) {
    const auto nbrs = adj.neighbors(v);
    if (nbrs.empty()) continue;
    const auto pv = Row(t.probs, v);
    double sum = 0.0;
    for (NodeId u : nbrs) sum += JsDivergence(pv, Row(t.probs, u));
    const double mean = sum / static_cast<double>(nbrs.size());
    out.records.push_back({v, mean});
    values.push_back(mean);
  }
  out.ecdf = MakeEcdf(std::move(values));
  return out;
}

struct DivergenceRecord {
  NodeId node_id = 0;
  double kl = 0.0;
  bool member = false;
};

struct KlProfile {
  std::vector<DivergenceRecord> records;  // every node, ascending id
  Histogram members;
  Histogram nonmembers;  // same bin edges as `members`
};

/// KL between the posteriors of each node under two views of the same
/// frozen model.
inline KlProfile KlProfileOf(const PosteriorTable& a, const PosteriorTable& b, const std::vector<char>& member) {
  if (a.size() != b.size()) throw InvalidArgument("posterior tables cover different node sets");
  KlProfile out;
  std::vector<double> mv, nv;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (NodeId v = 0; v < a.size(); ++v) {
    const double kl = KlDivergence(Row(a.probs, v), Row(b.probs, v));
    out.records.push_back({v, kl, member[v] != 0});
    (member[v] ? mv : nv).push_back(kl);
    lo = std::min(lo, kl);
    hi = std::max(hi, kl);
  }
  if (out.records.empty()) lo = hi = 0.0;
  out.members = MakeHistogram(mv, lo, hi);
  out.nonmembers = MakeHistogram(nv, lo, hi);
  return out;
}

inline KlProfile RegimeKlProfile(const ModelParams& params, const Graph& g, const Split& split, Regime regime_a,
                                 Regime regime_b) {
  const auto a = Infer(params, g, split, regime_a);
  const auto b = regime_a == regime_b ? a : Infer(params, g, split, regime_b);
  return KlProfileOf(a, b, split.TrainMask());
}

struct LogitRecord {
  NodeId node_id = 0;
  double logit = 0.0;  // log-odds of the true-class posterior
  bool member = false;
};

struct LogitProfile {
  std::vector<LogitRecord> records;
  Histogram members;
  Histogram nonmembers;
  /// Scalar separability summary: threshold-max TPR - FPR of the logit
  /// score between members and non-members.
  double separability = 0.0;
};

inline LogitProfile LogitProfileOf(const PosteriorTable& t, const std::vector<char>& member) {
  LogitProfile out;
  std::vector<double> mv, nv, all;
  std::vector<char> flags;
  for (NodeId v = 0; v < t.size(); ++v) {
    const double z = LogitTransform(t.probs(v, t.labels[v]));
    out.records.push_back({v, z, member[v] != 0});
    (member[v] ? mv : nv).push_back(z);
    all.push_back(z);
    flags.push_back(member[v]);
  }
  const double lo = all.empty() ? 0.0 : *std::min_element(all.begin(), all.end());
  const double hi = all.empty() ? 0.0 : *std::max_element(all.begin(), all.end());
  out.members = MakeHistogram(mv, lo, hi);
  out.nonmembers = MakeHistogram(nv, lo, hi);
  if (!mv.empty() && !nv.empty()) out.separability = MembershipAdvantage(all, flags).advantage;
  return out;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
};

/// Mean and sample standard deviation (n - 1 denominator, 0 for n = 1).
inline MeanStd Summarize(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("cannot aggregate an empty group");
  MeanStd m;
  m.n = values.size();
  for (double v : values) m.mean += v;
  m.mean /= static_cast<double>(m.n);
  if (m.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(m.n - 1));
  }
  return m;
}

}  // namespace gnnaudit
