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
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "gnnaudit/common.hpp"
#include "gnnaudit/model.hpp"

namespace gnnaudit {

enum class Membership : int { kMember = 0, kNonMember = 1 };

inline constexpr double kLossFeatureCap = 50.0;

/// Attack input: the target's posterior concatenated with its clamped
/// cross-entropy loss.
struct AttackExample {
  std::vector<double> features;
  Membership label = Membership::kMember;
  NodeId node_id = 0;
  int class_label = 0;
};

struct AttackDataset {
  std::vector<AttackExample> examples;
  std::size_t member_pool = 0;      // before balancing
  std::size_t nonmember_pool = 0;
  bool balanced = false;
};

inline AttackExample MakeAttackExample(const PosteriorTable& t, NodeId v, Membership m) {
  AttackExample ex;
  ex.node_id = v;
  ex.label = m;
  ex.class_label = t.labels[v];
  const auto row = t.probs.row(v);
  ex.features.assign(row.data(), row.data() + row.size());
  ex.features.push_back(std::clamp(t.losses[v], 0.0, kLossFeatureCap));
  return ex;
}

/// Members first, then non-members, each in ascending node order. With
/// `balance`, the larger pool is subsampled uniformly to the smaller one's
/// size (at the usual split sizes that is the non-member pool).
inline AttackDataset BuildAttackDataset(const PosteriorTable& t, std::span<const NodeId> members,
                                        std::span<const NodeId> nonmembers, bool balance,
                                        std::uint64_t seed) {
  if (members.empty() || nonmembers.empty()) {
    throw InvalidArgument("attack dataset needs at least one member and one non-member");
  }
  AttackDataset d;
  d.member_pool = members.size();
  d.nonmember_pool = nonmembers.size();
  d.balanced = balance;
  std::vector<NodeId> m(members.begin(), members.end());
  std::vector<NodeId> n(nonmembers.begin(), nonmembers.end());
  if (balance) {
    Rng rng(seed);
    const std::size_t size = std::min(m.size(), n.size());
    if (m.size() > size) m = rng.SampleWithoutReplacement(std::move(m), size);
    if (n.size() > size) n = rng.SampleWithoutReplacement(std::move(n), size);
    std::sort(m.begin(), m.end());
    std::sort(n.begin(), n.end());
  }
  for (NodeId v : m) d.examples.push_back(MakeAttackExample(t, v, Membership::kMember));
  for (NodeId v : n) d.examples.push_back(MakeAttackExample(t, v, Membership::kNonMember));
  return d;
}

struct AttackTrial {
  std::vector<AttackExample> train_examples;
  std::vector<AttackExample> eval_examples;
  std::uint64_t trial_seed = 0;
};

/// Gives the attacker the labels of `train_fraction` of the members and of
/// the non-members. Within each membership group the train share is
/// apportioned across target classes (largest remainder) so tiny pools are
/// not skewed toward one class.
inline AttackTrial MakeAttackTrial(const std::vector<AttackExample>& examples, std::uint64_t seed,
                                   double train_fraction = 0.8) {
  AttackTrial trial;
  trial.trial_seed = seed;
  Rng rng(seed);
  for (Membership group : {Membership::kMember, Membership::kNonMember}) {
    std::map<int, std::vector<std::size_t>> by_class;
    std::size_t total = 0;
    for (std::size_t i = 0; i < examples.size(); ++i) {
      if (examples[i].label != group) continue;
      by_class[examples[i].class_label].push_back(i);
      ++total;
    }
    if (total == 0) continue;
    auto want = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(total)));
    if (total >= 2) want = std::min(want, total - 1);  // keep both groups in the eval set
    std::vector<std::size_t> take;
    std::vector<std::pair<double, int>> remainders;
    std::size_t assigned = 0;
    for (auto& [cls, idx] : by_class) {
      const double exact = train_fraction * static_cast<double>(idx.size());
      const auto base = static_cast<std::size_t>(std::floor(exact));
      take.push_back(base);
      assigned += base;
      remainders.push_back({exact - static_cast<double>(base), cls});
    }
    std::vector<std::size_t> order(remainders.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainders[a].first > remainders[b].first; });
    for (std::size_t k = 0; assigned < want && k < order.size(); ++k, ++assigned) ++take[order[k]];
    std::size_t c = 0;
    for (auto& [cls, idx] : by_class) {
      rng.Shuffle(idx);
      for (std::size_t i = 0; i < idx.size(); ++i) {
        (i < take[c] ? trial.train_examples : trial.eval_examples).push_back(examples[idx[i]]);
      }
      ++c;
    }
  }
  return trial;
}

struct AttackConfig {
  int hidden_dim = 64;
  double learning_rate = 0.001;
  int epochs = 300;
  double weight_decay = 0.0;
  bool balance = true;
};

/// Two-layer perceptron: standardize -> dense -> ReLU -> dense -> sigmoid.
/// The output is the probability that the input belongs to a member.
struct AttackModel {
  Vector mean;
  Vector scale;
  Matrix w1;  // in x hidden
  Matrix b1;  // 1 x hidden
  Matrix w2;  // hidden x 1
  double b2 = 0.0;

  std::vector<double> Score(const std::vector<AttackExample>& xs) const {
    std::vector<double> out;
    out.reserve(xs.size());
    for (const auto& ex : xs) {
      Matrix x(1, static_cast<Eigen::Index>(ex.features.size()));
      for (std::size_t j = 0; j < ex.features.size(); ++j) {
        x(0, static_cast<Eigen::Index>(j)) = (ex.features[j] - mean[static_cast<Eigen::Index>(j)]) /
                                             scale[static_cast<Eigen::Index>(j)];
      }
      const Matrix h = (x * w1 + b1).cwiseMax(0.0);
      const double z = (h * w2)(0, 0) + b2;
      out.push_back(1.0 / (1.0 + std::exp(-z)));
    }
    return out;
  }
};

namespace detail {

inline Matrix AttackInputs(const std::vector<AttackExample>& xs, const Vector& mean, const Vector& scale) {
  Matrix x(static_cast<Eigen::Index>(xs.size()), mean.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (Eigen::Index j = 0; j < mean.size(); ++j) {
      x(static_cast<Eigen::Index>(i), j) = (xs[i].features[static_cast<std::size_t>(j)] - mean[j]) / scale[j];
    }
  }
  return x;
}

}  // namespace detail

/// Full-batch Adam on binary cross-entropy (member = 1). The output layer
/// starts at zero, so an untrained attacker scores every input 0.5.
inline AttackModel TrainAttack(const AttackTrial& trial, const AttackConfig& cfg) {
  const auto& xs = trial.train_examples;
  if (xs.empty()) throw InvalidArgument("attack trial has no training examples");
  const auto dim = static_cast<Eigen::Index>(xs.front().features.size());
  AttackModel model;
  model.mean = Vector::Zero(dim);
  model.scale = Vector::Ones(dim);
  for (const auto& ex : xs) {
    for (Eigen::Index j = 0; j < dim; ++j) model.mean[j] += ex.features[static_cast<std::size_t>(j)];
  }
  model.mean /= static_cast<double>(xs.size());
  Vector var = Vector::Zero(dim);
  for (const auto& ex : xs) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double d = ex.features[static_cast<std::size_t>(j)] - model.mean[j];
      var[j] += d * d;
    }
  }
  for (Eigen::Index j = 0; j < dim; ++j) {
    const double sd = std::sqrt(var[j] / static_cast<double>(xs.size()));
    model.scale[j] = sd > 1e-12 ? sd : 1.0;
  }

  const auto h = static_cast<Eigen::Index>(cfg.hidden_dim);
  Rng rng(DeriveSeed(trial.trial_seed, "attack-init"));
  const double limit = std::sqrt(6.0 / static_cast<double>(dim + h));
  model.w1.resize(dim, h);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < h; ++j) model.w1(i, j) = rng.Uniform(-limit, limit);
  }
  model.b1 = Matrix::Zero(1, h);
  model.w2 = Matrix::Zero(h, 1);
  model.b2 = 0.0;

  const Matrix x = detail::AttackInputs(xs, model.mean, model.scale);
  Vector y(x.rows());
  for (std::size_t i = 0; i < xs.size(); ++i) y[static_cast<Eigen::Index>(i)] = xs[i].label == Membership::kMember;
  const double n = static_cast<double>(x.rows());

  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  Matrix m_w1 = Matrix::Zero(dim, h), v_w1 = m_w1, m_b1 = Matrix::Zero(1, h), v_b1 = m_b1;
  Matrix m_w2 = Matrix::Zero(h, 1), v_w2 = m_w2;
  double m_b2 = 0.0, v_b2 = 0.0, p1 = 1.0, p2 = 1.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const Matrix pre = (x * model.w1).rowwise() + model.b1.row(0);
    const Matrix hid = pre.cwiseMax(0.0);
    const Vector z = (hid * model.w2).col(0).array() + model.b2;
    const Vector p = (1.0 + (-z.array()).exp()).inverse();
    double loss = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      // log(1 + e^z) - y z, stable in both tails
      loss += std::max(z[i], 0.0) + std::log1p(std::exp(-std::abs(z[i]))) - y[i] * z[i];
    }
    if (!std::isfinite(loss)) throw Divergence("non-finite attack loss at epoch " + std::to_string(epoch), epoch);
    const Vector dz = (p - y) / n;
    Matrix g_w2 = hid.transpose() * dz;
    double g_b2 = dz.sum();
    const Matrix d_hid = dz * model.w2.transpose();
    const Matrix d_pre = (pre.array() > 0.0).cast<double>().matrix().cwiseProduct(d_hid);
    Matrix g_w1 = x.transpose() * d_pre;
    Matrix g_b1 = d_pre.colwise().sum();
    if (cfg.weight_decay > 0.0) {
      g_w1 += cfg.weight_decay * model.w1;
      g_w2 += cfg.weight_decay * model.w2;
    }
    p1 *= kBeta1;
    p2 *= kBeta2;
    const double lr = cfg.learning_rate / (1.0 - p1);
    auto step = [&](Matrix& w, Matrix& m, Matrix& v, const Matrix& g) {
      m = kBeta1 * m + (1.0 - kBeta1) * g;
      v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseProduct(g);
      w.array() -= lr * m.array() / ((v.array() / (1.0 - p2)).sqrt() + kEps);
    };
    step(model.w1, m_w1, v_w1, g_w1);
    step(model.b1, m_b1, v_b1, g_b1);
    step(model.w2, m_w2, v_w2, g_w2);
    m_b2 = kBeta1 * m_b2 + (1.0 - kBeta1) * g_b2;
    v_b2 = kBeta2 * v_b2 + (1.0 - kBeta2) * g_b2 * g_b2;
    model.b2 -= lr * m_b2 / (std::sqrt(v_b2 / (1.0 - p2)) + kEps);
  }
  return model;
}

struct RocPoint {
  double threshold = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
};

struct AdvantageReport {
  double advantage = 0.0;
  double best_threshold = 0.0;
  double tpr_at_best = 0.0;
  double fpr_at_best = 0.0;
  std::vector<RocPoint> roc_points;  // thresholds descending, +inf first
};

/// Max over thresholds of TPR - FPR, where a score >= threshold predicts
/// "member". Thresholds are +inf, every distinct score, and -inf; ties go to
/// the smallest threshold reaching the maximum.
inline AdvantageReport MembershipAdvantage(std::span<const double> scores, std::span<const char> is_member) {
  if (scores.size() != is_member.size()) throw InvalidArgument("scores and labels differ in length");
  for (double s : scores) {
    if (std::isnan(s)) throw InvalidArgument("NaN attack score");
  }
  std::int64_t members = 0;
  for (char m : is_member) members += m != 0;
  const auto nonmembers = static_cast<std::int64_t>(scores.size()) - members;
  if (members == 0 || nonmembers == 0) {
    throw InvalidArgument("membership advantage needs both members and non-members");
  }
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  AdvantageReport r;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::int64_t tp = 0, fp = 0;
  // Compare tp/M - fp/N exactly as tp*N - fp*M.
  std::int64_t best = 0;
  r.best_threshold = kInf;
  r.roc_points.push_back({kInf, 0.0, 0.0});
  auto consider = [&](double thr) {
    const double tpr = static_cast<double>(tp) / static_cast<double>(members);
    const double fpr = static_cast<double>(fp) / static_cast<double>(nonmembers);
    r.roc_points.push_back({thr, tpr, fpr});
    const std::int64_t gain = tp * nonmembers - fp * members;
    if (gain >= best) {
      best = gain;
      r.best_threshold = thr;
      r.tpr_at_best = tpr;
      r.fpr_at_best = fpr;
    }
  };
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    while (k < order.size() && scores[order[k]] == s) {
      (is_member[order[k]] ? tp : fp) += 1;
      ++k;
    }
    consider(s);
  }
  consider(-kInf);
  r.advantage = static_cast<double>(best) / static_cast<double>(members * nonmembers);
  return r;
}

struct TrialOutcome {
  AdvantageReport report;
  std::size_t train_size = 0;
  std::size_t eval_size = 0;
};

/// Builds the attack set from one posterior table, splits it 80/20, trains
/// the attacker and measures its advantage on the held-out 20%.
inline TrialOutcome RunAttackTrial(const PosteriorTable& t, std::span<const NodeId> members,
                                   std::span<const NodeId> nonmembers, const AttackConfig& cfg,
                                   std::uint64_t trial_seed) {
  const AttackDataset d =
      BuildAttackDataset(t, members, nonmembers, cfg.balance, DeriveSeed(trial_seed, "balance"));
  const AttackTrial trial = MakeAttackTrial(d.examples, trial_seed);
  const AttackModel model = TrainAttack(trial, cfg);
  const auto scores = model.Score(trial.eval_examples);
  std::vector<char> flags;
  for (const auto& ex : trial.eval_examples) flags.push_back(ex.label == Membership::kMember);
  TrialOutcome out;
  out.report = MembershipAdvantage(scores, flags);
  out.train_size = trial.train_examples.size();
  out.eval_size = trial.eval_examples.size();
  return out;
}

}  // namespace gnnaudit
