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
#include "gnnaudit/graph_io.hpp"
#include "gnnaudit/layers.hpp"

namespace gnnaudit::testing {

inline fs::path Fixture(const std::string& name) { return fs::path(GNNAUDIT_FIXTURES) / name; }

inline const std::vector<std::string>& SmallFixtures() {
  static const std::vector<std::string> names = {"triangle",  "path5",         "star7",
                                                 "edgeless",  "two_components", "complete5"};
  return names;
}

// Fresh empty directory under the system temp dir.
inline fs::path ScratchDir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gnnaudit_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

inline Matrix DenseAdjacency(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Matrix a = Matrix::Zero(n, n);
  for (const Edge& e : g.edges()) a(e.u, e.v) = a(e.v, e.u) = 1.0;
  return a;
}

// D^{-1/2} (A + I) D^{-1/2} X W with D the degree matrix of A + I.
inline Matrix DenseGcn(const Matrix& a, const Matrix& x, const Matrix& w) {
  const Matrix at = a + Matrix::Identity(a.rows(), a.cols());
  Vector d(at.rows());
  for (Eigen::Index i = 0; i < at.rows(); ++i) d[i] = 1.0 / std::sqrt(at.row(i).sum());
  return d.asDiagonal() * at * d.asDiagonal() * x * w;
}

// X W1 + D^{-1} A X W2; isolated rows of D^{-1} A are zero.
inline Matrix DenseSage(const Matrix& a, const Matrix& x, const Matrix& w1, const Matrix& w2) {
  Matrix mean = a;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double deg = a.row(i).sum();
    if (deg > 0) mean.row(i) /= deg;
  }
  return x * w1 + mean * x * w2;
}

// Explicit per-node softmax over {i} plus neighbors, heads concatenated.
inline Matrix DenseGat(const Matrix& a, const Matrix& x, const std::vector<GatHeadParams>& heads) {
  const auto n = x.rows();
  std::vector<Matrix> outs;
  Eigen::Index total = 0;
  for (const auto& hp : heads) {
    const Matrix h = x * hp.w;
    Matrix z = Matrix::Zero(n, h.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
      std::vector<Eigen::Index> att{i};
      for (Eigen::Index j = 0; j < n; ++j) {
        if (a(i, j) != 0.0) att.push_back(j);
      }
      std::vector<double> e;
      for (auto j : att) {
        const double s = (hp.a_src * h.row(i).transpose())(0, 0) + (hp.a_dst * h.row(j).transpose())(0, 0);
        e.push_back(s > 0 ? s : 0.2 * s);
      }
      double denom = 0.0;
      for (double v : e) denom += std::exp(v);
      for (std::size_t k = 0; k < att.size(); ++k) z.row(i) += std::exp(e[k]) / denom * h.row(att[k]);
    }
    total += z.cols();
    outs.push_back(std::move(z));
  }
  Matrix out(n, total);
  Eigen::Index col = 0;
  for (const auto& z : outs) {
    out.middleCols(col, z.cols()) = z;
    col += z.cols();
  }
  return out;
}

inline Matrix RandomMatrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.Uniform(-1.0, 1.0);
  }
  return m;
}

}  // namespace gnnaudit::testing
