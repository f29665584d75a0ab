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

#include <cstring>
#include <string>
#include <vector>

#include "gnnaudit/graph_io.hpp"
#include "gnnaudit/model.hpp"

namespace gnnaudit {

// Checkpoint layout (all integers unsigned little-endian, reals IEEE-754
// binary64 little-endian):
//   magic      8 bytes  "GNNAUDT1"
//   arch       u64      0 = gcn, 1 = sage, 2 = gat
//   in_dim     u64
//   hidden_dim u64
//   classes    u64
//   heads      u64
//   init_seed  u64
//   tensors    u64      count, then per tensor:
//     rows u64, cols u64, rows*cols f64 in row-major order
inline constexpr char kCheckpointMagic[8] = {'G', 'N', 'N', 'A', 'U', 'D', 'T', '1'};

namespace detail {

inline void PutU64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void PutF64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  PutU64(out, bits);
}

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::uint64_t U64() {
    if (pos_ + 8 > data_.size()) throw InvalidArgument("checkpoint truncated");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)]);
    pos_ += 8;
    return v;
  }

  double F64() {
    const std::uint64_t bits = U64();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }

  std::string_view Bytes(std::size_t n) {
    if (pos_ + n > data_.size()) throw InvalidArgument("checkpoint truncated");
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool AtEnd() const { return pos_ == data_.size(); }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string SerializeParams(const ModelParams& p) {
  std::string out(kCheckpointMagic, sizeof kCheckpointMagic);
  detail::PutU64(out, static_cast<std::uint64_t>(p.arch));
  detail::PutU64(out, p.in_dim);
  detail::PutU64(out, p.hidden_dim);
  detail::PutU64(out, p.num_classes);
  detail::PutU64(out, p.heads);
  detail::PutU64(out, p.init_seed);
  detail::PutU64(out, p.tensors.size());
  for (const auto& t : p.tensors) {
    detail::PutU64(out, static_cast<std::uint64_t>(t.rows()));
    detail::PutU64(out, static_cast<std::uint64_t>(t.cols()));
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      for (Eigen::Index j = 0; j < t.cols(); ++j) detail::PutF64(out, t(i, j));
    }
  }
  return out;
}

inline ModelParams ParseParams(std::string_view data) {
  detail::ByteReader r(data);
  if (r.Bytes(8) != std::string_view(kCheckpointMagic, 8)) throw InvalidArgument("not a model checkpoint");
  ModelParams p;
  const auto arch = r.U64();
  if (arch > 2) throw InvalidArgument("checkpoint: unknown architecture");
  p.arch = static_cast<Arch>(arch);
  p.in_dim = r.U64();
  p.hidden_dim = r.U64();
  p.num_classes = r.U64();
  p.heads = r.U64();
  p.init_seed = r.U64();
  const auto count = r.U64();
  const auto shapes = ParamShapes(ConfigOf(p), p.in_dim, p.num_classes);
  if (count != shapes.size()) throw InvalidArgument("checkpoint: tensor count does not match header");
  for (std::uint64_t k = 0; k < count; ++k) {
    const auto rows = static_cast<Eigen::Index>(r.U64());
    const auto cols = static_cast<Eigen::Index>(r.U64());
    if (rows != shapes[k].first || cols != shapes[k].second) {
      throw InvalidArgument("checkpoint: tensor shape does not match header");
    }
    Matrix t(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) t(i, j) = r.F64();
    }
    p.tensors.push_back(std::move(t));
  }
  if (!r.AtEnd()) throw InvalidArgument("checkpoint: trailing bytes");
  return p;
}

inline void SaveParams(const ModelParams& p, const fs::path& path) { WriteFile(path, SerializeParams(p)); }
inline ModelParams LoadParams(const fs::path& path) { return ParseParams(ReadFile(path)); }

/// Posterior table plus the membership flag of every row.
struct PosteriorFile {
  std::vector<NodeId> node_ids;
  std::vector<char> member;
  PosteriorTable table;
};

/// CSV: node_id,label,member_flag,loss,p_0..p_{c-1}; reals in shortest
/// round-trip form so a reload reproduces the table exactly.
inline std::string SerializePosteriors(const PosteriorTable& t, const std::vector<char>& member) {
  std::string out = "node_id,label,member_flag,loss";
  for (Eigen::Index j = 0; j < t.probs.cols(); ++j) out += ",p_" + std::to_string(j);
  out += '\n';
  for (std::size_t v = 0; v < t.size(); ++v) {
    out += std::to_string(v) + "," + std::to_string(t.labels[v]) + "," + (member[v] ? "1" : "0") + "," +
           FormatDouble(t.losses[v]);
    for (Eigen::Index j = 0; j < t.probs.cols(); ++j) {
      out += ',';
      out += FormatDouble(t.probs(static_cast<Eigen::Index>(v), j));
    }
    out += '\n';
  }
  return out;
}

inline PosteriorFile ParsePosteriors(std::string_view text) {
  PosteriorFile f;
  std::size_t classes = 0;
  std::vector<std::vector<double>> rows;
  ForEachLine(text, [&](std::size_t ln, std::string_view line) {
    if (line.front() == '#') return;
    const auto fields = SplitFields(line);
    if (ln == 1 || fields[0] == "node_id") {
      if (fields.size() < 5) throw InvalidArgument("posteriors: header needs at least one class column");
      classes = fields.size() - 4;
      return;
    }
    if (fields.size() != classes + 4) {
      throw InvalidArgument("posteriors:" + std::to_string(ln) + ": wrong column count");
    }
    const auto id = ParseInt<NodeId>(fields[0]);
    if (id != f.node_ids.size()) {
      throw InvalidArgument("posteriors:" + std::to_string(ln) + ": node ids must run 0..n-1 in order");
    }
    f.node_ids.push_back(id);
    f.table.labels.push_back(ParseInt<int>(fields[1]));
    f.member.push_back(ParseInt<int>(fields[2]) != 0);
    f.table.losses.push_back(ParseDouble(fields[3]));
    std::vector<double> p(classes);
    for (std::size_t j = 0; j < classes; ++j) p[j] = ParseDouble(fields[4 + j]);
    rows.push_back(std::move(p));
  });
  f.table.probs.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(classes));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < classes; ++j) {
      f.table.probs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return f;
}

}  // namespace gnnaudit
