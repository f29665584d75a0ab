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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "gnnaudit/common.hpp"
#include "gnnaudit/graph.hpp"

namespace gnnaudit {

namespace fs = std::filesystem;

inline std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Atomically replaces `path` with `contents`.
inline void WriteFile(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw InvalidArgument("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

/// Calls `fn(line_number, line)` for each non-empty line.
template <typename Fn>
void ForEachLine(std::string_view text, Fn&& fn) {
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    if (!line.empty()) fn(line_no, line);
    start = end + 1;
  }
}

struct LoadedDataset {
  Graph graph;
  std::string name;
};

/// Reads a canonical dataset directory: meta.json, edges.csv, features.csv,
/// labels.csv. Duplicate and reversed edge rows collapse to one undirected
/// edge; self-loop rows are an error.
inline LoadedDataset LoadDataset(const fs::path& dir) {
  for (const char* f : {"meta.json", "edges.csv", "features.csv", "labels.csv"}) {
    if (!fs::exists(dir / f)) throw InvalidArgument("missing file " + (dir / f).string());
  }
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(ReadFile(dir / "meta.json"));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("meta.json: " + std::string(e.what()));
  }
  const auto node_count = meta.at("node_count").get<std::size_t>();
  const auto feature_dim = meta.at("feature_dim").get<std::size_t>();
  const auto num_classes = meta.at("num_classes").get<int>();

  EdgeList edges;
  ForEachLine(ReadFile(dir / "edges.csv"), [&](std::size_t ln, std::string_view line) {
    const auto f = SplitFields(line);
    if (f.size() != 2) throw InvalidArgument("edges.csv:" + std::to_string(ln) + ": expected u,v");
    const auto u = ParseInt<NodeId>(f[0]);
    const auto v = ParseInt<NodeId>(f[1]);
    if (u == v) {
      throw InvalidArgument("edges.csv:" + std::to_string(ln) + ": self-loop " + std::to_string(u));
    }
    if (u >= node_count || v >= node_count) {
      throw InvalidArgument("edges.csv:" + std::to_string(ln) + ": node id out of range");
    }
    edges.push_back(MakeEdge(u, v));
  });
  Canonicalize(edges);

  Matrix x(static_cast<Eigen::Index>(node_count), static_cast<Eigen::Index>(feature_dim));
  std::size_t rows = 0;
  ForEachLine(ReadFile(dir / "features.csv"), [&](std::size_t ln, std::string_view line) {
    if (rows >= node_count) throw InvalidArgument("features.csv: more rows than node_count");
    const auto f = SplitFields(line);
    if (f.size() != feature_dim) {
      throw InvalidArgument("features.csv:" + std::to_string(ln) + ": expected " +
                            std::to_string(feature_dim) + " columns, got " + std::to_string(f.size()));
    }
    for (std::size_t j = 0; j < feature_dim; ++j) {
      try {
        x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(j)) = ParseDouble(f[j]);
      } catch (const InvalidArgument& e) {
        throw InvalidArgument("features.csv:" + std::to_string(ln) + ": " + e.what());
      }
    }
    ++rows;
  });
  if (rows != node_count) {
    throw InvalidArgument("features.csv: " + std::to_string(rows) + " rows, meta says " +
                          std::to_string(node_count));
  }

  std::vector<int> labels;
  ForEachLine(ReadFile(dir / "labels.csv"), [&](std::size_t ln, std::string_view line) {
    const int y = ParseInt<int>(line);
    if (y < 0 || y >= num_classes) {
      throw InvalidArgument("labels.csv:" + std::to_string(ln) + ": label " + std::to_string(y) +
                            " out of range");
    }
    labels.push_back(y);
  });
  if (labels.size() != node_count) {
    throw InvalidArgument("labels.csv: " + std::to_string(labels.size()) + " rows, meta says " +
                          std::to_string(node_count));
  }
  if (meta.contains("edge_count") && meta.at("edge_count").get<std::size_t>() != edges.size()) {
    throw InvalidArgument("edges.csv: " + std::to_string(edges.size()) +
                          " undirected edges, meta says " +
                          std::to_string(meta.at("edge_count").get<std::size_t>()));
  }
  LoadedDataset out;
  out.name = meta.value("name", dir.filename().string());
  out.graph = Graph(node_count, std::move(edges), std::move(x), std::move(labels), num_classes);
  return out;
}

inline Graph LoadGraph(const fs::path& dir) { return LoadDataset(dir).graph; }

inline void SaveGraph(const Graph& g, const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  nlohmann::ordered_json meta;
  meta["name"] = name;
  meta["node_count"] = g.node_count();
  meta["edge_count"] = g.edge_count();
  meta["num_classes"] = g.num_classes();
  meta["feature_dim"] = g.feature_dim();
  WriteFile(dir / "meta.json", meta.dump(2) + "\n");

  std::string text;
  for (const Edge& e : g.edges()) text += std::to_string(e.u) + "," + std::to_string(e.v) + "\n";
  WriteFile(dir / "edges.csv", text);

  text.clear();
  for (Eigen::Index i = 0; i < g.features().rows(); ++i) {
    for (Eigen::Index j = 0; j < g.features().cols(); ++j) {
      if (j) text += ',';
      text += FormatDouble(g.features()(i, j));
    }
    text += '\n';
  }
  WriteFile(dir / "features.csv", text);

  text.clear();
  for (int y : g.labels()) text += std::to_string(y) + "\n";
  WriteFile(dir / "labels.csv", text);
}

}  // namespace gnnaudit
