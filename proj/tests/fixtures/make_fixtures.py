# Copyright 2026 The gnnaudit Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Regenerates the canonical dataset fixtures in this directory.

The small graphs are hand-built; `planted` is a 4-block planted-partition
graph with class-centred Gaussian features, seeded so the output is stable.
"""

import json
import os

import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))


def write(name, n, edges, features, labels, num_classes):
    d = os.path.join(HERE, name)
    os.makedirs(d, exist_ok=True)
    edges = sorted({(min(u, v), max(u, v)) for u, v in edges})
    meta = {
        "name": name,
        "node_count": n,
        "edge_count": len(edges),
        "num_classes": num_classes,
        "feature_dim": len(features[0]),
    }
    with open(os.path.join(d, "meta.json"), "w") as f:
        json.dump(meta, f, indent=2)
        f.write("\n")
    with open(os.path.join(d, "edges.csv"), "w") as f:
        f.writelines(f"{u},{v}\n" for u, v in edges)
    with open(os.path.join(d, "features.csv"), "w") as f:
        f.writelines(",".join(repr(float(x)) for x in row) + "\n" for row in features)
    with open(os.path.join(d, "labels.csv"), "w") as f:
        f.writelines(f"{y}\n" for y in labels)


def onehot_features(n, dim=3):
    return [[1.0 if (i + j) % dim == 0 else 0.0 for j in range(dim)] for i in range(n)]


def main():
    write("triangle", 3, [(0, 1), (1, 2), (0, 2)], onehot_features(3), [0, 0, 1], 2)
    write("path5", 5, [(i, i + 1) for i in range(4)], onehot_features(5), [0, 0, 1, 1, 1], 2)
    write("star7", 7, [(0, i) for i in range(1, 7)], onehot_features(7), [0] * 7, 1)
    write("two_components", 6, [(0, 1), (1, 2), (0, 2), (3, 4)], onehot_features(6),
          [0, 0, 1, 1, 1, 0], 2)
    write("edgeless", 6, [], onehot_features(6), [0, 1, 0, 1, 0, 1], 2)
    write("complete5", 5, [(u, v) for u in range(5) for v in range(u + 1, 5)], onehot_features(5),
          [0, 1, 0, 1, 0], 2)

    rng = np.random.default_rng(20240611)
    n, classes, dim = 300, 4, 16
    labels = rng.integers(0, classes, size=n)
    centres = rng.normal(0.0, 1.0, size=(classes, dim))
    feats = np.round(centres[labels] * 0.6 + rng.normal(0.0, 1.0, size=(n, dim)), 4)
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            p = 0.04 if labels[u] == labels[v] else 0.003
            if rng.random() < p:
                edges.append((u, v))
    write("planted", n, edges, feats.tolist(), labels.tolist(), classes)


if __name__ == "__main__":
    main()
