#!/usr/bin/env python3
# Copyright 2026 The netquant Authors.
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

"""Convert the public Cora release (cora.content, cora.cites) to netquant files.

Writes edges.txt, features.csv and labels.csv into the output directory.
Nodes are numbered in cora.content order. The task is one-vs-rest: the
chosen class is positive, every other class negative.
"""

import argparse
import csv
import pathlib
import sys


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("source", type=pathlib.Path, help="directory holding cora.content and cora.cites")
    parser.add_argument("out", type=pathlib.Path, help="output directory")
    parser.add_argument("--positive-class", default="Genetic_Algorithms",
                        help="class treated as positive (default: %(default)s)")
    args = parser.parse_args(argv)

    content = args.source / "cora.content"
    cites = args.source / "cora.cites"
    for path in (content, cites):
        if not path.is_file():
            parser.error(f"missing {path}")

    index = {}
    features = []
    labels = []
    with content.open() as f:
        for line_no, line in enumerate(f, 1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) < 3:
                sys.exit(f"{content}:{line_no}: expected id, features and class")
            paper, words, cls = fields[0], fields[1:-1], fields[-1]
            if paper in index:
                sys.exit(f"{content}:{line_no}: duplicate paper id {paper}")
            if features and len(words) != len(features[0]):
                sys.exit(f"{content}:{line_no}: {len(words)} features, expected {len(features[0])}")
            index[paper] = len(features)
            features.append(words)
            labels.append(1 if cls == args.positive_class else 0)

    if not any(labels):
        sys.exit(f"no node has class {args.positive_class!r}")

    edges = []
    dropped = 0
    with cites.open() as f:
        for line_no, line in enumerate(f, 1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) != 2:
                sys.exit(f"{cites}:{line_no}: expected two paper ids")
            cited, citing = fields
            if cited not in index or citing not in index:
                dropped += 1
                continue
            edges.append((index[citing], index[cited]))

    args.out.mkdir(parents=True, exist_ok=True)
    with (args.out / "edges.txt").open("w") as f:
        f.write(f"# cora citations, citing cited, from {cites.name}\n")
        for u, v in edges:
            f.write(f"{u} {v}\n")
    with (args.out / "features.csv").open("w", newline="") as f:
        csv.writer(f, lineterminator="\n").writerows(features)
    with (args.out / "labels.csv").open("w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["node", "label"])
        w.writerows(enumerate(labels))

    positives = sum(labels)
    print(f"{len(features)} nodes, {len(edges)} citation lines ({dropped} dropped), "
          f"{len(features[0])} features, {positives} positive ({positives / len(labels):.3f})")


if __name__ == "__main__":
    main()
