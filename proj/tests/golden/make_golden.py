#!/usr/bin/env python3
# Copyright 2026 The maskfuse Authors
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

"""Writes the hand-built golden fixtures with struct, independently of the
C++ encoders, then records FNV-1a checksums of every golden binary.

    python3 make_golden.py          # rewrite fixtures and CHECKSUMS
    maskfuse gen --seed 42 --width 64 --height 64 --regions 8 \
        --distractors 2 --classes 6 --dim 16 --out synth64   # before this
"""

import json
import math
import os
import struct

HERE = os.path.dirname(os.path.abspath(__file__))


def sfsl(width, height, rows):
    out = b"SFSL" + struct.pack("<BII", 1, width, height)
    for row in rows:
        out += struct.pack("<%dH" % width, *row)
    return out


def sfse(dim, entries):
    out = b"SFSE" + struct.pack("<BII", 1, dim, len(entries))
    for name, vec in entries:
        raw = name.encode("utf-8")
        out += struct.pack("<H", len(raw)) + raw + struct.pack("<%df" % dim, *vec)
    return out


def rle(width, height, fg):
    """Column-major counts of the pixel set fg = {(x, y)}."""
    counts, cur, run = [], 0, 0
    for x in range(width):
        for y in range(height):
            b = 1 if (x, y) in fg else 0
            if b != cur:
                counts.append(run)
                cur, run = b, 0
            run += 1
    counts.append(run)
    return counts


def fnv1a(data):
    h = 1469598103934665603
    for b in data:
        h ^= b
        h = (h * 1099511628211) & 0xFFFFFFFFFFFFFFFF
    return h


def write(path, data):
    with open(os.path.join(HERE, path), "wb") as f:
        f.write(data)


def street():
    # 6x4 street scene: road everywhere, a car on top, a zebra crossing
    # along the bottom row.
    w, h = 6, 4
    os.makedirs(os.path.join(HERE, "street"), exist_ok=True)
    with open(os.path.join(HERE, "street", "coco.txt"), "w") as f:
        f.write("road\ncar\nperson\n")
    with open(os.path.join(HERE, "street", "ade.txt"), "w") as f:
        f.write("road\nautomobile\nbuilding\nsky\n")
    with open(os.path.join(HERE, "street", "synonyms.txt"), "w") as f:
        f.write("# ade -> coco\nautomobile = car\nzebra crossing = road\n")

    car = {(x, y) for x in range(2, 5) for y in range(0, 2)}
    zebra = {(x, 3) for x in range(w)}
    everything = {(x, y) for x in range(w) for y in range(h)}
    masks = [
        ("road", everything, 0.9),
        ("car", car, 0.95),
        ("crossing", zebra, 0.8),
        ("blob", {(0, 0)}, 0.3),
    ]

    coco = [[0] * w for _ in range(h)]
    ade = [[0] * w for _ in range(h)]
    for (x, y) in car:
        coco[y][x] = 1
        ade[y][x] = 1
    coco[0][0] = 255
    ade[0][0] = 3  # the blob is sky to the second segmenter
    write("street/coco.sfsl", sfsl(w, h, coco))
    write("street/ade.sfsl", sfsl(w, h, ade))
    gt = [row[:] for row in coco]
    gt[0][0] = 255
    write("street/gt.sfsl", sfsl(w, h, gt))

    def unit(i, j, t):
        v = [0.0] * 4
        v[i] = math.cos(t)
        v[j] = math.sin(t)
        return v

    words = [
        ("road", unit(0, 1, 0.0)),
        ("street", unit(0, 1, 0.3)),
        ("car", unit(1, 2, 0.0)),
        ("red car", unit(1, 2, 0.2)),
        ("red", unit(2, 3, 0.0)),
        ("zebra crossing", unit(0, 3, 0.5)),
        ("zebra", unit(3, 2, 0.2)),
        ("crossing", unit(0, 3, 0.9)),
        ("person", unit(2, 0, 0.0)),
        ("region/road", unit(0, 1, 0.1)),
        ("region/car", unit(1, 2, 0.1)),
        ("region/crossing", unit(0, 3, 0.55)),
    ]
    write("street/embeddings.sfse", sfse(4, words))

    manifest = {
        "schema_version": 1,
        "taxonomies": [{"id": "coco", "path": "coco.txt"}, {"id": "ade", "path": "ade.txt"}],
        "output_taxonomy": "coco",
        "synonyms": "synonyms.txt",
        "images": [{
            "image_id": "street",
            "width": w,
            "height": h,
            "masks": [{"mask_id": m, "counts": rle(w, h, fg), "confidence": c}
                      for m, fg, c in masks],
            "captions": [
                {"mask_id": "road", "text": "the street"},
                {"mask_id": "car", "text": "a red car parked on the street"},
                {"mask_id": "crossing", "text": "a zebra crossing on the road"},
            ],
            "semantic_maps": [{"taxonomy": "coco", "path": "coco.sfsl"},
                              {"taxonomy": "ade", "path": "ade.sfsl"}],
            "embeddings": "embeddings.sfse",
            "ground_truth": {"taxonomy": "coco", "path": "gt.sfsl"},
        }],
    }
    with open(os.path.join(HERE, "street", "manifest.json"), "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")


def main():
    write("grid_2x2.sfsl", sfsl(2, 2, [[0, 1], [2, 3]]))
    write("small.sfse", sfse(4, [
        ("car", [1.0, 0.0, 0.0, 0.0]),
        ("dog", [0.0, 2.0, 0.0, 0.0]),
        ("zebra crossing", [0.5, 0.5, 0.5, 0.5]),
        ("region/m0", [3.0, 4.0, 0.0, 0.0]),
    ]))
    street()

    binaries = []
    for root, _, files in os.walk(HERE):
        for name in files:
            if name.endswith((".sfsl", ".sfse")):
                binaries.append(os.path.relpath(os.path.join(root, name), HERE))
    with open(os.path.join(HERE, "CHECKSUMS"), "w") as f:
        f.write("# fnv1a64 size path\n")
        for rel in sorted(binaries):
            with open(os.path.join(HERE, rel), "rb") as b:
                data = b.read()
            f.write("%016x %d %s\n" % (fnv1a(data), len(data), rel))


if __name__ == "__main__":
    main()
