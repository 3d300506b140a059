#!/usr/bin/env python3
"""Build MNIST IDX files from the `mnist` npm package.

The npm package bundles about 10k real MNIST digits as per-class JSON
(run `npm install mnist` first). This script shuffles them with a fixed
seed, splits train/test, and writes the four standard IDX files that
`snnlab train` expects under SNNLAB_DATA_DIR.

Usage: prepare_mnist.py [digits_dir] [out_dir]
"""

import json
import os
import random
import struct
import sys


def write_idx_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        for img in images:
            f.write(bytes(round(v * 255) for v in img))


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def main():
    digits_dir = sys.argv[1] if len(sys.argv) > 1 else "node_modules/mnist/src/digits"
    out_dir = sys.argv[2] if len(sys.argv) > 2 else os.environ.get("SNNLAB_DATA_DIR", "data")

    samples = []
    for digit in range(10):
        with open(os.path.join(digits_dir, f"{digit}.json")) as f:
            flat = json.load(f)["data"]
        n = len(flat) // 784
        for i in range(n):
            samples.append((flat[i * 784 : (i + 1) * 784], digit))

    rng = random.Random(12345)
    rng.shuffle(samples)
    n_test = 2000
    test, train = samples[:n_test], samples[n_test:]

    os.makedirs(out_dir, exist_ok=True)
    write_idx_images(os.path.join(out_dir, "train-images-idx3-ubyte"), [s[0] for s in train])
    write_idx_labels(os.path.join(out_dir, "train-labels-idx1-ubyte"), [s[1] for s in train])
    write_idx_images(os.path.join(out_dir, "t10k-images-idx3-ubyte"), [s[0] for s in test])
    write_idx_labels(os.path.join(out_dir, "t10k-labels-idx1-ubyte"), [s[1] for s in test])
    print(f"wrote {len(train)} train and {len(test)} test samples to {out_dir}")


if __name__ == "__main__":
    main()
