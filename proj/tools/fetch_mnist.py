#!/usr/bin/env python3
"""Prepare MNIST IDX files for the training demos and the acceptance suite.

Pulls the `mnist` npm package (which bundles ~10k real MNIST digits as JSON),
converts it to standard big-endian IDX files, and writes:

    data/train-images-idx3-ubyte   data/train-labels-idx1-ubyte   (~9k images)
    data/t1k-images-idx3-ubyte     data/t1k-labels-idx1-ubyte     (1000 images)

If you already have canonical MNIST IDX files, just place them in data/ under
the names above instead (the loader accepts any IDX source).

Usage: python3 tools/fetch_mnist.py [--out data] [--json-dir DIR]
"""
import argparse
import json
import pathlib
import random
import struct
import subprocess
import sys
import tarfile
import tempfile


def load_digits(json_dir: pathlib.Path):
    items = []
    for digit in range(10):
        with open(json_dir / f"{digit}.json") as f:
            flat = json.load(f)["data"]
        n = len(flat) // 784
        for i in range(n):
            pixels = bytes(
                min(255, max(0, round(v * 255))) for v in flat[i * 784 : (i + 1) * 784]
            )
            items.append((digit, pixels))
    return items


def fetch_npm_digits(tmp: pathlib.Path) -> pathlib.Path:
    subprocess.run(["npm", "pack", "mnist"], cwd=tmp, check=True, capture_output=True)
    tarball = next(tmp.glob("mnist-*.tgz"))
    with tarfile.open(tarball) as tf:
        tf.extractall(tmp)
    return tmp / "package" / "src" / "digits"


def write_idx(
    images_path: pathlib.Path, labels_path: pathlib.Path, items, rows=28, cols=28
):
    with open(images_path, "wb") as img:
        img.write(struct.pack(">IIII", 0x803, len(items), rows, cols))
        for _, pixels in items:
            img.write(pixels)
    with open(labels_path, "wb") as lab:
        lab.write(struct.pack(">II", 0x801, len(items)))
        lab.write(bytes(label for label, _ in items))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data", help="output directory")
    parser.add_argument(
        "--json-dir", default=None, help="existing digits JSON dir (skips npm)"
    )
    parser.add_argument("--test-count", type=int, default=1000)
    args = parser.parse_args()

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    if args.json_dir:
        items = load_digits(pathlib.Path(args.json_dir))
    else:
        with tempfile.TemporaryDirectory() as tmp:
            items = load_digits(fetch_npm_digits(pathlib.Path(tmp)))

    random.Random(20240101).shuffle(items)
    test = items[: args.test_count]
    train = items[args.test_count :]
    write_idx(out / "train-images-idx3-ubyte", out / "train-labels-idx1-ubyte", train)
    write_idx(out / "t1k-images-idx3-ubyte", out / "t1k-labels-idx1-ubyte", test)
    print(f"wrote {len(train)} train and {len(test)} test images to {out}/")


if __name__ == "__main__":
    sys.exit(main())
