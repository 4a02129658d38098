#!/usr/bin/env python3
"""Regenerate the binary test fixtures in tests/data.

MNIST subset: digits from the `mnist` npm package (MIT licensed), fetched with
`npm pack mnist@1.1.0` and unpacked; pass the package directory. Each digit
file stores 28x28 images as values in [0, 1] rounded to 3 decimals. The first
200 images of every digit form the training split and the next 100 the test
split; both are shuffled with a fixed seed and written as IDX files.

Image: scikit-image's "camera" test image (public domain), block-averaged
from 512x512 to 64x64 and written as binary PGM, plus one 64-pixel row of it.
"""

import argparse
import json
import pathlib
import struct

import numpy as np
from skimage import data

TRAIN_PER_DIGIT = 200
TEST_PER_DIGIT = 100
IMAGE_SIZE = 64
ROW = 40
SEED = 20190528


def write_idx_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(images), 28, 28))
        f.write(images.astype(np.uint8).tobytes())


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(np.asarray(labels, dtype=np.uint8).tobytes())


def write_pgm(path, image):
    rows, cols = image.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{cols} {rows}\n255\n".encode("ascii"))
        f.write(image.astype(np.uint8).tobytes())


def mnist_fixture(package_dir, out_dir, rng):
    splits = {"train": ([], []), "test": ([], [])}
    for digit in range(10):
        with open(package_dir / "src" / "digits" / f"{digit}.json") as f:
            values = np.asarray(json.load(f)["data"], dtype=np.float64).reshape(-1, 784)
        pixels = np.rint(values * 255.0).clip(0, 255)
        ranges = {"train": (0, TRAIN_PER_DIGIT), "test": (TRAIN_PER_DIGIT, TRAIN_PER_DIGIT + TEST_PER_DIGIT)}
        for name, (lo, hi) in ranges.items():
            splits[name][0].append(pixels[lo:hi])
            splits[name][1].extend([digit] * (hi - lo))
    for name, (images, labels) in splits.items():
        images = np.concatenate(images)
        labels = np.asarray(labels)
        order = rng.permutation(len(labels))
        write_idx_images(out_dir / f"mnist-{name}-images.idx3-ubyte", images[order])
        write_idx_labels(out_dir / f"mnist-{name}-labels.idx1-ubyte", labels[order])


def image_fixture(out_dir):
    camera = data.camera().astype(np.float64)
    block = camera.shape[0] // IMAGE_SIZE
    small = camera.reshape(IMAGE_SIZE, block, IMAGE_SIZE, block).mean(axis=(1, 3))
    small = np.rint(small).clip(0, 255)
    write_pgm(out_dir / "camera64.pgm", small)
    write_pgm(out_dir / "camera64-row.pgm", small[ROW : ROW + 1])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--mnist-package", type=pathlib.Path, required=True,
                        help="unpacked `npm pack mnist@1.1.0` directory")
    parser.add_argument("--out", type=pathlib.Path, default=pathlib.Path(__file__).parent.parent / "tests" / "data")
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    mnist_fixture(args.mnist_package, args.out, np.random.default_rng(SEED))
    image_fixture(args.out)


if __name__ == "__main__":
    main()
