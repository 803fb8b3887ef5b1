"""Small synthetic image datasets plus binary-format writers.

The generator draws one random prototype image per class and adds
Gaussian pixel noise, giving data that PCA + CART separate well at toy
sizes. The writers emit the exact IDX and CIFAR-10 binary layouts, which
makes desk-scale end-to-end runs possible without any real dataset on
disk.
"""

from __future__ import annotations

import struct

import numpy as np

from .data import Dataset, Image, Split
from .rng import child_generator


def make_synthetic_dataset(name: str = "synthetic", n_train: int = 120,
                           n_test: int = 60, width: int = 6, height: int = 6,
                           channels: int = 1, class_count: int = 3,
                           noise: float = 35.0, marker_pixels: int = 2,
                           seed: int = 7) -> Dataset:
    """Prototype-plus-noise images, classes assigned round robin.

    All classes share one background prototype and differ only in a few
    bright marker pixels, so trained trees key on a handful of pixels and
    single-pixel perturbations can realistically flip predictions.
    """
    size = width * height * channels
    layout_rng = child_generator(seed, 0)
    background = layout_rng.integers(40, 120, size=size)
    markers = layout_rng.choice(size, size=class_count * marker_pixels,
                                replace=False)
    prototypes = []
    for c in range(class_count):
        proto = background.copy()
        proto[markers[c * marker_pixels:(c + 1) * marker_pixels]] = 170
        prototypes.append(proto)
    rng = child_generator(seed, class_count + 1)

    def sample(n: int) -> Split:
        split: Split = []
        for i in range(n):
            label = i % class_count
            pixels = np.clip(
                prototypes[label] + rng.normal(0.0, noise, size=size),
                0, 255,
            ).astype(np.uint8)
            split.append((Image(width=width, height=height, channels=channels,
                                pixels=pixels), label))
        return split

    return Dataset(
        name=name,
        class_names=tuple(f"class-{c}" for c in range(class_count)),
        train=sample(n_train),
        test=sample(n_test),
        source_format="synthetic",
    )


def write_idx(split: Split, images_path, labels_path) -> None:
    """Write a grayscale split as an IDX image/label file pair."""
    if not split:
        raise ValueError("cannot write an empty split")
    height, width, channels = split[0][0].shape
    if channels != 1:
        raise ValueError("IDX files hold single-channel images")
    with open(images_path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(split), height, width))
        for img, _ in split:
            f.write(img.pixels.tobytes())
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(split)))
        f.write(bytes(label for _, label in split))


def write_cifar_batch(split: Split, path) -> None:
    """Write an RGB split as one CIFAR-10 binary batch."""
    with open(path, "wb") as f:
        for img, label in split:
            if img.shape != (32, 32, 3):
                raise ValueError("CIFAR batches hold 32x32 RGB images")
            planes = img.as_array().transpose(2, 0, 1)  # interleaved -> planar
            f.write(bytes([label]))
            f.write(np.ascontiguousarray(planes).tobytes())
