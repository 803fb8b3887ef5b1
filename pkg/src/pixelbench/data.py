"""Image dataset loading.

Two binary layouts are supported:

* IDX (MNIST / Fashion-MNIST): big-endian 32-bit magic whose low byte is
  the dimension count, then one big-endian 32-bit size per dimension, then
  raw unsigned bytes.
* CIFAR-10 binary batches: 3073-byte records, one label byte followed by
  1024 red, 1024 green and 1024 blue bytes. Records are converted to
  row-major channel-interleaved RGB so images render directly; the
  conversion is invertible (plane p, row r, col c maps to interleaved
  offset ``(r * 32 + c) * 3 + p``).

Pixels stay unsigned 8-bit everywhere; they are widened to floats only at
the feature boundary (:func:`flatten`), because attacks operate on
displayable integer images.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, DimensionError, FormatError

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801
CIFAR_RECORD_LEN = 3073

MNIST_CLASS_NAMES = tuple(str(d) for d in range(10))
FASHION_MNIST_CLASS_NAMES = (
    "T-shirt", "trouser", "pullover", "dress", "coat",
    "sandal", "shirt", "sneaker", "bag", "ankle boot",
)
CIFAR10_CLASS_NAMES = (
    "airplane", "automobile", "bird", "cat", "deer",
    "dog", "frog", "horse", "ship", "truck",
)

DEFAULT_CLASS_NAMES = {
    "mnist": MNIST_CLASS_NAMES,
    "fashion-mnist": FASHION_MNIST_CLASS_NAMES,
    "cifar10": CIFAR10_CLASS_NAMES,
}


@dataclass(frozen=True)
class Image:
    """A raw image: row-major, channel-interleaved unsigned bytes."""

    width: int
    height: int
    channels: int
    pixels: np.ndarray  # uint8, shape (width * height * channels,)

    def __post_init__(self):
        if self.channels not in (1, 3):
            raise DimensionError(f"channels must be 1 or 3, got {self.channels}")
        pixels = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if pixels.ndim != 1 or pixels.size != self.width * self.height * self.channels:
            raise DimensionError(
                f"expected {self.width * self.height * self.channels} pixel bytes, "
                f"got {pixels.size}"
            )
        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.height, self.width, self.channels)

    def as_array(self) -> np.ndarray:
        """View as (height, width, channels) for indexing and rendering."""
        return self.pixels.reshape(self.height, self.width, self.channels)


Split = list[tuple[Image, int]]


@dataclass
class Dataset:
    """A named dataset with uniform image shape across both splits."""

    name: str
    class_names: tuple[str, ...]
    train: Split
    test: Split
    source_format: str  # "idx" | "cifar10-binary" | "synthetic"
    image_shape: tuple[int, int, int] = field(init=False)  # (h, w, c)

    def __post_init__(self):
        self.class_names = tuple(self.class_names)
        shapes = {img.shape for img, _ in self.train} | {img.shape for img, _ in self.test}
        if len(shapes) > 1:
            raise ConsistencyError(f"images have mixed shapes: {sorted(shapes)}")
        if not shapes:
            raise ConsistencyError("dataset has no images")
        self.image_shape = shapes.pop()
        n_classes = len(self.class_names)
        for split_name, split in (("train", self.train), ("test", self.test)):
            for _, label in split:
                if not 0 <= label < n_classes:
                    raise ConsistencyError(
                        f"{split_name} label {label} out of range for "
                        f"{n_classes} classes"
                    )

    @property
    def class_count(self) -> int:
        return len(self.class_names)

    def checksum(self) -> str:
        """SHA-256 over class names, labels and pixel bytes of both splits."""
        h = hashlib.sha256()
        h.update("|".join(self.class_names).encode())
        for split in (self.train, self.test):
            for img, label in split:
                h.update(struct.pack(">IIIi", img.width, img.height, img.channels, label))
                h.update(img.pixels.tobytes())
        return h.hexdigest()


def _read_be32(data: bytes, offset: int, path) -> int:
    if offset + 4 > len(data):
        raise FormatError("file truncated while reading header", path=path, offset=offset)
    return struct.unpack_from(">I", data, offset)[0]


def load_idx(images_path, labels_path, class_names=None) -> Split:
    """Parse an IDX image/label file pair into a dataset split.

    Pixel bytes are preserved exactly as stored. ``class_names`` defaults
    to the decimal digits, matching the MNIST-family labels.
    """
    with open(images_path, "rb") as f:
        img_bytes = f.read()
    with open(labels_path, "rb") as f:
        lbl_bytes = f.read()

    magic = _read_be32(img_bytes, 0, images_path)
    if magic != IDX_IMAGE_MAGIC:
        raise FormatError(
            f"bad IDX image magic 0x{magic:08x} (expected 0x{IDX_IMAGE_MAGIC:08x})",
            path=images_path, offset=0,
        )
    count = _read_be32(img_bytes, 4, images_path)
    height = _read_be32(img_bytes, 8, images_path)
    width = _read_be32(img_bytes, 12, images_path)
    expected = 16 + count * height * width
    if len(img_bytes) != expected:
        raise FormatError(
            f"expected {expected} bytes for {count} images of {height}x{width}, "
            f"got {len(img_bytes)}",
            path=images_path, offset=min(expected, len(img_bytes)),
        )

    magic = _read_be32(lbl_bytes, 0, labels_path)
    if magic != IDX_LABEL_MAGIC:
        raise FormatError(
            f"bad IDX label magic 0x{magic:08x} (expected 0x{IDX_LABEL_MAGIC:08x})",
            path=labels_path, offset=0,
        )
    lbl_count = _read_be32(lbl_bytes, 4, labels_path)
    if len(lbl_bytes) != 8 + lbl_count:
        raise FormatError(
            f"expected {8 + lbl_count} bytes for {lbl_count} labels, got {len(lbl_bytes)}",
            path=labels_path, offset=min(8 + lbl_count, len(lbl_bytes)),
        )
    if lbl_count != count:
        raise ConsistencyError(
            f"{images_path} holds {count} images but {labels_path} holds "
            f"{lbl_count} labels"
        )

    if class_names is None:
        class_names = MNIST_CLASS_NAMES
    labels = np.frombuffer(lbl_bytes, dtype=np.uint8, offset=8)
    pixels = np.frombuffer(img_bytes, dtype=np.uint8, offset=16)
    split: Split = []
    stride = height * width
    for i in range(count):
        label = int(labels[i])
        if label >= len(class_names):
            raise ConsistencyError(
                f"label {label} at record {i} exceeds {len(class_names)} classes"
            )
        img = Image(width=width, height=height, channels=1,
                    pixels=pixels[i * stride:(i + 1) * stride])
        split.append((img, label))
    return split


def load_cifar10(batch_paths, class_names=None) -> Split:
    """Parse CIFAR-10 binary batches into a split of interleaved RGB images."""
    if class_names is None:
        class_names = CIFAR10_CLASS_NAMES
    split: Split = []
    for path in batch_paths:
        with open(path, "rb") as f:
            data = f.read()
        if len(data) % CIFAR_RECORD_LEN != 0:
            raise FormatError(
                f"length {len(data)} is not a multiple of the {CIFAR_RECORD_LEN}-byte "
                f"record (truncated at record {len(data) // CIFAR_RECORD_LEN})",
                path=path, offset=(len(data) // CIFAR_RECORD_LEN) * CIFAR_RECORD_LEN,
            )
        records = np.frombuffer(data, dtype=np.uint8).reshape(-1, CIFAR_RECORD_LEN)
        for i, record in enumerate(records):
            label = int(record[0])
            if label >= len(class_names):
                raise ConsistencyError(
                    f"{path}: label {label} at record {i} exceeds "
                    f"{len(class_names)} classes"
                )
            planes = record[1:].reshape(3, 32, 32)
            interleaved = np.ascontiguousarray(planes.transpose(1, 2, 0)).reshape(-1)
            split.append((Image(width=32, height=32, channels=3, pixels=interleaved), label))
    return split


def flatten(image: Image) -> np.ndarray:
    """Raw 0-255 intensities as float64, row-major channel-interleaved."""
    return image.pixels.astype(np.float64)


def flatten_many(images) -> np.ndarray:
    """Stack flattened images into an (n, D) float64 matrix."""
    return np.stack([flatten(img) for img in images])
