"""Dataset ingestion: IDX (MNIST-style) and CIFAR-10 binary formats,
area-average downscaling and seeded subsetting.

Loaded pixel values are float64 in [0, 1] (raw bytes divided by 255); labels
are integers 0..9.  The writers exist so fixtures and synthetic datasets can
round-trip through the exact on-disk formats.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
CIFAR_RECORD_BYTES = 3073  # 1 label byte + 3 * 1024 pixel bytes
NUM_CLASSES = 10


class FormatError(ValueError):
    """Malformed dataset file; carries the offending byte offset."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class LabeledImageSet:
    images: np.ndarray  # (N, H, W, C) float64 in [0, 1]
    labels: np.ndarray  # (N,) int64 in 0..9
    source: str

    def __post_init__(self):
        images = np.asarray(self.images, np.float64)
        labels = np.asarray(self.labels, np.int64)
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "labels", labels)
        if images.ndim != 4:
            raise ValueError(f"images must be (N, H, W, C), got "
                             f"{images.shape}")
        if labels.shape != (images.shape[0],):
            raise ValueError(f"{images.shape[0]} images vs "
                             f"{labels.shape[0]} labels")
        if images.size and (images.min() < 0.0 or images.max() > 1.0):
            raise ValueError("pixel values must lie in [0, 1]")
        if labels.size and (labels.min() < 0 or labels.max() >= NUM_CLASSES):
            raise ValueError(f"labels must lie in 0..{NUM_CLASSES - 1}")

    def __len__(self):
        return self.images.shape[0]


def _read_exact(fh, count, what, offset):
    blob = fh.read(count)
    if len(blob) != count:
        raise FormatError(f"truncated file while reading {what}",
                          offset + len(blob))
    return blob


def load_idx(images_path, labels_path) -> LabeledImageSet:
    """Parse the big-endian IDX image/label file pair."""
    with open(images_path, "rb") as fh:
        magic, count, rows, cols = struct.unpack(
            ">IIII", _read_exact(fh, 16, "image header", 0))
        if magic != IDX_IMAGES_MAGIC:
            raise FormatError(f"bad image magic 0x{magic:08x}, expected "
                              f"0x{IDX_IMAGES_MAGIC:08x}", 0)
        raw = _read_exact(fh, count * rows * cols, "pixels", 16)
    pixels = np.frombuffer(raw, np.uint8).reshape(count, rows, cols, 1)
    with open(labels_path, "rb") as fh:
        magic, label_count = struct.unpack(
            ">II", _read_exact(fh, 8, "label header", 0))
        if magic != IDX_LABELS_MAGIC:
            raise FormatError(f"bad label magic 0x{magic:08x}, expected "
                              f"0x{IDX_LABELS_MAGIC:08x}", 0)
        raw = _read_exact(fh, label_count, "labels", 8)
    labels = np.frombuffer(raw, np.uint8)
    if label_count != count:
        raise ValueError(f"image/label count mismatch: {count} images vs "
                         f"{label_count} labels")
    return LabeledImageSet(pixels / 255.0, labels.astype(np.int64),
                           source=str(images_path))


def save_idx(images_u8: np.ndarray, labels, images_path, labels_path) -> None:
    """Write an (N, H, W) or (N, H, W, 1) uint8 stack as an IDX pair."""
    images_u8 = np.asarray(images_u8, np.uint8)
    if images_u8.ndim == 4:
        images_u8 = images_u8[..., 0]
    n, rows, cols = images_u8.shape
    with open(images_path, "wb") as fh:
        fh.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, n, rows, cols))
        fh.write(images_u8.tobytes())
    with open(labels_path, "wb") as fh:
        fh.write(struct.pack(">II", IDX_LABELS_MAGIC, n))
        fh.write(np.asarray(labels, np.uint8).tobytes())


def load_cifar_batch(path) -> LabeledImageSet:
    """Parse a CIFAR-10 binary batch (3073-byte records, planar RGB)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) % CIFAR_RECORD_BYTES != 0 or len(blob) == 0:
        raise FormatError(
            f"file size {len(blob)} is not a positive multiple of "
            f"{CIFAR_RECORD_BYTES}",
            (len(blob) // CIFAR_RECORD_BYTES) * CIFAR_RECORD_BYTES)
    records = np.frombuffer(blob, np.uint8).reshape(-1, CIFAR_RECORD_BYTES)
    labels = records[:, 0].astype(np.int64)
    bad = np.nonzero(labels >= NUM_CLASSES)[0]
    if bad.size:
        raise FormatError(f"label byte {labels[bad[0]]} out of range",
                          int(bad[0]) * CIFAR_RECORD_BYTES)
    planes = records[:, 1:].reshape(-1, 3, 32, 32)
    images = np.transpose(planes, (0, 2, 3, 1)) / 255.0
    return LabeledImageSet(images, labels, source=str(path))


def save_cifar_batch(images_u8: np.ndarray, labels, path) -> None:
    """Write (N, 32, 32, 3) uint8 images as a CIFAR-10 binary batch."""
    images_u8 = np.asarray(images_u8, np.uint8)
    n = images_u8.shape[0]
    planes = np.transpose(images_u8, (0, 3, 1, 2)).reshape(n, -1)
    records = np.empty((n, CIFAR_RECORD_BYTES), np.uint8)
    records[:, 0] = np.asarray(labels, np.uint8)
    records[:, 1:] = planes
    with open(path, "wb") as fh:
        fh.write(records.tobytes())


def _axis_weights(src: int, dst: int) -> np.ndarray:
    """Row-stochastic overlap weights of dst intervals over src cells."""
    scale = src / dst
    w = np.zeros((dst, src))
    for i in range(dst):
        a, b = i * scale, (i + 1) * scale
        for j in range(int(np.floor(a)), min(src, int(np.ceil(b)))):
            overlap = min(b, j + 1) - max(a, j)
            if overlap > 0:
                w[i, j] = overlap / scale
    return w


def resize_area(image: np.ndarray, target: tuple[int, int]) -> np.ndarray:
    """Box/area-average downscale; each output pixel is the mean of its
    (possibly fractional) source rectangle."""
    image = np.asarray(image, np.float64)
    if image.ndim != 3:
        raise ValueError(f"expected (H, W, C), got {image.shape}")
    h, w, _ = image.shape
    th, tw = target
    if th > h or tw > w:
        raise ValueError(f"upscaling {h}x{w} -> {th}x{tw} is unsupported")
    if th < 1 or tw < 1:
        raise ValueError("target size must be positive")
    wr = _axis_weights(h, th)
    wc = _axis_weights(w, tw)
    return np.einsum("ij,jkc,lk->ilc", wr, image, wc)


def resize_set(data: LabeledImageSet, target: tuple[int, int]) -> LabeledImageSet:
    if data.images.shape[1:3] == tuple(target):
        return data
    images = np.stack([resize_area(img, target) for img in data.images])
    # area averages of in-range values stay in range bar float dust
    images = np.clip(images, 0.0, 1.0)
    return LabeledImageSet(images, data.labels,
                           source=f"{data.source} -> {target[0]}x{target[1]}")


def sample_subset(data: LabeledImageSet, n: int, seed: int) -> LabeledImageSet:
    """Seeded uniform sample without replacement, pairing preserved."""
    total = len(data)
    if n > total:
        raise ValueError(f"cannot sample {n} items from {total}")
    idx = np.random.default_rng(seed).permutation(total)[:n]
    return LabeledImageSet(data.images[idx], data.labels[idx],
                           source=f"{data.source} [subset n={n} seed={seed}]")
