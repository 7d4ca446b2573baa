"""Seeded synthetic image datasets in the real on-disk formats.

The experiment pipeline expects CIFAR-10 / MNIST style files, which cannot
be bundled or downloaded here, so these generators produce stand-in datasets
with genuine class structure: each class combines a distinct mean colour
with a distinct stripe orientation/frequency, plus per-sample jitter and
noise.  Written through :mod:`qconv.data`'s savers they exercise the exact
binary formats end to end.
"""

from __future__ import annotations

import numpy as np

from .data import (LabeledImageSet, load_cifar_batch, load_idx,
                   save_cifar_batch, save_idx)

_STRIPES = [(1, 0), (0, 1), (1, 1), (2, 1), (1, 2)]


def _class_template(label: int, size: int, rng: np.random.Generator,
                    channels: int) -> np.ndarray:
    phi = 2 * np.pi * label / 10.0
    if channels == 3:
        anchor = 0.5 + 0.32 * np.array([np.cos(phi),
                                        np.cos(phi - 2 * np.pi / 3),
                                        np.cos(phi + 2 * np.pi / 3)])
    else:
        anchor = np.array([0.25 + 0.055 * label])
    fy, fx = _STRIPES[label % len(_STRIPES)]
    yy, xx = np.mgrid[0:size, 0:size] / size
    phase = rng.uniform(0, 2 * np.pi)
    stripes = np.sin(2 * np.pi * (2 * fy * yy + 2 * fx * xx) + phase)
    img = anchor[None, None, :] + 0.18 * stripes[..., None]
    img += rng.uniform(-0.06, 0.06)            # brightness jitter
    img += rng.uniform(-0.12, 0.12, img.shape)  # pixel noise
    return np.clip(img, 0.0, 1.0)


def _make(n: int, seed: int, size: int, channels: int):
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % 10
    images = np.empty((n, size, size, channels), np.uint8)
    for i, label in enumerate(labels):
        img = _class_template(int(label), size, rng, channels)
        images[i] = np.round(img * 255).astype(np.uint8)
    return images, labels.astype(np.uint8)


def write_synthetic_cifar(path, n: int = 600, seed: int = 7) -> LabeledImageSet:
    """Write a CIFAR-format batch of synthetic RGB images; returns it loaded
    back through the real parser."""
    images, labels = _make(n, seed, 32, 3)
    save_cifar_batch(images, labels, path)
    return load_cifar_batch(path)


def write_synthetic_idx(images_path, labels_path, n: int = 600,
                        seed: int = 11, size: int = 28) -> LabeledImageSet:
    """Write an IDX pair of synthetic grayscale images; returns it loaded
    back through the real parser."""
    images, labels = _make(n, seed, size, 1)
    save_idx(images[..., 0], labels, images_path, labels_path)
    return load_idx(images_path, labels_path)
