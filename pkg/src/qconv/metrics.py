"""Evaluation metrics: confusion matrices and curve smoothness.

The smoothness statistic scores a training curve by its gap to a
Savitzky-Golay baseline (local least-squares polynomial fit): the averaged
l1 norm and the population standard deviation of ``curve - baseline``.
Smaller numbers mean a smoother curve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import savgol_filter

DEFAULT_WINDOW = 9
DEFAULT_POLYORDER = 3

NUM_CLASSES = 10


def confusion_matrix(predictions, labels,
                     num_classes: int = NUM_CLASSES) -> np.ndarray:
    """Counts indexed by (true class, predicted class)."""
    predictions = np.asarray(predictions, np.int64)
    labels = np.asarray(labels, np.int64)
    if predictions.shape != labels.shape:
        raise ValueError(f"{predictions.shape[0]} predictions vs "
                         f"{labels.shape[0]} labels")
    if labels.size and not (0 <= labels.min() and
                            max(labels.max(), predictions.max()) < num_classes
                            and predictions.min() >= 0):
        raise ValueError(f"class ids must lie in 0..{num_classes - 1}")
    matrix = np.zeros((num_classes, num_classes), np.int64)
    np.add.at(matrix, (labels, predictions), 1)
    return matrix


def _check_filter_args(curve, window, polyorder):
    if window % 2 == 0 or window < 1:
        raise ValueError(f"window must be odd and positive, got {window}")
    if polyorder >= window:
        raise ValueError(f"polyorder {polyorder} must be smaller than the "
                         f"window {window}")
    if curve.shape[0] < window:
        raise ValueError(f"curve of length {curve.shape[0]} is shorter than "
                         f"the window {window}")


def savgol_baseline(curve, window: int = DEFAULT_WINDOW,
                    polyorder: int = DEFAULT_POLYORDER) -> np.ndarray:
    """Savitzky-Golay smoothed baseline.

    Interior points take the centre value of the least-squares polynomial
    over their window; the edges evaluate the first/last full window's
    polynomial at the edge offsets (scipy's ``interp`` mode).
    """
    curve = np.asarray(curve, np.float64)
    _check_filter_args(curve, window, polyorder)
    return savgol_filter(curve, window, polyorder, mode="interp")


@dataclass(frozen=True)
class SmoothnessStats:
    avg_l1: float
    std_dev: float


def smoothness_stats(curve, window: int = DEFAULT_WINDOW,
                     polyorder: int = DEFAULT_POLYORDER) -> SmoothnessStats:
    """Mean |gap| and population std of the gap to the smoothed baseline.

    The gap is offset-invariant, so the curve is anchored at its first value
    before filtering; a constant curve then scores exactly (0, 0) instead of
    collecting float dust from the filter coefficients.
    """
    curve = np.asarray(curve, np.float64)
    anchored = curve - curve.flat[0]
    gap = anchored - savgol_baseline(anchored, window, polyorder)
    return SmoothnessStats(float(np.mean(np.abs(gap))), float(np.std(gap)))


def smoothness_report_rows(curves: dict[str, np.ndarray],
                           window: int = DEFAULT_WINDOW,
                           polyorder: int = DEFAULT_POLYORDER) -> list[str]:
    """CSV rows (one per curve) in the report layout."""
    rows = ["curve,window,polyorder,avg_l1,std_dev"]
    for name, values in curves.items():
        stats = smoothness_stats(values, window, polyorder)
        rows.append(f"{name},{window},{polyorder},"
                    f"{stats.avg_l1:.6g},{stats.std_dev:.6g}")
    return rows
