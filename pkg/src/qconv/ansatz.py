"""Builders for the two quantum convolution circuit families.

Both families encode an ``S x T x C`` image window into ``S*T*C`` qubits with
one data Rx per qubit, then entangle with czpow/cxpow pairs (czpow first in
every pair, each gate with its own trainable exponent):

* hqconv -- hierarchical: chains of control/target pairs at qubit distance
  ``stride`` *within* each channel, then one pair linking the first qubit of
  each adjacent channel pair.
* fqconv -- flat: a single chain of pairs at distance ``stride`` over the
  flat qubit ordering, so pairs cross channel boundaries whenever
  ``stride >= S*T``.

Here ``stride`` is the circuit stride (control-to-target qubit distance),
not the spatial scan step of the convolution window.

Qubit layout: pixel ``p`` (1-based, row-major over the window) of channel
``c`` (1-based) sits on qubit ``(c-1)*S*T + (p-1)``, i.e. channel-major.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import CircuitSpec, cxpow, czpow, rx

HQCONV = "hqconv"
FQCONV = "fqconv"


@dataclass(frozen=True)
class KernelShape:
    """Window geometry: S rows x T columns x C channels."""

    rows: int
    cols: int
    channels: int

    def __post_init__(self):
        n = self.num_qubits
        if n < 2:
            raise ValueError(f"kernel needs at least 2 qubits, got {n}")
        if n > 24:
            raise ValueError(f"kernel uses {n} qubits, the simulator cap is 24")

    @property
    def pixels(self) -> int:
        return self.rows * self.cols

    @property
    def num_qubits(self) -> int:
        return self.rows * self.cols * self.channels


@dataclass(frozen=True)
class AnsatzConfig:
    kind: str
    shape: KernelShape
    circuit_stride: int
    observable_subset: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in (HQCONV, FQCONV):
            raise ValueError(f"unknown ansatz kind {self.kind!r}")
        if self.circuit_stride < 1:
            raise ValueError("circuit stride must be positive")
        if self.kind == HQCONV and self.circuit_stride >= self.shape.pixels:
            raise ValueError(
                f"hqconv stride {self.circuit_stride} must be smaller than "
                f"the per-channel qubit count {self.shape.pixels}")
        if self.kind == FQCONV and self.circuit_stride >= self.shape.num_qubits:
            raise ValueError(
                f"fqconv stride {self.circuit_stride} must be smaller than "
                f"the qubit count {self.shape.num_qubits}")


def layout_qubit_index(shape: KernelShape, pixel: int, channel: int) -> int:
    """Qubit index of 1-based (pixel, channel) ordinals."""
    if not 1 <= pixel <= shape.pixels:
        raise IndexError(f"pixel ordinal {pixel} out of range 1..{shape.pixels}")
    if not 1 <= channel <= shape.channels:
        raise IndexError(
            f"channel ordinal {channel} out of range 1..{shape.channels}")
    return (channel - 1) * shape.pixels + (pixel - 1)


def channel_of_qubit(shape: KernelShape, qubit: int) -> int:
    """Inverse of the layout: 1-based channel owning a qubit index."""
    if not 0 <= qubit < shape.num_qubits:
        raise IndexError(f"qubit {qubit} out of range")
    return qubit // shape.pixels + 1


def _default_subset(n: int) -> tuple[int, ...]:
    return tuple(range(n))


def build_hqconv(shape: KernelShape, stride: int,
                 observable_subset=None) -> CircuitSpec:
    """Hierarchical ansatz: per-channel pair chains, then cross-channel links.

    Parameter count: 2 * (C * (S*T - stride) + (C - 1)).
    """
    cfg = AnsatzConfig(HQCONV, shape, stride)  # validates the invariants
    gates = [rx(q) for q in range(shape.num_qubits)]
    next_param = 0
    for c in range(1, shape.channels + 1):
        for p in range(1, shape.pixels + 1):
            if p + stride > shape.pixels:
                break
            qc = layout_qubit_index(shape, p, c)
            qt = layout_qubit_index(shape, p + stride, c)
            gates.append(czpow(qc, qt, next_param))
            gates.append(cxpow(qc, qt, next_param + 1))
            next_param += 2
    for c in range(2, shape.channels + 1):
        qc = layout_qubit_index(shape, 1, c - 1)
        qt = layout_qubit_index(shape, 1, c)
        gates.append(czpow(qc, qt, next_param))
        gates.append(cxpow(qc, qt, next_param + 1))
        next_param += 2
    subset = tuple(observable_subset) if observable_subset is not None \
        else _default_subset(shape.num_qubits)
    return CircuitSpec(shape.num_qubits, tuple(gates), next_param, subset)


def build_fqconv(shape: KernelShape, stride: int,
                 observable_subset=None) -> CircuitSpec:
    """Flat ansatz: one pair chain over the flat qubit ordering.

    Parameter count: 2 * (S*T*C - stride).
    """
    cfg = AnsatzConfig(FQCONV, shape, stride)
    n = shape.num_qubits
    gates = [rx(q) for q in range(n)]
    next_param = 0
    for p in range(1, n + 1):
        if p + stride > n:
            break
        gates.append(czpow(p - 1, p + stride - 1, next_param))
        gates.append(cxpow(p - 1, p + stride - 1, next_param + 1))
        next_param += 2
    subset = tuple(observable_subset) if observable_subset is not None \
        else _default_subset(n)
    return CircuitSpec(n, tuple(gates), next_param, subset)


def build_ansatz(config: AnsatzConfig) -> CircuitSpec:
    builder = build_hqconv if config.kind == HQCONV else build_fqconv
    return builder(config.shape, config.circuit_stride,
                   config.observable_subset)


def encode_window(window_pixels: np.ndarray, shape: KernelShape) -> np.ndarray:
    """Data angles (pixel * pi) in the circuit's Rx order.

    ``window_pixels`` is an S x T x C array (or anything reshapeable to it)
    of values in [0, 1].  The Rx gates run channel-major with pixels
    row-major inside each channel, matching ``layout_qubit_index``.
    """
    w = np.asarray(window_pixels, dtype=np.float64)
    if w.size != shape.num_qubits:
        raise ValueError(f"window has {w.size} values, kernel shape wants "
                         f"{shape.num_qubits}")
    w = w.reshape(shape.rows, shape.cols, shape.channels)
    if w.min() < 0.0 or w.max() > 1.0:
        raise ValueError("window pixel values must be normalized to [0, 1]")
    # (S, T, C) -> (C, S*T) flat, channel-major
    return np.transpose(w, (2, 0, 1)).reshape(-1) * np.pi


def init_params(circuit: CircuitSpec, rng: np.random.Generator) -> np.ndarray:
    """Trainable exponents drawn i.i.d. uniform on [-0.5, 0.5]."""
    return rng.uniform(-0.5, 0.5, circuit.num_params)
