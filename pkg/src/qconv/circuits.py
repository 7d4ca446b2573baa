"""Circuit description shared by the simulator, the ansatz builders and the
gradient code.

A circuit is a flat, ordered list of gate applications over ``num_qubits``
qubits.  Three gate kinds exist:

* ``rx``     -- single-qubit X rotation used for data encoding.  Rx gates
  carry no stored angle; the ``i``-th Rx gate in circuit order reads entry
  ``i`` of the ``data_angles`` vector supplied at execution time.
* ``czpow``  -- controlled phase gate ``diag(1, 1, 1, e^{i*pi*theta})``.
* ``cxpow``  -- controlled gate whose control=1 block is
  ``e^{i*pi*theta} * Rx(pi*theta)``.

``theta`` for the controlled kinds is a trainable exponent looked up by
``param_index`` in the parameter vector at execution time.

Bit convention: qubit ``q`` is bit ``q`` of the amplitude index
(little-endian).  The 4x4 matrices of the controlled gates are written in the
``|control, target>`` basis ordered ``00, 01, 10, 11`` with the control as
the high bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

MAX_QUBITS = 24
ORACLE_MAX_QUBITS = 6

RX = "rx"
CZPOW = "czpow"
CXPOW = "cxpow"

_KIND_CODES = {RX: 0, CZPOW: 1, CXPOW: 2}


@dataclass(frozen=True)
class GateApplication:
    kind: str
    target: int
    control: int | None = None
    param_index: int | None = None


def rx(target: int) -> GateApplication:
    return GateApplication(RX, target)


def czpow(control: int, target: int, param_index: int) -> GateApplication:
    return GateApplication(CZPOW, target, control, param_index)


def cxpow(control: int, target: int, param_index: int) -> GateApplication:
    return GateApplication(CXPOW, target, control, param_index)


@dataclass(frozen=True)
class CircuitSpec:
    """Immutable gate program plus the measured qubit subset."""

    num_qubits: int
    gates: tuple[GateApplication, ...]
    num_params: int
    observable_subset: tuple[int, ...]

    def __post_init__(self):
        n = self.num_qubits
        if not 1 <= n <= MAX_QUBITS:
            raise ValueError(
                f"num_qubits must be between 1 and {MAX_QUBITS}, got {n}")
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "observable_subset",
                           tuple(self.observable_subset))
        for g in self.gates:
            if g.kind not in _KIND_CODES:
                raise ValueError(f"unknown gate kind {g.kind!r}")
            if not 0 <= g.target < n:
                raise IndexError(f"gate target {g.target} out of range for "
                                 f"{n} qubits")
            if g.kind == RX:
                if g.control is not None or g.param_index is not None:
                    raise ValueError("rx gates take no control or parameter")
            else:
                if g.control is None:
                    raise ValueError(f"{g.kind} gate requires a control qubit")
                if not 0 <= g.control < n:
                    raise IndexError(f"gate control {g.control} out of range "
                                     f"for {n} qubits")
                if g.control == g.target:
                    raise ValueError(
                        "invalid gate: control and target must differ "
                        f"(both {g.target})")
                if g.param_index is None or not 0 <= g.param_index < self.num_params:
                    raise ValueError(
                        f"parameter index {g.param_index} out of range for "
                        f"{self.num_params} parameters")
        subset = self.observable_subset
        if len(subset) == 0:
            raise ValueError("invalid observable: the measured subset is empty")
        if list(subset) != sorted(set(subset)):
            raise ValueError("observable subset must be sorted and "
                             "duplicate-free")
        if subset[0] < 0 or subset[-1] >= n:
            raise IndexError(f"observable subset {subset} out of range for "
                             f"{n} qubits")

    @property
    def num_data_angles(self) -> int:
        return sum(1 for g in self.gates if g.kind == RX)

    @cached_property
    def arrays(self) -> tuple[np.ndarray, ...]:
        """Flat int arrays (kinds, controls, targets, param/angle slots) for
        the compiled kernels.  Controls and unused slots hold -1."""
        ng = len(self.gates)
        kinds = np.empty(ng, np.int8)
        controls = np.full(ng, -1, np.int32)
        targets = np.empty(ng, np.int32)
        pidx = np.full(ng, -1, np.int32)
        aidx = np.full(ng, -1, np.int32)
        next_angle = 0
        for i, g in enumerate(self.gates):
            kinds[i] = _KIND_CODES[g.kind]
            targets[i] = g.target
            if g.kind == RX:
                aidx[i] = next_angle
                next_angle += 1
            else:
                controls[i] = g.control
                pidx[i] = g.param_index
        for a in (kinds, controls, targets, pidx, aidx):
            a.setflags(write=False)
        return kinds, controls, targets, pidx, aidx

    @cached_property
    def observable_signs(self) -> np.ndarray:
        """Per-basis-state value of ``mean_q Z_q`` over the measured subset."""
        idx = np.arange(1 << self.num_qubits)
        acc = np.zeros(idx.shape, np.float64)
        for q in self.observable_subset:
            acc += 1.0 - 2.0 * ((idx >> q) & 1)
        acc /= len(self.observable_subset)
        acc.setflags(write=False)
        return acc


def circuit_text(circuit: CircuitSpec) -> str:
    """Deterministic one-gate-per-line dump used by golden-file tests."""
    lines = []
    angle_slot = 0
    for g in circuit.gates:
        if g.kind == RX:
            lines.append(f"rx t{g.target} a{angle_slot}")
            angle_slot += 1
        else:
            lines.append(f"{g.kind} c{g.control} t{g.target} p{g.param_index}")
    return "\n".join(lines) + "\n"


def rx_matrix(angle: float) -> np.ndarray:
    """Single-qubit X-rotation matrix for a data angle in radians."""
    c = np.cos(angle / 2)
    s = np.sin(angle / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)


def cpow_matrix(kind: str, exponent: float) -> np.ndarray:
    """4x4 matrix of czpow/cxpow in the ``|control, target>`` basis.

    The cxpow block carries the full phase factor ``g = e^{i*pi*theta}``
    (not the half-phase ``e^{i*pi*theta/2}`` some gate libraries use).
    """
    m = np.eye(4, dtype=np.complex128)
    if kind == CZPOW:
        m[3, 3] = np.exp(1j * np.pi * exponent)
    elif kind == CXPOW:
        g = np.exp(1j * np.pi * exponent)
        c = np.cos(np.pi * exponent / 2)
        s = np.sin(np.pi * exponent / 2)
        m[2:, 2:] = [[g * c, -1j * g * s], [-1j * g * s, g * c]]
    else:
        raise ValueError(f"not a controlled gate kind: {kind!r}")
    return m
