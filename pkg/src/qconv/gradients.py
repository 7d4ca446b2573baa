"""Exact parameter-shift gradients of circuit expectations.

Every trainable exponent ``theta`` enters through a phase ``e^{i*pi*theta}``
somewhere, so expectations are trigonometric polynomials in ``theta`` and
admit exact shift rules:

* czpow: the generator has eigenvalue gaps {pi}, so the expectation is a
  single frequency-pi tone and the classic two-point rule applies,
  ``dE/dtheta = (pi/2) * (E(theta + 1/2) - E(theta - 1/2))``.
* cxpow: the control=1 block is ``e^{i*pi*theta} Rx(pi*theta)`` whose
  generator has eigenvalue gaps {pi/2, pi, 3*pi/2}.  The half-integer tones
  only show up in the expectation when a *later* gate mixes this gate's
  control qubit basis (a diagonal observable cannot see the relative phase
  otherwise), which we detect statically.  Where they can appear we use the
  six-point equidistant-frequency rule; everywhere else the two-point rule
  stays exact.

A central finite-difference oracle is kept alongside for validation; it goes
through the plain single-state simulator rather than the batch engine.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .circuits import CXPOW, CZPOW, RX, CircuitSpec
from .engine import batch_expectations
from .sim import circuit_expectation

_TWO_POINT_DELTAS = np.array([0.5, -0.5])
_TWO_POINT_COEFFS = np.array([np.pi / 2, -np.pi / 2])

# Six evaluations integrate any tone set {pi/2, pi, 3*pi/2} exactly:
# rescaling x = pi*theta/2 gives integer frequencies {1, 2, 3} and the
# equidistant rule with shifts (2u-1)*pi/6 in x, i.e. (2u-1)/3 in theta.
_MU = np.arange(1, 7)
_SIX_POINT_DELTAS = (2 * _MU - 1) / 3.0
_SIX_POINT_COEFFS = (np.pi / 2) * (-1.0) ** (_MU - 1) \
    / (12 * np.sin((2 * _MU - 1) * np.pi / 12) ** 2)


@dataclass(frozen=True)
class ShiftPlan:
    """Flattened shift schedule: one row per (parameter, shift) evaluation."""

    num_params: int
    row_param: np.ndarray   # (rows,) parameter index shifted in this row
    row_delta: np.ndarray   # (rows,) additive shift of that parameter
    combine: np.ndarray     # (rows, num_params) coefficient matrix

    @property
    def num_rows(self) -> int:
        return self.row_param.shape[0]

    def shifted_params(self, params: np.ndarray) -> np.ndarray:
        """(rows, num_params) matrix of singly-shifted parameter vectors."""
        thetas = np.tile(np.asarray(params, np.float64), (self.num_rows, 1))
        thetas[np.arange(self.num_rows), self.row_param] += self.row_delta
        return thetas


def _mixed_later(circuit: CircuitSpec, position: int) -> bool:
    """True if any later gate mixes this gate's control qubit basis.

    Only rx on the control or a cxpow *targeting* the control mix it;
    czpow is diagonal and a cxpow merely controlled on it is block diagonal.
    """
    control = circuit.gates[position].control
    return any(g.kind in (RX, CXPOW) and g.target == control
               for g in circuit.gates[position + 1:])


@lru_cache(maxsize=256)
def shift_plan(circuit: CircuitSpec) -> ShiftPlan:
    owner = {}
    for pos, g in enumerate(circuit.gates):
        if g.kind == RX:
            continue
        if g.param_index in owner:
            raise ValueError(
                f"parameter {g.param_index} is used by more than one gate; "
                "the shift rule assumes one gate per parameter")
        owner[g.param_index] = pos
    if set(owner) != set(range(circuit.num_params)):
        raise ValueError("every parameter must be used by exactly one gate")
    row_param, row_delta, row_coeff = [], [], []
    for i in range(circuit.num_params):
        pos = owner[i]
        gate = circuit.gates[pos]
        if gate.kind == CXPOW and _mixed_later(circuit, pos):
            deltas, coeffs = _SIX_POINT_DELTAS, _SIX_POINT_COEFFS
        else:
            deltas, coeffs = _TWO_POINT_DELTAS, _TWO_POINT_COEFFS
        row_param += [i] * len(deltas)
        row_delta += list(deltas)
        row_coeff += list(coeffs)
    row_param = np.array(row_param, np.int64)
    rows = row_param.shape[0]
    combine = np.zeros((rows, circuit.num_params))
    combine[np.arange(rows), row_param] = row_coeff
    for a in (row_param, combine):
        a.setflags(write=False)
    return ShiftPlan(circuit.num_params, row_param,
                     np.array(row_delta), combine)


def shift_rule_gradient(circuit: CircuitSpec, params, data_angles) -> np.ndarray:
    """dE/dtheta_i for all i, exact to simulation precision."""
    params = np.asarray(params, np.float64)
    data_angles = np.asarray(data_angles, np.float64)
    if params.shape != (circuit.num_params,):
        raise ValueError(f"expected {circuit.num_params} parameters, "
                         f"got {params.shape}")
    if data_angles.shape != (circuit.num_data_angles,):
        raise ValueError(f"expected {circuit.num_data_angles} data angles, "
                         f"got {data_angles.shape}")
    if circuit.num_params == 0:
        return np.zeros(0)
    plan = shift_plan(circuit)
    angles = np.tile(data_angles, (plan.num_rows, 1))
    values = batch_expectations(circuit, plan.shifted_params(params), angles)
    return values @ plan.combine


def finite_difference_gradient(circuit: CircuitSpec, params, data_angles,
                               h: float = 1e-5) -> np.ndarray:
    """Central-difference oracle, one parameter at a time."""
    if not 0.0 < h <= 0.1:
        raise ValueError(f"step h must be in (0, 0.1], got {h}")
    params = np.asarray(params, np.float64)
    if params.shape != (circuit.num_params,):
        raise ValueError(f"expected {circuit.num_params} parameters, "
                         f"got {params.shape}")
    grad = np.zeros(circuit.num_params)
    for i in range(circuit.num_params):
        shifted = params.copy()
        shifted[i] = params[i] + h
        plus = circuit_expectation(circuit, shifted, data_angles)
        shifted[i] = params[i] - h
        minus = circuit_expectation(circuit, shifted, data_angles)
        grad[i] = (plus - minus) / (2 * h)
    return grad
