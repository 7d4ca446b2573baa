"""Compiled batch execution of one circuit over many rows.

The quantum convolution layer evaluates the same circuit at many
(data angles, parameters) settings: every window of an image, every filter,
every parameter-shifted copy, every noise trajectory.  All of those are
independent rows, so the kernels below hold one row's statevector in cache,
apply the whole gate sequence to it, reduce it to an expectation value and
only then move on.  Rows are distributed over threads with ``prange``; each
row's arithmetic has a fixed order, so results are reproducible regardless
of thread scheduling.

Optional per-row Pauli insertion codes (0=I, 1=X, 2=Y, 3=Z, one pair per
controlled gate) implement noise trajectories without a separate code path.
"""

from __future__ import annotations

import os

import numba
import numpy as np
from numba import njit, prange

from .circuits import CircuitSpec


def default_workers() -> int:
    env = os.environ.get("QCONV_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def set_workers(n: int | None) -> None:
    numba.set_num_threads(n if n else default_workers())


@njit(cache=True)
def _apply_rx(psi, q, angle):
    c = np.cos(0.5 * angle)
    ms = -1j * np.sin(0.5 * angle)
    step = 1 << q
    for base in range(0, psi.shape[0], step << 1):
        for i0 in range(base, base + step):
            i1 = i0 + step
            a0 = psi[i0]
            a1 = psi[i1]
            psi[i0] = c * a0 + ms * a1
            psi[i1] = ms * a0 + c * a1


@njit(cache=True)
def _apply_czpow(psi, qc, qt, theta):
    ph = np.exp(1j * np.pi * theta)
    lo, hi = (qc, qt) if qc < qt else (qt, qc)
    slo, shi = 1 << lo, 1 << hi
    both = (1 << qc) | (1 << qt)
    for r in range(psi.shape[0] >> 2):
        i = ((r >> lo) << (lo + 1)) + (r & (slo - 1))
        i = ((i >> hi) << (hi + 1)) + (i & (shi - 1))
        psi[i | both] *= ph


@njit(cache=True)
def _apply_cxpow(psi, qc, qt, theta):
    g = np.exp(1j * np.pi * theta)
    a = g * np.cos(0.5 * np.pi * theta)
    b = -1j * g * np.sin(0.5 * np.pi * theta)
    lo, hi = (qc, qt) if qc < qt else (qt, qc)
    slo, shi = 1 << lo, 1 << hi
    cb, tb = 1 << qc, 1 << qt
    for r in range(psi.shape[0] >> 2):
        i = ((r >> lo) << (lo + 1)) + (r & (slo - 1))
        i = ((i >> hi) << (hi + 1)) + (i & (shi - 1))
        i0 = i | cb
        i1 = i0 | tb
        a0 = psi[i0]
        a1 = psi[i1]
        psi[i0] = a * a0 + b * a1
        psi[i1] = b * a0 + a * a1


@njit(cache=True)
def _apply_pauli(psi, q, code):
    step = 1 << q
    if code == 1:  # X
        for base in range(0, psi.shape[0], step << 1):
            for i0 in range(base, base + step):
                i1 = i0 + step
                psi[i0], psi[i1] = psi[i1], psi[i0]
    elif code == 2:  # Y
        for base in range(0, psi.shape[0], step << 1):
            for i0 in range(base, base + step):
                i1 = i0 + step
                a0 = psi[i0]
                psi[i0] = -1j * psi[i1]
                psi[i1] = 1j * a0
    elif code == 3:  # Z
        for base in range(0, psi.shape[0], step << 1):
            for i0 in range(base, base + step):
                psi[i0 + step] = -psi[i0 + step]


@njit(cache=True)
def _run_row(psi, kinds, controls, targets, pidx, aidx, cslot,
             angles_row, thetas_row, codes_row, noisy):
    psi[:] = 0.0
    psi[0] = 1.0
    for g in range(kinds.shape[0]):
        k = kinds[g]
        if k == 0:
            _apply_rx(psi, targets[g], angles_row[aidx[g]])
        else:
            if k == 1:
                _apply_czpow(psi, controls[g], targets[g],
                             thetas_row[pidx[g]])
            else:
                _apply_cxpow(psi, controls[g], targets[g],
                             thetas_row[pidx[g]])
            if noisy:
                s = cslot[g]
                _apply_pauli(psi, controls[g], codes_row[s, 0])
                _apply_pauli(psi, targets[g], codes_row[s, 1])


@njit(cache=True, parallel=True)
def _kernel_expect(kinds, controls, targets, pidx, aidx, cslot,
                   angles, thetas, codes, noisy, signs, nq, out):
    dim = 1 << nq
    for b in prange(angles.shape[0]):
        psi = np.empty(dim, dtype=np.complex128)
        _run_row(psi, kinds, controls, targets, pidx, aidx, cslot,
                 angles[b], thetas[b], codes[b], noisy)
        acc = 0.0
        for i in range(dim):
            p = psi[i].real * psi[i].real + psi[i].imag * psi[i].imag
            acc += p * signs[i]
        out[b] = acc


@njit(cache=True, parallel=True)
def _kernel_states(kinds, controls, targets, pidx, aidx, cslot,
                   angles, thetas, codes, noisy, out):
    for b in prange(angles.shape[0]):
        _run_row(out[b], kinds, controls, targets, pidx, aidx, cslot,
                 angles[b], thetas[b], codes[b], noisy)


def _cpow_slots(circuit: CircuitSpec) -> np.ndarray:
    kinds = circuit.arrays[0]
    slots = np.full(kinds.shape[0], -1, np.int32)
    nxt = 0
    for i, k in enumerate(kinds):
        if k != 0:
            slots[i] = nxt
            nxt += 1
    return slots


def num_cpow_gates(circuit: CircuitSpec) -> int:
    return int((circuit.arrays[0] != 0).sum())


def _prepare(circuit: CircuitSpec, thetas, angles, codes):
    angles = np.ascontiguousarray(angles, dtype=np.float64)
    if angles.ndim != 2 or angles.shape[1] != circuit.num_data_angles:
        raise ValueError(f"expected angles of shape (rows, "
                         f"{circuit.num_data_angles}), got {angles.shape}")
    rows = angles.shape[0]
    thetas = np.asarray(thetas, dtype=np.float64)
    if thetas.ndim == 1:
        thetas = np.broadcast_to(thetas, (rows, thetas.shape[0]))
    thetas = np.ascontiguousarray(thetas)
    if thetas.shape != (rows, circuit.num_params):
        raise ValueError(f"expected parameters of shape ({rows}, "
                         f"{circuit.num_params}), got {thetas.shape}")
    noisy = codes is not None
    if noisy:
        codes = np.ascontiguousarray(codes, dtype=np.int8)
        if codes.shape != (rows, num_cpow_gates(circuit), 2):
            raise ValueError(f"noise codes shape {codes.shape} does not "
                             f"match {rows} rows x "
                             f"{num_cpow_gates(circuit)} gates")
    else:
        codes = np.zeros((rows, num_cpow_gates(circuit), 2), np.int8)
    return thetas, angles, codes, noisy, rows


def batch_expectations(circuit: CircuitSpec, thetas, angles,
                       codes=None) -> np.ndarray:
    """Observable expectation for each row of (parameters, data angles).

    ``thetas`` may be a single parameter vector (shared by all rows) or one
    row per angle row.  ``codes`` optionally holds per-row Pauli insertion
    codes of shape (rows, n_controlled_gates, 2).
    """
    thetas, angles, codes, noisy, rows = _prepare(circuit, thetas, angles, codes)
    out = np.empty(rows, np.float64)
    if rows:
        kinds, controls, targets, pidx, aidx = circuit.arrays
        _kernel_expect(kinds, controls, targets, pidx, aidx,
                       _cpow_slots(circuit), angles, thetas, codes, noisy,
                       circuit.observable_signs, circuit.num_qubits, out)
    return np.clip(out, -1.0, 1.0)


def batch_states(circuit: CircuitSpec, thetas, angles,
                 codes=None) -> np.ndarray:
    """Final statevector per row.  Allocates rows x 2^n; test-scale only."""
    thetas, angles, codes, noisy, rows = _prepare(circuit, thetas, angles, codes)
    out = np.empty((rows, 1 << circuit.num_qubits), np.complex128)
    if rows:
        kinds, controls, targets, pidx, aidx = circuit.arrays
        _kernel_states(kinds, controls, targets, pidx, aidx,
                       _cpow_slots(circuit), angles, thetas, codes, noisy, out)
    return out
