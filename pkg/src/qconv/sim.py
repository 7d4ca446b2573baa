"""Dense statevector simulator: reference single-state path.

Gates are applied in place over amplitude pairs/quads; only the test oracle
builds full ``2^n x 2^n`` matrices.  States are plain complex128 numpy arrays
of length ``2^num_qubits``.  The hot multi-circuit path lives in
:mod:`qconv.engine`; everything here is the readable contract implementation
the engine is validated against.
"""

from __future__ import annotations

import numpy as np

from .circuits import (CXPOW, CZPOW, MAX_QUBITS, ORACLE_MAX_QUBITS, RX,
                       CircuitSpec, cpow_matrix, rx_matrix)


def init_zero_state(num_qubits: int) -> np.ndarray:
    """All-qubits-|0> state."""
    if not 1 <= num_qubits <= MAX_QUBITS:
        raise ValueError(
            f"num_qubits must be between 1 and {MAX_QUBITS}, got {num_qubits}")
    state = np.zeros(1 << num_qubits, dtype=np.complex128)
    state[0] = 1.0
    return state


def _num_qubits_of(state: np.ndarray) -> int:
    n = int(state.shape[0]).bit_length() - 1
    if 1 << n != state.shape[0]:
        raise ValueError(f"state length {state.shape[0]} is not a power of 2")
    return n


def _pair_view(state: np.ndarray, qubit: int) -> np.ndarray:
    """Reshape so axis 1 is the value of ``qubit`` (little-endian)."""
    return state.reshape(-1, 2, 1 << qubit)


def apply_rx(state: np.ndarray, qubit: int, angle: float) -> np.ndarray:
    """In-place X rotation by ``angle`` radians on ``qubit``."""
    n = _num_qubits_of(state)
    if not 0 <= qubit < n:
        raise IndexError(f"qubit {qubit} out of range for {n} qubits")
    c = np.cos(angle / 2)
    ms = -1j * np.sin(angle / 2)
    v = _pair_view(state, qubit)
    a0 = v[:, 0, :].copy()
    v[:, 0, :] *= c
    v[:, 0, :] += ms * v[:, 1, :]
    v[:, 1, :] *= c
    v[:, 1, :] += ms * a0
    return state


def apply_cpow(state: np.ndarray, control: int, target: int, kind: str,
               exponent: float) -> np.ndarray:
    """In-place czpow/cxpow with trainable exponent ``theta``.

    Amplitudes with control bit 0 are untouched; the control=1 block gets
    ``diag(1, e^{i*pi*theta})`` (czpow) or ``e^{i*pi*theta} Rx(pi*theta)``
    (cxpow) on the target bit.
    """
    n = _num_qubits_of(state)
    if control == target:
        raise ValueError(
            f"invalid gate: control and target must differ (both {target})")
    for q in (control, target):
        if not 0 <= q < n:
            raise IndexError(f"qubit {q} out of range for {n} qubits")
    idx = np.arange(state.shape[0])
    if kind == CZPOW:
        sel = ((idx >> control) & 1 & (idx >> target)).astype(bool)
        state[sel] *= np.exp(1j * np.pi * exponent)
    elif kind == CXPOW:
        g = np.exp(1j * np.pi * exponent)
        a = g * np.cos(np.pi * exponent / 2)
        b = -1j * g * np.sin(np.pi * exponent / 2)
        i0 = idx[(((idx >> control) & 1) == 1) & (((idx >> target) & 1) == 0)]
        i1 = i0 + (1 << target)
        a0 = state[i0]
        a1 = state[i1]
        state[i0] = a * a0 + b * a1
        state[i1] = b * a0 + a * a1
    else:
        raise ValueError(f"not a controlled gate kind: {kind!r}")
    return state


def apply_pauli(state: np.ndarray, qubit: int, which: str) -> np.ndarray:
    """In-place Pauli X/Y/Z on one qubit (noise-trajectory insertions)."""
    n = _num_qubits_of(state)
    if not 0 <= qubit < n:
        raise IndexError(f"qubit {qubit} out of range for {n} qubits")
    v = _pair_view(state, qubit)
    if which == "x":
        v[:, [0, 1], :] = v[:, [1, 0], :]
    elif which == "y":
        a0 = v[:, 0, :].copy()
        v[:, 0, :] = -1j * v[:, 1, :]
        v[:, 1, :] = 1j * a0
    elif which == "z":
        v[:, 1, :] *= -1.0
    else:
        raise ValueError(f"unknown Pauli {which!r}")
    return state


def run_circuit(circuit: CircuitSpec, params, data_angles) -> np.ndarray:
    """Apply the circuit's gates in list order starting from |0...0>."""
    params = np.asarray(params, dtype=np.float64)
    data_angles = np.asarray(data_angles, dtype=np.float64)
    if params.shape != (circuit.num_params,):
        raise ValueError(f"expected {circuit.num_params} parameters, "
                         f"got {params.shape}")
    if data_angles.shape != (circuit.num_data_angles,):
        raise ValueError(f"expected {circuit.num_data_angles} data angles, "
                         f"got {data_angles.shape}")
    state = init_zero_state(circuit.num_qubits)
    slot = 0
    for g in circuit.gates:
        if g.kind == RX:
            apply_rx(state, g.target, data_angles[slot])
            slot += 1
        else:
            apply_cpow(state, g.control, g.target, g.kind,
                       params[g.param_index])
    return state


def expectation_z(state: np.ndarray, subset) -> float:
    """Arithmetic mean of single-qubit <Z_q> over the measured subset."""
    n = _num_qubits_of(state)
    subset = list(subset)
    if not subset:
        raise ValueError("invalid observable: the measured subset is empty")
    probs = np.abs(state) ** 2
    acc = 0.0
    for q in subset:
        if not 0 <= q < n:
            raise IndexError(f"qubit {q} out of range for {n} qubits")
        v = probs.reshape(-1, 2, 1 << q)
        acc += v[:, 0, :].sum() - v[:, 1, :].sum()
    return float(np.clip(acc / len(subset), -1.0, 1.0))


def circuit_expectation(circuit: CircuitSpec, params, data_angles) -> float:
    """Run the circuit and measure its observable subset."""
    state = run_circuit(circuit, params, data_angles)
    return expectation_z(state, circuit.observable_subset)


def _kron_chain(factors) -> np.ndarray:
    acc = np.array([[1.0 + 0.0j]])
    for f in factors:
        acc = np.kron(acc, f)
    return acc


def _embed_single(num_qubits: int, qubit: int, m: np.ndarray) -> np.ndarray:
    eye = np.eye(2, dtype=np.complex128)
    # kron composes high bit first; qubit q is bit q, so iterate q descending.
    return _kron_chain(m if q == qubit else eye
                       for q in range(num_qubits - 1, -1, -1))


def _embed_pair(num_qubits: int, control: int, target: int,
                m4: np.ndarray) -> np.ndarray:
    dim = 1 << num_qubits
    full = np.zeros((dim, dim), dtype=np.complex128)
    basis = [np.array([[1, 0], [0, 0]]), np.array([[0, 1], [0, 0]]),
             np.array([[0, 0], [1, 0]]), np.array([[0, 0], [0, 1]])]
    eye = np.eye(2, dtype=np.complex128)
    for a in range(2):
        for ap in range(2):
            for b in range(2):
                for bp in range(2):
                    coeff = m4[2 * a + b, 2 * ap + bp]
                    if coeff == 0:
                        continue
                    factors = []
                    for q in range(num_qubits - 1, -1, -1):
                        if q == control:
                            factors.append(basis[2 * a + ap])
                        elif q == target:
                            factors.append(basis[2 * b + bp])
                        else:
                            factors.append(eye)
                    full += coeff * _kron_chain(factors)
    return full


def dense_unitary_oracle(circuit: CircuitSpec, params, data_angles) -> np.ndarray:
    """Full circuit unitary built by explicit tensor products (test oracle).

    Deliberately independent of the in-place gate kernels; capped at
    6 qubits because it materialises ``2^n x 2^n`` matrices.
    """
    if circuit.num_qubits > ORACLE_MAX_QUBITS:
        raise ValueError(f"dense oracle supports at most {ORACLE_MAX_QUBITS} "
                         f"qubits, got {circuit.num_qubits}")
    params = np.asarray(params, dtype=np.float64)
    data_angles = np.asarray(data_angles, dtype=np.float64)
    if params.shape != (circuit.num_params,):
        raise ValueError(f"expected {circuit.num_params} parameters, "
                         f"got {params.shape}")
    if data_angles.shape != (circuit.num_data_angles,):
        raise ValueError(f"expected {circuit.num_data_angles} data angles, "
                         f"got {data_angles.shape}")
    n = circuit.num_qubits
    u = np.eye(1 << n, dtype=np.complex128)
    slot = 0
    for g in circuit.gates:
        if g.kind == RX:
            m = _embed_single(n, g.target, rx_matrix(data_angles[slot]))
            slot += 1
        else:
            m = _embed_pair(n, g.control, g.target,
                            cpow_matrix(g.kind, params[g.param_index]))
        u = m @ u
    return u
