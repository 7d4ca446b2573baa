import numpy as np
import pytest

from conftest import random_circuit, random_inputs
from qconv.circuits import CircuitSpec, cxpow, czpow, rx
from qconv.engine import batch_expectations, batch_states, num_cpow_gates
from qconv.sim import (apply_cpow, apply_pauli, apply_rx, expectation_z,
                       run_circuit)


def test_states_match_reference_simulator(rng):
    for _ in range(60):
        nq = int(rng.integers(1, 7))
        circ = random_circuit(rng, nq, int(rng.integers(1, 21)))
        params, angles = random_inputs(rng, circ)
        got = batch_states(circ, params, angles[None, :])[0]
        ref = run_circuit(circ, params, angles)
        assert np.abs(got - ref).max() < 1e-13


def test_expectations_match_reference(rng):
    circ = random_circuit(rng, 5, 15)
    rows = 17
    thetas = rng.uniform(-2, 2, (rows, circ.num_params))
    angles = rng.uniform(0, np.pi, (rows, circ.num_data_angles))
    got = batch_expectations(circ, thetas, angles)
    for r in range(rows):
        state = run_circuit(circ, thetas[r], angles[r])
        assert abs(got[r] - expectation_z(state, circ.observable_subset)) < 1e-13


def test_shared_theta_broadcast(rng):
    circ = random_circuit(rng, 4, 10)
    params, _ = random_inputs(rng, circ)
    angles = rng.uniform(0, np.pi, (6, circ.num_data_angles))
    got = batch_expectations(circ, params, angles)
    tiled = batch_expectations(circ, np.tile(params, (6, 1)), angles)
    assert np.array_equal(got, tiled)


def test_noise_codes_match_manual_insertion(rng):
    circ = CircuitSpec(
        3, (rx(0), rx(1), rx(2), czpow(0, 1, 0), cxpow(1, 2, 1),
            cxpow(0, 2, 2)), 3, (0, 1, 2))
    params, angles = random_inputs(rng, circ)
    codes = rng.integers(0, 4, (5, num_cpow_gates(circ), 2)).astype(np.int8)
    got = batch_states(circ, params, np.tile(angles, (5, 1)), codes=codes)

    names = {1: "x", 2: "y", 3: "z"}
    for t in range(5):
        state = np.zeros(8, dtype=complex)
        state[0] = 1.0
        slot = 0
        for g in circ.gates:
            if g.kind == "rx":
                apply_rx(state, g.target, angles[slot])
                slot += 1
            else:
                apply_cpow(state, g.control, g.target, g.kind,
                           params[g.param_index])
                gate_slot = slot_of(circ, g)
                for k, q in enumerate((g.control, g.target)):
                    code = codes[t, gate_slot, k]
                    if code:
                        apply_pauli(state, q, names[code])
        assert np.abs(got[t] - state).max() < 1e-13


def slot_of(circ, gate):
    slot = 0
    for g in circ.gates:
        if g is gate:
            return slot
        if g.kind != "rx":
            slot += 1
    raise AssertionError


def test_row_count_checks(rng):
    circ = random_circuit(rng, 3, 8)
    params, angles = random_inputs(rng, circ)
    with pytest.raises(ValueError, match="angles"):
        batch_expectations(circ, params, angles)  # missing row axis
    with pytest.raises(ValueError, match="parameters"):
        batch_expectations(circ, params[:-1] if circ.num_params else [0.0],
                           angles[None, :])


def test_empty_rows(rng):
    circ = random_circuit(rng, 3, 8)
    params, _ = random_inputs(rng, circ)
    out = batch_expectations(circ, params,
                             np.zeros((0, circ.num_data_angles)))
    assert out.shape == (0,)


def test_expectation_bound(rng):
    circ = random_circuit(rng, 6, 20)
    thetas = rng.uniform(-2, 2, (40, circ.num_params))
    angles = rng.uniform(0, np.pi, (40, circ.num_data_angles))
    values = batch_expectations(circ, thetas, angles)
    assert values.min() >= -1.0 and values.max() <= 1.0
