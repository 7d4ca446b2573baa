import numpy as np
import pytest

from qconv.circuits import CircuitSpec, cxpow, czpow, rx


def random_circuit(rng, num_qubits, num_gates, subset=None):
    """Random gate program; every controlled gate gets a fresh parameter."""
    gates = []
    num_params = 0
    for _ in range(num_gates):
        if num_qubits == 1 or rng.random() < 0.4:
            gates.append(rx(int(rng.integers(num_qubits))))
        else:
            c, t = rng.choice(num_qubits, size=2, replace=False)
            make = czpow if rng.random() < 0.5 else cxpow
            gates.append(make(int(c), int(t), num_params))
            num_params += 1
    if subset is None:
        k = int(rng.integers(1, num_qubits + 1))
        subset = tuple(sorted(rng.choice(num_qubits, size=k, replace=False).tolist()))
    return CircuitSpec(num_qubits, tuple(gates), num_params, subset)


def random_inputs(rng, circuit, theta_span=2.0):
    params = rng.uniform(-theta_span, theta_span, circuit.num_params)
    angles = rng.uniform(0.0, np.pi, circuit.num_data_angles)
    return params, angles


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
