"""Tour of the simulator and the two quantum convolution circuit families.

Builds the 12-qubit RGB circuits, encodes a window, inspects expectations,
and shows that the parameter-shift gradient reproduces finite differences.
"""

import numpy as np

from qconv import (KernelShape, build_fqconv, build_hqconv, circuit_text,
                   encode_window, finite_difference_gradient,
                   shift_rule_gradient)
from qconv.ansatz import init_params
from qconv.sim import expectation_z, run_circuit

rng = np.random.default_rng(0)
shape = KernelShape(2, 2, 3)  # a 2x2 RGB window -> 12 qubits

print("== hierarchical ansatz, stride 1 ==")
hq = build_hqconv(shape, stride=1)
print(f"{hq.num_qubits} qubits, {len(hq.gates)} gates, "
      f"{hq.num_params} trainable exponents")
print(circuit_text(hq)[:220] + "...\n")

print("== flat ansatz, stride 4 ==")
fq = build_fqconv(shape, stride=4)
print(f"{fq.num_qubits} qubits, {len(fq.gates)} gates, "
      f"{fq.num_params} trainable exponents")
print("with stride >= pixels-per-channel every controlled pair links two",
      "different channels.\n")

window = rng.uniform(0, 1, (2, 2, 3))  # one RGB image patch in [0, 1]
angles = encode_window(window, shape)
theta = init_params(fq, rng)
state = run_circuit(fq, theta, angles)
value = expectation_z(state, fq.observable_subset)
print(f"window -> mean <Z> feature: {value:+.6f}")

grad = shift_rule_gradient(fq, theta, angles)
fd = finite_difference_gradient(fq, theta, angles, h=1e-5)
print(f"parameter-shift gradient, first entries: {np.round(grad[:4], 6)}")
print(f"max |shift - finite difference| = {np.abs(grad - fd).max():.3e}")
