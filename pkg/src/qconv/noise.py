"""Trajectory (Monte Carlo wavefunction) depolarizing noise.

The noise model is a scalar level ``p``: after every controlled gate, each of
the two touched qubits independently suffers a uniform random Pauli (X, Y or
Z) with probability ``p``.  Expectations under noise are averaged over
stochastic pure-state trajectories; everything is seeded, so a given
(circuit, parameters, angles, config) always reproduces the same number.

Identical trajectories are collapsed to one weighted evaluation before
hitting the simulator -- at small ``p`` most trajectories contain no Pauli at
all, which makes the noisy path only modestly more expensive than the
noiseless one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import CircuitSpec
from .engine import batch_expectations, num_cpow_gates
from .sim import apply_pauli

DEFAULT_TRAIN_TRAJECTORIES = 8
DEFAULT_EVAL_TRAJECTORIES = 256

_PAULI_NAMES = ("x", "y", "z")


@dataclass(frozen=True)
class NoiseConfig:
    level: float
    trajectories: int = DEFAULT_TRAIN_TRAJECTORIES
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.level <= 1.0:
            raise ValueError(f"noise level must be in [0, 1], got {self.level}")
        if self.trajectories < 1:
            raise ValueError("trajectory count must be at least 1")


def apply_depolarizing_after_gate(state: np.ndarray, qubits, level: float,
                                  rng: np.random.Generator) -> np.ndarray:
    """One trajectory step: maybe insert a Pauli on each affected qubit.

    Draw order is fixed per qubit: one uniform for the hit test, then (only
    on a hit) one integer for the Pauli choice.
    """
    if not 0.0 <= level <= 1.0:
        raise ValueError(f"noise level must be in [0, 1], got {level}")
    for q in qubits:
        if rng.random() < level:
            apply_pauli(state, q, _PAULI_NAMES[rng.integers(3)])
    return state


def sample_noise_codes(circuit: CircuitSpec, level: float,
                       trajectories: int,
                       rng: np.random.Generator) -> np.ndarray:
    """Pauli insertion codes (trajectories, n_controlled_gates, 2).

    Code 0 is identity; 1..3 are X, Y, Z.  Entry [t, g, 0] acts on gate g's
    control and [t, g, 1] on its target, applied right after the gate.
    """
    shape = (trajectories, num_cpow_gates(circuit), 2)
    hits = rng.random(shape) < level
    picks = rng.integers(1, 4, shape, dtype=np.int8)
    return np.where(hits, picks, np.int8(0))


def collapse_trajectories(codes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unique trajectory patterns and their weights (counts / trajectories)."""
    t = codes.shape[0]
    flat = codes.reshape(t, -1)
    uniq, counts = np.unique(flat, axis=0, return_counts=True)
    return uniq.reshape(-1, *codes.shape[1:]), counts / t


def noisy_expectation(circuit: CircuitSpec, params, data_angles,
                      noise: NoiseConfig) -> float:
    """Mean observable expectation over seeded depolarizing trajectories."""
    params = np.asarray(params, np.float64)
    angles2 = np.asarray(data_angles, np.float64)[None, :]
    if noise.level == 0.0 or num_cpow_gates(circuit) == 0:
        return float(batch_expectations(circuit, params, angles2)[0])
    rng = np.random.default_rng(noise.seed)
    codes = sample_noise_codes(circuit, noise.level, noise.trajectories, rng)
    uniq, weights = collapse_trajectories(codes)
    values = batch_expectations(circuit, params,
                                np.repeat(angles2, uniq.shape[0], axis=0),
                                codes=uniq)
    return float(values @ weights)
