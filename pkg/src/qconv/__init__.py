"""Hybrid quantum-classical convolutional networks on a dense statevector
simulator: two RGB-aware quantum convolution ansatz families, exact
parameter-shift training, trajectory noise, and the experiment pipeline
around them."""

from .ansatz import (FQCONV, HQCONV, AnsatzConfig, KernelShape, build_fqconv,
                     build_hqconv, encode_window, layout_qubit_index)
from .circuits import CircuitSpec, GateApplication, circuit_text
from .data import (LabeledImageSet, load_cifar_batch, load_idx, resize_area,
                   sample_subset)
from .gradients import finite_difference_gradient, shift_rule_gradient
from .layers import (Network, QuantumConvLayer, classical_benchmark_net,
                     hybrid_conv_net, hybrid_dense_net)
from .metrics import confusion_matrix, savgol_baseline, smoothness_stats
from .noise import NoiseConfig, noisy_expectation
from .sim import (dense_unitary_oracle, expectation_z, init_zero_state,
                  run_circuit)
from .train import (RunRecord, TrainConfig, cross_entropy, evaluate, fit,
                    optimizer_step)

__all__ = [
    "FQCONV", "HQCONV", "AnsatzConfig", "KernelShape", "build_fqconv",
    "build_hqconv", "encode_window", "layout_qubit_index", "CircuitSpec",
    "GateApplication", "circuit_text", "LabeledImageSet", "load_cifar_batch",
    "load_idx", "resize_area", "sample_subset", "finite_difference_gradient",
    "shift_rule_gradient", "Network", "QuantumConvLayer",
    "classical_benchmark_net", "hybrid_conv_net", "hybrid_dense_net",
    "confusion_matrix", "savgol_baseline", "smoothness_stats", "NoiseConfig",
    "noisy_expectation", "dense_unitary_oracle", "expectation_z",
    "init_zero_state", "run_circuit", "RunRecord", "TrainConfig",
    "cross_entropy", "evaluate", "fit", "optimizer_step",
]

__version__ = "0.1.0"
