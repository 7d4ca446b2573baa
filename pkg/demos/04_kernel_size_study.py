"""Kernel-size study: 12-qubit (2x2 RGB) vs 18-qubit (2x3 RGB) hierarchical
ansatz, one filter each, counting the epochs until 20% training accuracy.

The 18-qubit side simulates 262k amplitudes per circuit; budget roughly
40 minutes per epoch on 2 cores (the run exits early once the threshold is
reached).
"""

import argparse
from pathlib import Path

import numpy as np

from qconv import AnsatzConfig, KernelShape, TrainConfig
from qconv.ansatz import HQCONV
from qconv.data import resize_set, sample_subset
from qconv.layers import hybrid_dense_net
from qconv.synthdata import write_synthetic_cifar
from qconv.train import OptimizerState, train_epoch

parser = argparse.ArgumentParser()
parser.add_argument("--seeds", type=int, nargs="+", default=[11, 12, 13])
parser.add_argument("--cap", type=int, default=40)
parser.add_argument("--threshold", type=float, default=0.20)
parser.add_argument("--out", default="kernel_study")
args = parser.parse_args()

out_dir = Path(args.out)
out_dir.mkdir(exist_ok=True)
batch = write_synthetic_cifar(out_dir / "cifar_synth.bin", n=600, seed=7)
dataset = resize_set(sample_subset(batch, 200, seed=0), (10, 10))

results = {}
for tag, shape in (("12q_2x2", KernelShape(2, 2, 3)),
                   ("18q_2x3", KernelShape(2, 3, 3))):
    results[tag] = []
    for seed in args.seeds:
        net = hybrid_dense_net(AnsatzConfig(HQCONV, shape, 1), 1, (10, 10),
                               np.random.default_rng(seed))
        config = TrainConfig(epochs=args.cap, seed=seed)
        state = OptimizerState(net.parameters(), config)
        hit = args.cap + 1
        for epoch in range(1, args.cap + 1):
            entry = train_epoch(net, dataset, config, state, epoch)
            print(f"{tag} seed {seed} epoch {epoch}: "
                  f"acc {entry.train_accuracy:.3f} "
                  f"({entry.wall_time_s:.0f}s)", flush=True)
            if entry.train_accuracy >= args.threshold:
                hit = epoch
                break
        results[tag].append(hit)
        print(f"{tag} seed {seed}: reached {args.threshold:.0%} at epoch "
              f"{hit}", flush=True)

for tag, hits in results.items():
    print(f"{tag}: epochs to threshold {hits}, median {np.median(hits)}")
