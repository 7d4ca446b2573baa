"""Noise study: train the same flat-ansatz network under depolarizing
trajectory noise at several levels and watch the loss/accuracy impact.

Noise level 0.01 should land close to the noiseless run; 0.1 visibly hurts.
Expect roughly an hour at the defaults on a small machine; use --epochs 5
for a quick qualitative look.
"""

import argparse
from pathlib import Path

import numpy as np

from qconv import AnsatzConfig, KernelShape, NoiseConfig, TrainConfig, fit
from qconv.ansatz import FQCONV
from qconv.data import resize_set, sample_subset
from qconv.layers import hybrid_dense_net
from qconv.synthdata import write_synthetic_cifar

parser = argparse.ArgumentParser()
parser.add_argument("--epochs", type=int, default=20)
parser.add_argument("--levels", type=float, nargs="+",
                    default=[0.0, 0.01, 0.1])
parser.add_argument("--trajectories", type=int, default=8)
parser.add_argument("--out", default="noise_study")
args = parser.parse_args()

out_dir = Path(args.out)
out_dir.mkdir(exist_ok=True)
batch = write_synthetic_cifar(out_dir / "cifar_synth.bin", n=600, seed=7)
dataset = resize_set(sample_subset(batch, 200, seed=0), (10, 10))

shape = KernelShape(2, 2, 3)
for level in args.levels:
    noise = None if level == 0.0 else \
        NoiseConfig(level, trajectories=args.trajectories, seed=5)
    config = AnsatzConfig(FQCONV, shape, 4)
    net = hybrid_dense_net(config, 2, (10, 10), np.random.default_rng(1),
                           noise=noise)
    record = fit(net, dataset,
                 TrainConfig(epochs=args.epochs, seed=1, noise=noise))
    record.to_csv(out_dir / f"noise_{level}.csv")
    final = record.entries[-1]
    print(f"level {level:4}: final loss {final.train_loss:.4f} "
          f"acc {final.train_accuracy:.3f}", flush=True)

print(f"curves written to {out_dir}/")
