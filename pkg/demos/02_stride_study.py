"""Circuit-stride study: train the flat ansatz at several strides and the
hierarchical ansatz at stride 1 on the small RGB set, then compare curves.

About 10-15 minutes per configuration on a 2-core machine; trims epochs with
--epochs for a quicker look.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from qconv import AnsatzConfig, KernelShape, TrainConfig, fit
from qconv.ansatz import FQCONV, HQCONV
from qconv.data import resize_set, sample_subset
from qconv.layers import hybrid_dense_net
from qconv.metrics import smoothness_stats
from qconv.synthdata import write_synthetic_cifar

parser = argparse.ArgumentParser()
parser.add_argument("--epochs", type=int, default=20)
parser.add_argument("--filters", type=int, default=2)
parser.add_argument("--strides", type=int, nargs="+", default=[1, 4, 6])
parser.add_argument("--out", default="stride_study")
args = parser.parse_args()

out_dir = Path(args.out)
out_dir.mkdir(exist_ok=True)
batch = write_synthetic_cifar(out_dir / "cifar_synth.bin", n=600, seed=7)
dataset = resize_set(sample_subset(batch, 200, seed=0), (10, 10))
print(f"dataset: {len(dataset)} samples at 10x10x3")

shape = KernelShape(2, 2, 3)
runs = [("hqconv_s1", AnsatzConfig(HQCONV, shape, 1))]
runs += [(f"fqconv_s{s}", AnsatzConfig(FQCONV, shape, s))
         for s in args.strides]

for name, config in runs:
    net = hybrid_dense_net(config, args.filters, (10, 10),
                           np.random.default_rng(1))
    record = fit(net, dataset, TrainConfig(epochs=args.epochs, seed=1))
    record.to_csv(out_dir / f"{name}.csv")
    final = record.entries[-1]
    smooth = smoothness_stats(record.loss_curve(), window=min(9, args.epochs
                              if args.epochs % 2 else args.epochs - 1),
                              polyorder=2)
    print(f"{name:12s} final loss {final.train_loss:.4f} "
          f"acc {final.train_accuracy:.3f} "
          f"loss smoothness avg_l1 {smooth.avg_l1:.4f}")
    sys.stdout.flush()

print(f"per-run curves written to {out_dir}/")
