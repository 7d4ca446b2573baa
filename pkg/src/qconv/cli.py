"""Command line entry point.

Three subcommands cover the experiment pipeline:

* ``qconv train <config.json>`` -- trains the configured network and writes
  ``run.csv``, ``checkpoint.bin`` and ``config_resolved.json`` into the
  configured output directory.
* ``qconv eval <checkpoint.bin> <config.json>`` -- evaluates a checkpoint and
  writes ``eval.csv`` plus ``confusion.csv``.
* ``qconv report <run_dir>... [--window N --polyorder K --out FILE]`` --
  scores the loss/accuracy curves of finished runs against their
  Savitzky-Golay baselines and writes one smoothness row per curve.

Configs are flat JSON; every omitted field is resolved to its default and the
fully resolved mapping is echoed to ``config_resolved.json`` so a run
directory is self-describing.  Output files are written to a temp name and
renamed into place.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import engine
from .ansatz import FQCONV, HQCONV, AnsatzConfig, KernelShape
from .data import load_cifar_batch, load_idx, resize_set, sample_subset
from .layers import (Network, classical_benchmark_net, hybrid_conv_net,
                     hybrid_dense_net)
from .metrics import smoothness_report_rows
from .noise import DEFAULT_EVAL_TRAJECTORIES, NoiseConfig
from .train import (OptimizerState, RunRecord, TrainConfig, checkpoint_load,
                    checkpoint_save, evaluate, train_epoch)

DATASET_CHANNELS = {"cifar10_small": 3, "mnist": 1, "fashion_mnist": 1}
ARCHITECTURES = ("hybrid_fig2", "hybrid_fig3", "classical_benchmark")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    dataset: str = "cifar10_small"
    cifar_path: str | None = None
    images_path: str | None = None
    labels_path: str | None = None
    subset_size: int | None = 200
    subset_seed: int = 0
    resolution: list | None = None
    architecture: str = "hybrid_fig2"
    ansatz: str = FQCONV
    kernel: list = None
    circuit_stride: int = 1
    filters: int = 8
    spatial_stride: int | list | None = None
    observable_subset: list | None = None
    hidden_units: int = 32
    epochs: int = 90
    batch_size: int = 10
    learning_rate: float = 0.01
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    noise_level: float = 0.0
    noise_trajectories: int = 8
    noise_seed: int = 0
    eval_trajectories: int = DEFAULT_EVAL_TRAJECTORIES
    eval_each_epoch: bool = False
    workers: int | None = None
    output_dir: str = "run"

    def __post_init__(self):
        if self.kernel is None:
            self.kernel = [2, 2]

    @staticmethod
    def from_file(path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}:{e.lineno}: invalid JSON: "
                              f"{e.msg}") from e
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        known = set(ExperimentConfig.__dataclass_fields__)
        for key in raw:
            if key not in known:
                raise ConfigError(f"{path}: unknown config field {key!r}")
        config = ExperimentConfig(**raw)
        config.validate()
        return config

    def validate(self):
        if self.dataset not in DATASET_CHANNELS:
            raise ConfigError(f"field 'dataset': unknown dataset "
                              f"{self.dataset!r}")
        if self.architecture not in ARCHITECTURES:
            raise ConfigError(f"field 'architecture': unknown architecture "
                              f"{self.architecture!r}")
        if self.ansatz not in (HQCONV, FQCONV):
            raise ConfigError(f"field 'ansatz': unknown ansatz "
                              f"{self.ansatz!r}")
        for name in ("filters", "batch_size", "epochs", "circuit_stride",
                     "noise_trajectories", "eval_trajectories"):
            if getattr(self, name) < 1:
                raise ConfigError(f"field {name!r}: must be positive")
        if len(self.kernel) != 2:
            raise ConfigError("field 'kernel': expected [rows, cols]")
        if self.dataset == "cifar10_small":
            if not self.cifar_path:
                raise ConfigError("field 'cifar_path': required for "
                                  "cifar10_small")
            self._check_path(self.cifar_path)
        else:
            if not (self.images_path and self.labels_path):
                raise ConfigError("fields 'images_path'/'labels_path': "
                                  "required for IDX datasets")
            self._check_path(self.images_path)
            self._check_path(self.labels_path)

    @staticmethod
    def _check_path(path):
        if not os.path.exists(path):
            raise ConfigError(f"dataset file does not exist: {path}")

    @property
    def channels(self) -> int:
        return DATASET_CHANNELS[self.dataset]

    def kernel_shape(self) -> KernelShape:
        return KernelShape(self.kernel[0], self.kernel[1], self.channels)

    def noise(self) -> NoiseConfig | None:
        if self.noise_level == 0.0:
            return None
        return NoiseConfig(self.noise_level, self.noise_trajectories,
                           self.noise_seed)

    def train_config(self) -> TrainConfig:
        return TrainConfig(epochs=self.epochs, batch_size=self.batch_size,
                           learning_rate=self.learning_rate,
                           optimizer=self.optimizer, beta1=self.beta1,
                           beta2=self.beta2, eps=self.eps, seed=self.seed,
                           noise=self.noise())

    def load_dataset(self):
        if self.dataset == "cifar10_small":
            data = load_cifar_batch(self.cifar_path)
        else:
            data = load_idx(self.images_path, self.labels_path)
        if self.subset_size is not None and self.subset_size < len(data):
            data = sample_subset(data, self.subset_size, self.subset_seed)
        if self.resolution is not None:
            data = resize_set(data, tuple(self.resolution))
        return data

    def image_shape(self):
        if self.resolution is not None:
            h, w = self.resolution
        elif self.dataset == "cifar10_small":
            h = w = 32
        else:
            h = w = 28
        return h, w, self.channels

    def build_network(self) -> Network:
        rng = np.random.default_rng(self.seed)
        h, w, _ = self.image_shape()
        if self.architecture == "classical_benchmark":
            return classical_benchmark_net(self.image_shape(), rng)
        ansatz_config = AnsatzConfig(
            self.ansatz, self.kernel_shape(), self.circuit_stride,
            tuple(self.observable_subset) if self.observable_subset else None)
        spatial = self.spatial_stride
        if isinstance(spatial, list):
            spatial = tuple(spatial)
        builder = hybrid_dense_net if self.architecture == "hybrid_fig2" \
            else hybrid_conv_net
        kwargs = {"hidden": self.hidden_units} \
            if self.architecture == "hybrid_fig2" else {}
        return builder(ansatz_config, self.filters, (h, w), rng,
                       spatial_stride=spatial, noise=self.noise(), **kwargs)


def _atomic_write(path: Path, text: str):
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def cmd_train(config_path: str) -> int:
    config = ExperimentConfig.from_file(config_path)
    engine.set_workers(config.workers)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset = config.load_dataset()
    net = config.build_network()
    train_config = config.train_config()
    state = OptimizerState(net.parameters(), train_config)

    record = RunRecord()
    for epoch in range(1, config.epochs + 1):
        entry = train_epoch(net, dataset, train_config, state, epoch)
        if config.eval_each_epoch:
            entry.eval_accuracy, _ = evaluate(net, dataset)
        record.entries.append(entry)
        print(f"epoch {entry.epoch}/{config.epochs}  "
              f"loss={entry.train_loss:.4f}  "
              f"acc={entry.train_accuracy:.3f}  "
              f"({entry.wall_time_s:.1f}s)", flush=True)
    _, record.confusion = evaluate(net, dataset)

    record.to_csv(out_dir / "run.csv.tmp")
    os.replace(out_dir / "run.csv.tmp", out_dir / "run.csv")
    checkpoint_save(out_dir / "checkpoint.bin", net, state)
    _atomic_write(out_dir / "config_resolved.json",
                  json.dumps(asdict(config), indent=2) + "\n")
    print(f"run artifacts written to {out_dir}")
    return 0


def cmd_eval(checkpoint_path: str, config_path: str) -> int:
    config = ExperimentConfig.from_file(config_path)
    engine.set_workers(config.workers)
    net = config.build_network()
    checkpoint_load(checkpoint_path, net)
    dataset = config.load_dataset()
    trajectories = config.eval_trajectories if config.noise() else None
    accuracy, confusion = evaluate(net, dataset, trajectories=trajectories)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _atomic_write(out_dir / "eval.csv", f"accuracy\n{accuracy!r}\n")
    _atomic_write(out_dir / "confusion.csv", "\n".join(
        ",".join(str(v) for v in row) for row in confusion) + "\n")
    print(f"accuracy {accuracy:.4f}; wrote eval.csv and confusion.csv "
          f"to {out_dir}")
    return 0


def cmd_report(run_dirs, window: int, polyorder: int, out: str) -> int:
    curves = {}
    for run_dir in run_dirs:
        run_csv = Path(run_dir) / "run.csv"
        if not run_csv.exists():
            raise ConfigError(f"no run.csv in {run_dir}")
        record = RunRecord.from_csv(run_csv)
        name = Path(run_dir).name
        curves[f"{name}_loss"] = record.loss_curve()
        # accuracy scored in percentage points
        curves[f"{name}_accuracy"] = 100.0 * record.accuracy_curve()
    rows = smoothness_report_rows(curves, window, polyorder)
    _atomic_write(Path(out), "\n".join(rows) + "\n")
    print(f"wrote {out} ({len(rows) - 1} curves)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qconv",
        description="hybrid quantum-classical convolution experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    p_train = sub.add_parser("train", help="train a configured network")
    p_train.add_argument("config")
    p_eval = sub.add_parser("eval", help="evaluate a checkpoint")
    p_eval.add_argument("checkpoint")
    p_eval.add_argument("config")
    p_report = sub.add_parser("report", help="smoothness report over runs")
    p_report.add_argument("run_dirs", nargs="+")
    p_report.add_argument("--window", type=int, default=9)
    p_report.add_argument("--polyorder", type=int, default=3)
    p_report.add_argument("--out", default="smoothness.csv")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "train":
            return cmd_train(args.config)
        if args.command == "eval":
            return cmd_eval(args.checkpoint, args.config)
        return cmd_report(args.run_dirs, args.window, args.polyorder,
                          args.out)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
