"""Training loop, loss, optimizers, evaluation and checkpoints.

Everything is deterministic given the config seed: the epoch shuffle, the
parameter initialisation (owned by the caller building the net) and the
per-sample noise streams are all derived from ``numpy`` seed sequences with
fixed derivation keys, so a rerun reproduces every recorded number
bit-for-bit in the noiseless case and trajectory-for-trajectory otherwise.
"""

from __future__ import annotations

import os
import struct
import time
from dataclasses import dataclass, field

import numpy as np

from .layers import Network
from .metrics import confusion_matrix
from .noise import NoiseConfig

PROB_FLOOR = 1e-12

CHECKPOINT_MAGIC = b"QCNV"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 90
    batch_size: int = 10
    learning_rate: float = 0.01
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    noise: NoiseConfig | None = None

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch size must be at least 1")
        if self.epochs < 1:
            raise ValueError("epoch count must be at least 1")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    train_accuracy: float
    eval_accuracy: float | None
    wall_time_s: float


@dataclass
class RunRecord:
    entries: list[EpochRecord] = field(default_factory=list)
    confusion: np.ndarray | None = None

    def loss_curve(self) -> np.ndarray:
        return np.array([e.train_loss for e in self.entries])

    def accuracy_curve(self) -> np.ndarray:
        return np.array([e.train_accuracy for e in self.entries])

    def to_csv(self, path):
        lines = ["epoch,train_loss,train_accuracy,eval_accuracy,wall_time_s"]
        for e in self.entries:
            ev = "" if e.eval_accuracy is None else repr(e.eval_accuracy)
            lines.append(f"{e.epoch},{e.train_loss!r},{e.train_accuracy!r},"
                         f"{ev},{e.wall_time_s!r}")
        path = str(path)
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    @staticmethod
    def from_csv(path) -> "RunRecord":
        with open(path) as fh:
            header = fh.readline().strip()
            if header != ("epoch,train_loss,train_accuracy,"
                          "eval_accuracy,wall_time_s"):
                raise ValueError(f"{path}: unexpected run log header "
                                 f"{header!r}")
            record = RunRecord()
            for line in fh:
                if not line.strip():
                    continue
                ep, loss, acc, ev, wt = line.strip().split(",")
                record.entries.append(EpochRecord(
                    int(ep), float(loss), float(acc),
                    float(ev) if ev else None, float(wt)))
        return record


def cross_entropy(probs: np.ndarray, label: int) -> float:
    """Negative log likelihood in nats with a 1e-12 probability floor."""
    probs = np.asarray(probs, np.float64)
    if not 0 <= label < probs.shape[0]:
        raise ValueError(f"label {label} out of range for "
                         f"{probs.shape[0]} classes")
    if abs(probs.sum() - 1.0) > 1e-6:
        raise ValueError(f"probabilities sum to {probs.sum()}, not 1")
    return float(-np.log(max(probs[label], PROB_FLOOR)))


class OptimizerState:
    """Adam moments (or nothing, for sgd) keyed by parameter name."""

    def __init__(self, params: dict[str, np.ndarray], config: TrainConfig):
        self.config = config
        self.step_count = 0
        if config.optimizer == "adam":
            self.m = {k: np.zeros_like(v) for k, v in params.items()}
            self.v = {k: np.zeros_like(v) for k, v in params.items()}
        else:
            self.m = {}
            self.v = {}


def optimizer_step(params: dict[str, np.ndarray],
                   grads: dict[str, np.ndarray],
                   state: OptimizerState,
                   config: TrainConfig) -> OptimizerState:
    """One in-place update over every named parameter array."""
    for name, p in params.items():
        if grads[name].shape != p.shape:
            raise ValueError(f"gradient shape {grads[name].shape} does not "
                             f"match parameter {name} {p.shape}")
    state.step_count += 1
    lr = config.learning_rate
    if config.optimizer == "sgd":
        for name, p in params.items():
            p -= lr * grads[name]
        return state
    b1, b2 = config.beta1, config.beta2
    t = state.step_count
    for name, p in params.items():
        g = grads[name]
        state.m[name] = b1 * state.m[name] + (1 - b1) * g
        state.v[name] = b2 * state.v[name] + (1 - b2) * g * g
        m_hat = state.m[name] / (1 - b1 ** t)
        v_hat = state.v[name] / (1 - b2 ** t)
        p -= lr * m_hat / (np.sqrt(v_hat) + config.eps)
    return state


def _noise_seed(config: TrainConfig, epoch: int, sample_index: int) -> int:
    base = config.noise.seed if config.noise else 0
    ss = np.random.SeedSequence((base, config.seed, epoch, sample_index))
    return int(ss.generate_state(1)[0])


def train_epoch(net: Network, dataset, config: TrainConfig,
                state: OptimizerState, epoch: int) -> EpochRecord:
    """One shuffled pass with per-batch mean-gradient updates."""
    n = len(dataset.labels)
    if n == 0:
        raise ValueError("dataset is empty")
    start = time.perf_counter()
    order = np.random.default_rng(
        np.random.SeedSequence((config.seed, epoch))).permutation(n)
    params = net.parameters()
    losses = []
    hits = 0
    for lo in range(0, n, config.batch_size):
        batch = order[lo:lo + config.batch_size]
        net.zero_grads()
        for i in batch:
            probs = net.backward(dataset.images[i], int(dataset.labels[i]),
                                 noise_seed=_noise_seed(config, epoch, int(i)))
            losses.append(cross_entropy(probs, int(dataset.labels[i])))
            hits += int(np.argmax(probs) == dataset.labels[i])
        grads = net.gradients()
        for g in grads.values():
            g /= len(batch)
        optimizer_step(params, grads, state, config)
    return EpochRecord(epoch, float(np.mean(losses)), hits / n, None,
                       time.perf_counter() - start)


def evaluate(net: Network, dataset, trajectories=None,
             noise_seed_base: int = 1) -> tuple[float, np.ndarray]:
    """Argmax accuracy and the confusion matrix over a dataset."""
    n = len(dataset.labels)
    if n == 0:
        raise ValueError("dataset is empty")
    preds = np.empty(n, np.int64)
    for i in range(n):
        seed = int(np.random.SeedSequence(
            (noise_seed_base, i)).generate_state(1)[0])
        probs = net.forward(dataset.images[i], noise_seed=seed) \
            if trajectories is None else \
            _noisy_forward(net, dataset.images[i], seed, trajectories)
        preds[i] = int(np.argmax(probs))
    matrix = confusion_matrix(preds, dataset.labels)
    accuracy = float(np.trace(matrix) / n)
    return accuracy, matrix


def _noisy_forward(net, image, seed, trajectories):
    x = image
    for layer in net.layers:
        if hasattr(layer, "circuit"):
            x = layer.forward(x, noise_seed=seed, trajectories=trajectories)
        else:
            x = layer.forward(x)
    from .layers import softmax
    return softmax(x)


def fit(net: Network, dataset, config: TrainConfig,
        eval_dataset=None, epoch_callback=None) -> RunRecord:
    """Full training run; returns the per-epoch record with a final
    confusion matrix on the training set."""
    state = OptimizerState(net.parameters(), config)
    record = RunRecord()
    for epoch in range(1, config.epochs + 1):
        entry = train_epoch(net, dataset, config, state, epoch)
        if eval_dataset is not None:
            entry.eval_accuracy, _ = evaluate(net, eval_dataset)
        record.entries.append(entry)
        if epoch_callback is not None and epoch_callback(entry):
            break
    _, record.confusion = evaluate(net, dataset)
    return record


class CheckpointFormatError(ValueError):
    def __init__(self, message, offset):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class CheckpointVersionError(ValueError):
    pass


def save_checkpoint(path, arrays: dict[str, np.ndarray],
                    version: int = CHECKPOINT_VERSION) -> None:
    """Write named f64 blocks: magic, u32 version, u32 block count, then
    per block a u32 name length, the utf-8 name, a u64 value count and the
    little-endian float64 values."""
    chunks = [CHECKPOINT_MAGIC, struct.pack("<II", version, len(arrays))]
    for name in sorted(arrays):
        encoded = name.encode("utf-8")
        values = np.ascontiguousarray(arrays[name], dtype="<f8")
        chunks.append(struct.pack("<I", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<Q", values.size))
        chunks.append(values.tobytes())
    tmp = str(path) + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(b"".join(chunks))
    os.replace(tmp, str(path))


def load_checkpoint(path) -> dict[str, np.ndarray]:
    with open(path, "rb") as fh:
        blob = fh.read()

    def need(offset, count, what):
        if offset + count > len(blob):
            raise CheckpointFormatError(f"truncated checkpoint while reading "
                                        f"{what}", offset)
        return blob[offset:offset + count]

    if need(0, 4, "magic") != CHECKPOINT_MAGIC:
        raise CheckpointFormatError(
            f"bad magic {blob[:4]!r}, expected {CHECKPOINT_MAGIC!r}", 0)
    version, nblocks = struct.unpack("<II", need(4, 8, "header"))
    if version != CHECKPOINT_VERSION:
        raise CheckpointVersionError(
            f"checkpoint format version {version} is not the supported "
            f"version {CHECKPOINT_VERSION}")
    offset = 12
    arrays = {}
    for _ in range(nblocks):
        (name_len,) = struct.unpack("<I", need(offset, 4, "name length"))
        offset += 4
        name = need(offset, name_len, "name").decode("utf-8")
        offset += name_len
        (count,) = struct.unpack("<Q", need(offset, 8, "value count"))
        offset += 8
        raw = need(offset, 8 * count, f"values of {name}")
        offset += 8 * count
        arrays[name] = np.frombuffer(raw, dtype="<f8").copy()
    return arrays


def checkpoint_save(path, net: Network, state: OptimizerState) -> None:
    """Persist every network parameter and the optimizer moments."""
    arrays = {}
    for name, value in net.parameters().items():
        arrays[f"param/{name}"] = value
        arrays[f"shape/{name}"] = np.array(value.shape, np.float64)
    for name, value in state.m.items():
        arrays[f"adam.m/{name}"] = value
        arrays[f"adam.v/{name}"] = state.v[name]
    arrays["step_count"] = np.array([state.step_count], np.float64)
    save_checkpoint(path, arrays)


def checkpoint_load(path, net: Network,
                    state: OptimizerState | None = None) -> None:
    """Restore parameters (and optimizer moments) saved by checkpoint_save."""
    arrays = load_checkpoint(path)
    for name, value in net.parameters().items():
        key = f"param/{name}"
        if key not in arrays:
            raise ValueError(f"checkpoint is missing parameter {name}")
        stored_shape = tuple(arrays[f"shape/{name}"].astype(int))
        if stored_shape != value.shape:
            raise ValueError(f"checkpoint parameter {name} has shape "
                             f"{stored_shape}, network wants {value.shape}")
        value[:] = arrays[key].reshape(value.shape)
    if state is not None:
        state.step_count = int(arrays["step_count"][0])
        for name in state.m:
            state.m[name] = arrays[f"adam.m/{name}"]\
                .reshape(state.m[name].shape)
            state.v[name] = arrays[f"adam.v/{name}"]\
                .reshape(state.v[name].shape)
