"""Network layers: the quantum convolution layer and the classical stack.

Image inputs are (H, W, C) float arrays in [0, 1]; feature maps between
layers are channels-first (C, H, W); dense layers take flat vectors.  Every
layer caches what its backward pass needs during forward; ``backward``
accumulates parameter gradients into ``self.grads`` and returns the gradient
w.r.t. its input.

The quantum layer evaluates one circuit per (filter, window) via the batch
engine.  Its backward pass expands every window evaluation into the
parameter-shift rows of :func:`qconv.gradients.shift_plan` and contracts the
resulting expectations with the upstream gradient.  Under noise, forward and
backward share the same per-image trajectory patterns (common random
numbers), collapsed to unique patterns with multiplicity weights.
"""

from __future__ import annotations

import numpy as np

from .ansatz import AnsatzConfig, build_ansatz, encode_window, init_params
from .engine import batch_expectations
from .gradients import shift_plan
from .noise import NoiseConfig, collapse_trajectories, sample_noise_codes


def _glorot(rng, fan_in, fan_out, shape):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, shape)


class QuantumConvLayer:
    """Sliding-window bank of quantum convolution filters."""

    def __init__(self, config: AnsatzConfig, filters: int,
                 rng: np.random.Generator, spatial_stride=None,
                 noise: NoiseConfig | None = None):
        if filters < 1:
            raise ValueError("need at least one filter")
        self.config = config
        self.circuit = build_ansatz(config)
        self.filters = filters
        shape = config.shape
        if spatial_stride is None:
            spatial_stride = (shape.rows, shape.cols)
        elif np.isscalar(spatial_stride):
            spatial_stride = (int(spatial_stride), int(spatial_stride))
        if min(spatial_stride) < 1:
            raise ValueError("spatial stride must be at least 1")
        self.spatial_stride = tuple(spatial_stride)
        self.noise = noise
        theta = np.stack([init_params(self.circuit, rng)
                          for _ in range(filters)])
        self.params = {"theta": theta}
        self.grads = {"theta": np.zeros_like(theta)}
        self._cache = None

    def output_shape(self, image_shape) -> tuple[int, int, int]:
        h, w, c = image_shape
        shape = self.config.shape
        if c != shape.channels:
            raise ValueError(f"image has {c} channels, kernel wants "
                             f"{shape.channels}")
        if h < shape.rows or w < shape.cols:
            raise ValueError(f"image {h}x{w} is smaller than the "
                             f"{shape.rows}x{shape.cols} kernel")
        sh, sw = self.spatial_stride
        return (self.filters, (h - shape.rows) // sh + 1,
                (w - shape.cols) // sw + 1)

    def _window_angles(self, image: np.ndarray) -> tuple[np.ndarray, tuple]:
        image = np.asarray(image, np.float64)
        if image.ndim != 3:
            raise ValueError(f"expected an (H, W, C) image, got shape "
                             f"{image.shape}")
        _, oh, ow = self.output_shape(image.shape)
        shape = self.config.shape
        sh, sw = self.spatial_stride
        angles = np.empty((oh * ow, shape.num_qubits))
        k = 0
        for i in range(oh):
            for j in range(ow):
                win = image[i * sh:i * sh + shape.rows,
                            j * sw:j * sw + shape.cols, :]
                angles[k] = encode_window(win, shape)
                k += 1
        return angles, (oh, ow)

    def _noise_patterns(self, noise_seed, trajectories):
        if self.noise is None or self.noise.level == 0.0:
            return None, None
        n_traj = trajectories or self.noise.trajectories
        seed = self.noise.seed if noise_seed is None else noise_seed
        rng = np.random.default_rng(seed)
        codes = sample_noise_codes(self.circuit, self.noise.level, n_traj, rng)
        return collapse_trajectories(codes)

    def forward(self, image: np.ndarray, noise_seed=None,
                trajectories=None) -> np.ndarray:
        angles, (oh, ow) = self._window_angles(image)
        nwin = angles.shape[0]
        f = self.filters
        theta = self.params["theta"]
        uniq, weights = self._noise_patterns(noise_seed, trajectories)
        if uniq is None:
            rows_angles = np.tile(angles, (f, 1))
            rows_theta = np.repeat(theta, nwin, axis=0)
            values = batch_expectations(self.circuit, rows_theta, rows_angles)
            out = values.reshape(f, nwin)
        else:
            u = uniq.shape[0]
            rows_angles = np.repeat(np.tile(angles, (f, 1)), u, axis=0)
            rows_theta = np.repeat(theta, nwin * u, axis=0)
            rows_codes = np.tile(uniq, (f * nwin, 1, 1))
            values = batch_expectations(self.circuit, rows_theta, rows_angles,
                                        codes=rows_codes)
            out = values.reshape(f, nwin, u) @ weights
        self._cache = (angles, (oh, ow), uniq, weights)
        return out.reshape(f, oh, ow)

    def backward(self, upstream: np.ndarray, noise_seed=None,
                 trajectories=None):
        if self._cache is None:
            raise RuntimeError("backward called before forward")
        angles, (oh, ow), uniq, weights = self._cache
        f = self.filters
        upstream = np.asarray(upstream, np.float64)
        if upstream.shape != (f, oh, ow):
            raise ValueError(f"upstream gradient shape {upstream.shape} does "
                             f"not match output {(f, oh, ow)}")
        nwin = oh * ow
        plan = shift_plan(self.circuit)
        r = plan.num_rows
        theta = self.params["theta"]
        shifted = np.stack([plan.shifted_params(theta[i]) for i in range(f)])
        rows_theta = np.repeat(shifted.reshape(f * r, -1), nwin, axis=0) \
            .reshape(f, r, nwin, -1).transpose(0, 2, 1, 3) \
            .reshape(f * nwin * r, -1)
        rows_angles = np.repeat(np.tile(angles, (f, 1)), r, axis=0)
        if uniq is None:
            values = batch_expectations(self.circuit, rows_theta, rows_angles)
            expect = values.reshape(f, nwin, r)
        else:
            u = uniq.shape[0]
            rows_theta = np.repeat(rows_theta, u, axis=0)
            rows_angles = np.repeat(rows_angles, u, axis=0)
            rows_codes = np.tile(uniq, (f * nwin * r, 1, 1))
            values = batch_expectations(self.circuit, rows_theta, rows_angles,
                                        codes=rows_codes)
            expect = values.reshape(f, nwin, r, u) @ weights
        up = upstream.reshape(f, nwin)
        per_row = np.einsum("fw,fwr->fr", up, expect)
        self.grads["theta"] += per_row @ plan.combine
        return None  # first layer: no gradient w.r.t. pixels

    def zero_grads(self):
        self.grads["theta"][:] = 0.0


class ChannelsFirst:
    """(H, W, C) image -> (C, H, W) feature map."""

    params: dict = {}
    grads: dict = {}

    def forward(self, x):
        if x.ndim != 3:
            raise ValueError(f"expected an (H, W, C) image, got {x.shape}")
        return np.ascontiguousarray(np.transpose(x, (2, 0, 1)))

    def backward(self, upstream):
        return np.transpose(upstream, (1, 2, 0))


class Conv2d:
    """Valid 2-D cross-correlation, stride 1."""

    def __init__(self, in_channels, out_channels, kernel, rng):
        self.kernel = kernel
        fan_in = in_channels * kernel * kernel
        fan_out = out_channels * kernel * kernel
        self.params = {
            "weight": _glorot(rng, fan_in, fan_out,
                              (out_channels, in_channels, kernel, kernel)),
            "bias": np.zeros(out_channels),
        }
        self.grads = {k: np.zeros_like(v) for k, v in self.params.items()}
        self._cache = None

    def _im2col(self, x):
        c, h, w = x.shape
        k = self.kernel
        oh, ow = h - k + 1, w - k + 1
        cols = np.empty((c * k * k, oh * ow))
        idx = 0
        for ci in range(c):
            for ki in range(k):
                for kj in range(k):
                    cols[idx] = x[ci, ki:ki + oh, kj:kj + ow].reshape(-1)
                    idx += 1
        return cols, oh, ow

    def forward(self, x):
        f, cin, k, _ = self.params["weight"].shape
        if x.ndim != 3 or x.shape[0] != cin:
            raise ValueError(f"expected ({cin}, H, W) input, got {x.shape}")
        if x.shape[1] < k or x.shape[2] < k:
            raise ValueError(f"input {x.shape[1]}x{x.shape[2]} smaller than "
                             f"the {k}x{k} kernel")
        cols, oh, ow = self._im2col(x)
        wmat = self.params["weight"].reshape(f, -1)
        out = wmat @ cols + self.params["bias"][:, None]
        self._cache = (x.shape, cols)
        return out.reshape(f, oh, ow)

    def backward(self, upstream):
        if self._cache is None:
            raise RuntimeError("backward called before forward")
        x_shape, cols = self._cache
        f, cin, k, _ = self.params["weight"].shape
        up = upstream.reshape(f, -1)
        self.grads["weight"] += (up @ cols.T).reshape(f, cin, k, k)
        self.grads["bias"] += up.sum(axis=1)
        dcols = self.params["weight"].reshape(f, -1).T @ up
        dx = np.zeros(x_shape)
        _, h, w = x_shape
        oh, ow = h - k + 1, w - k + 1
        idx = 0
        for ci in range(cin):
            for ki in range(k):
                for kj in range(k):
                    dx[ci, ki:ki + oh, kj:kj + ow] += \
                        dcols[idx].reshape(oh, ow)
                    idx += 1
        return dx


class MaxPool2d:
    """2x2 max pooling, stride 2; odd trailing rows/cols are dropped."""

    params: dict = {}
    grads: dict = {}

    def __init__(self):
        self._cache = None

    def forward(self, x):
        c, h, w = x.shape
        oh, ow = h // 2, w // 2
        if oh == 0 or ow == 0:
            raise ValueError(f"input {h}x{w} too small for 2x2 pooling")
        v = x[:, :2 * oh, :2 * ow].reshape(c, oh, 2, ow, 2) \
            .transpose(0, 1, 3, 2, 4).reshape(c, oh, ow, 4)
        arg = v.argmax(axis=3)
        self._cache = (x.shape, arg)
        return np.take_along_axis(v, arg[..., None], axis=3)[..., 0]

    def backward(self, upstream):
        if self._cache is None:
            raise RuntimeError("backward called before forward")
        x_shape, arg = self._cache
        c, h, w = x_shape
        oh, ow = h // 2, w // 2
        quads = np.zeros((c, oh, ow, 4))
        np.put_along_axis(quads, arg[..., None], upstream[..., None], axis=3)
        dx = np.zeros(x_shape)
        dx[:, :2 * oh, :2 * ow] = quads.reshape(c, oh, ow, 2, 2) \
            .transpose(0, 1, 3, 2, 4).reshape(c, 2 * oh, 2 * ow)
        return dx


class Flatten:
    params: dict = {}
    grads: dict = {}

    def __init__(self):
        self._shape = None

    def forward(self, x):
        self._shape = x.shape
        return x.reshape(-1)

    def backward(self, upstream):
        return upstream.reshape(self._shape)


class Dense:
    def __init__(self, in_features, out_features, rng):
        self.params = {
            "weight": _glorot(rng, in_features, out_features,
                              (out_features, in_features)),
            "bias": np.zeros(out_features),
        }
        self.grads = {k: np.zeros_like(v) for k, v in self.params.items()}
        self._cache = None

    def forward(self, x):
        w = self.params["weight"]
        if x.shape != (w.shape[1],):
            raise ValueError(f"expected input of shape ({w.shape[1]},), "
                             f"got {x.shape}")
        self._cache = x
        return w @ x + self.params["bias"]

    def backward(self, upstream):
        if self._cache is None:
            raise RuntimeError("backward called before forward")
        self.grads["weight"] += np.outer(upstream, self._cache)
        self.grads["bias"] += upstream
        return self.params["weight"].T @ upstream


class ReLU:
    params: dict = {}
    grads: dict = {}

    def __init__(self):
        self._mask = None

    def forward(self, x):
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, upstream):
        if self._mask is None:
            raise RuntimeError("backward called before forward")
        return np.where(self._mask, upstream, 0.0)


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max()
    e = np.exp(z)
    return e / e.sum()


class Network:
    """Layer pipeline ending in a softmax over the class logits."""

    def __init__(self, layers):
        self.layers = list(layers)

    @property
    def quantum_layers(self):
        return [l for l in self.layers if isinstance(l, QuantumConvLayer)]

    def forward(self, image, noise_seed=None) -> np.ndarray:
        x = image
        for i, layer in enumerate(self.layers):
            try:
                if isinstance(layer, QuantumConvLayer):
                    x = layer.forward(x, noise_seed=noise_seed)
                else:
                    x = layer.forward(x)
            except ValueError as e:
                raise ValueError(f"layer {i} "
                                 f"({type(layer).__name__}): {e}") from e
        return softmax(x)

    def backward(self, image, label: int, noise_seed=None) -> np.ndarray:
        """Forward + backprop; accumulates gradients, returns the probs."""
        probs = self.forward(image, noise_seed=noise_seed)
        if not 0 <= label < probs.shape[0]:
            raise ValueError(f"label {label} out of range for "
                             f"{probs.shape[0]} classes")
        delta = probs.copy()
        delta[label] -= 1.0  # fused softmax + cross-entropy gradient
        for layer in reversed(self.layers):
            if isinstance(layer, QuantumConvLayer):
                layer.backward(delta, noise_seed=noise_seed)
                delta = None
            else:
                delta = layer.backward(delta)
        return probs

    def parameters(self) -> dict[str, np.ndarray]:
        out = {}
        for i, layer in enumerate(self.layers):
            for name, value in layer.params.items():
                out[f"layer{i}.{name}"] = value
        return out

    def gradients(self) -> dict[str, np.ndarray]:
        out = {}
        for i, layer in enumerate(self.layers):
            for name, value in layer.grads.items():
                out[f"layer{i}.{name}"] = value
        return out

    def zero_grads(self):
        for layer in self.layers:
            for g in layer.grads.values():
                g[:] = 0.0


def _qconv_out(shape, image_hw, spatial_stride, filters):
    sh, sw = spatial_stride if spatial_stride else (shape.rows, shape.cols)
    oh = (image_hw[0] - shape.rows) // sh + 1
    ow = (image_hw[1] - shape.cols) // sw + 1
    return filters, oh, ow


def hybrid_dense_net(config: AnsatzConfig, filters, image_hw, rng,
                     spatial_stride=None, noise=None, hidden=32,
                     classes=10) -> Network:
    """Quantum conv layer -> flatten -> dense(hidden) -> dense(classes)."""
    qconv = QuantumConvLayer(config, filters, rng,
                             spatial_stride=spatial_stride, noise=noise)
    f, oh, ow = _qconv_out(config.shape, image_hw, qconv.spatial_stride,
                           filters)
    return Network([
        qconv,
        Flatten(),
        Dense(f * oh * ow, hidden, rng),
        ReLU(),
        Dense(hidden, classes, rng),
    ])


def hybrid_conv_net(config: AnsatzConfig, filters, image_hw, rng,
                    spatial_stride=None, noise=None, classes=10) -> Network:
    """Quantum conv layer feeding the classical conv stack."""
    qconv = QuantumConvLayer(config, filters, rng,
                             spatial_stride=spatial_stride, noise=noise)
    f, oh, ow = _qconv_out(config.shape, image_hw, qconv.spatial_stride,
                           filters)
    h2, w2 = oh - 1, ow - 1            # conv2 2x2
    h3, w3 = h2 // 2, w2 // 2          # pool
    h4, w4 = h3 - 1, w3 - 1            # conv3 2x2
    return Network([
        qconv,
        Conv2d(f, 32, 2, rng),
        ReLU(),
        MaxPool2d(),
        Conv2d(32, 64, 2, rng),
        ReLU(),
        Flatten(),
        Dense(64 * h4 * w4, 256, rng),
        ReLU(),
        Dense(256, classes, rng),
    ])


def classical_benchmark_net(image_shape, rng, classes=10) -> Network:
    """All-classical reference: conv(8)-conv(32)-pool-conv(64)-fc(256)-fc(10),
    2x2 kernels throughout."""
    h, w, c = image_shape
    h1, w1 = h - 1, w - 1
    h2, w2 = h1 - 1, w1 - 1
    h3, w3 = h2 // 2, w2 // 2
    h4, w4 = h3 - 1, w3 - 1
    return Network([
        ChannelsFirst(),
        Conv2d(c, 8, 2, rng),
        ReLU(),
        Conv2d(8, 32, 2, rng),
        ReLU(),
        MaxPool2d(),
        Conv2d(32, 64, 2, rng),
        ReLU(),
        Flatten(),
        Dense(64 * h4 * w4, 256, rng),
        ReLU(),
        Dense(256, classes, rng),
    ])
