"""Fixed 1D fully convolutional autoencoder.

Encoder blocks are stride-1 convolutions (kernel 11, symmetric padding)
followed by size-2 max pooling; a latent convolution sits between encoder
and decoder; the decoder mirrors the filter ladder with stride-2
transposed convolutions and a final single-channel stride-1 transposed
convolution with linear output. Construction is deterministic, the
backward pass is analytic, and parameters serialize to a float32 payload.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels

MODEL_MAGIC = b"RSDN"
MODEL_FORMAT_VERSION = 1

_TAG_INIT = 97


@dataclass(frozen=True)
class Architecture:
    """Filter ladder and kernel geometry of the autoencoder."""

    encoder_filters: tuple[int, ...] = (16, 24, 32, 48, 64)
    latent_filters: int = 96
    decoder_filters: tuple[int, ...] = (64, 48, 32, 24, 16)
    kernel: int = 11

    def __post_init__(self):
        object.__setattr__(self, "encoder_filters", tuple(self.encoder_filters))
        object.__setattr__(self, "decoder_filters", tuple(self.decoder_filters))
        if self.kernel % 2 != 1:
            raise ValueError("kernel size must be odd")
        if len(self.encoder_filters) != len(self.decoder_filters):
            raise ValueError("encoder and decoder depth must match")

    @property
    def pad(self) -> int:
        return self.kernel // 2

    @property
    def length_divisor(self) -> int:
        return 2 ** len(self.encoder_filters)

    def layer_specs(self) -> list[dict]:
        """Ordered layer descriptors: kind, channels, activation, pooling."""
        specs = []
        cin = 1
        for f in self.encoder_filters:
            specs.append(dict(kind="conv", cin=cin, cout=f, relu=True,
                              pool=True))
            cin = f
        specs.append(dict(kind="conv", cin=cin, cout=self.latent_filters,
                          relu=True, pool=False))
        cin = self.latent_filters
        for f in self.decoder_filters:
            specs.append(dict(kind="convtr2", cin=cin, cout=f, relu=True,
                              pool=False))
            cin = f
        specs.append(dict(kind="convtr1", cin=cin, cout=1, relu=False,
                          pool=False))
        return specs


DEFAULT_ARCHITECTURE = Architecture()


def conv_param_count(cin: int, cout: int, kernel: int) -> int:
    """Weights plus biases of one convolutional layer."""
    return cout * cin * kernel + cout


def count_params(arch: Architecture) -> int:
    """Total trainable parameter count of the architecture."""
    return sum(conv_param_count(s["cin"], s["cout"], arch.kernel)
               for s in arch.layer_specs())


@dataclass
class ModelParams:
    """All layer weights (out, in, kernel) and biases, plus provenance."""

    arch: Architecture
    seed: int
    weights: list[np.ndarray] = field(repr=False, default_factory=list)
    biases: list[np.ndarray] = field(repr=False, default_factory=list)

    def n_params(self) -> int:
        return sum(w.size for w in self.weights) + sum(b.size for b in self.biases)

    def copy(self) -> ModelParams:
        return ModelParams(self.arch, self.seed,
                           [w.copy() for w in self.weights],
                           [b.copy() for b in self.biases])

    def tensors(self):
        """Flat (name, array) sequence in serialization order."""
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            yield f"layer{i}.weight", w
            yield f"layer{i}.bias", b


def build(arch: Architecture, seed: int) -> ModelParams:
    """Deterministic fan-in-scaled uniform initialization, biases zero.

    Weights are drawn in float64, then snapped to the float32 grid so the
    float32 serialization format round-trips freshly built models exactly.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, _TAG_INIT]))
    weights, biases = [], []
    for spec in arch.layer_specs():
        fan_in = spec["cin"] * arch.kernel
        bound = np.sqrt(6.0 / fan_in)
        w = rng.uniform(-bound, bound, size=(spec["cout"], spec["cin"], arch.kernel))
        weights.append(w.astype(np.float32).astype(np.float64))
        biases.append(np.zeros(spec["cout"], dtype=np.float64))
    return ModelParams(arch, seed, weights, biases)


def _flip_kernel(w: np.ndarray) -> np.ndarray:
    # stride-1 transposed convolution == convolution with the
    # kernel-reversed weight and mirrored padding
    return np.ascontiguousarray(w[:, :, ::-1])


def forward(params: ModelParams, batch: np.ndarray,
            record_cache: bool = False):
    """Run the network on a batch of spectra (shape (B, L) or (L,)).

    Returns (outputs, cache); the cache holds every layer input,
    pre-activation and pooling argmax needed by :func:`backward` and is
    None unless requested. L must be divisible by 2**len(encoder_filters).
    """
    arch = params.arch
    squeeze = False
    batch = np.asarray(batch)
    if batch.ndim == 1:
        batch = batch[None, :]
        squeeze = True
    if batch.ndim != 2:
        raise ValueError("batch must be 1D or 2D (batch, channels)")
    if batch.shape[1] % arch.length_divisor != 0:
        raise ValueError(
            f"spectrum length {batch.shape[1]} not divisible by "
            f"{arch.length_divisor}"
        )
    dtype = batch.dtype if batch.dtype in (np.float32, np.float64) else np.float64
    x = np.ascontiguousarray(batch[:, :, None], dtype=dtype)
    pad = arch.pad
    cache = [] if record_cache else None
    for spec, w, b in zip(arch.layer_specs(), params.weights, params.biases):
        wd = np.asarray(w, dtype=dtype)
        bd = np.asarray(b, dtype=dtype)
        if spec["kind"] == "conv":
            z = kernels.conv1d_fwd(x, wd, bd, pad)
        elif spec["kind"] == "convtr2":
            z = kernels.convtr1d2_fwd(x, wd, bd, pad, 1)
        else:  # convtr1
            z = kernels.conv1d_fwd(x, _flip_kernel(wd), bd,
                                   arch.kernel - 1 - pad)
        a = np.maximum(z, 0) if spec["relu"] else z
        entry = dict(x=x, z=z if spec["relu"] else None, idx=None)
        if spec["pool"]:
            a, idx = kernels.maxpool2_fwd(a)
            entry["idx"] = idx
        if record_cache:
            cache.append(entry)
        x = a
    out = x[:, :, 0]
    if squeeze:
        out = out[0]
    return out, cache


def backward(params: ModelParams, cache, output_grad: np.ndarray):
    """Exact gradients of :func:`forward` for the cached batch.

    Returns (weight_grads, bias_grads) aligned with ``params``; raises if
    the cache does not match the parameter shapes.
    """
    arch = params.arch
    specs = arch.layer_specs()
    if cache is None or len(cache) != len(specs):
        raise ValueError("cache does not match this architecture")
    output_grad = np.asarray(output_grad)
    if output_grad.ndim == 1:
        output_grad = output_grad[None, :]
    pad = arch.pad
    g = np.ascontiguousarray(output_grad[:, :, None])
    weight_grads: list[np.ndarray] = [None] * len(specs)
    bias_grads: list[np.ndarray] = [None] * len(specs)
    for i in range(len(specs) - 1, -1, -1):
        spec, entry = specs[i], cache[i]
        x = entry["x"]
        if x.shape[2] != spec["cin"]:
            raise ValueError("cache does not match this architecture")
        w = np.asarray(params.weights[i], dtype=g.dtype)
        if spec["pool"]:
            g = kernels.maxpool2_bwd(g, entry["idx"])
        if spec["relu"]:
            g = g * (entry["z"] > 0)
        if spec["kind"] == "conv":
            gx, gw, gb = kernels.conv1d_bwd(x, w, g, pad,
                                            need_input_grad=i > 0)
        elif spec["kind"] == "convtr2":
            gx, gw, gb = kernels.convtr1d2_bwd(x, w, g, pad, 1)
        else:
            gx, gw, gb = kernels.conv1d_bwd(x, _flip_kernel(w), g,
                                            arch.kernel - 1 - pad)
            gw = np.ascontiguousarray(gw[:, :, ::-1])
        weight_grads[i] = gw.astype(np.float64)
        bias_grads[i] = gb.astype(np.float64)
        g = gx
    return weight_grads, bias_grads


def save_params(params: ModelParams, path) -> None:
    """JSON header plus little-endian float32 payload in layer order."""
    header = {
        "format_version": MODEL_FORMAT_VERSION,
        "architecture": {
            "encoder_filters": list(params.arch.encoder_filters),
            "latent_filters": params.arch.latent_filters,
            "decoder_filters": list(params.arch.decoder_filters),
            "kernel": params.arch.kernel,
        },
        "seed": params.seed,
        "tensors": [[name, list(t.shape)] for name, t in params.tensors()],
    }
    blob = json.dumps(header, sort_keys=True).encode()
    payload = b"".join(
        t.astype("<f4").tobytes() for _, t in params.tensors()
    )
    with Path(path).open("wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(len(blob).to_bytes(4, "little"))
        fh.write(blob)
        fh.write(payload)


def load_params(path, arch: Architecture | None = None) -> ModelParams:
    """Load a model file; optionally enforce an expected architecture."""
    raw = Path(path).read_bytes()
    if len(raw) < 8 or raw[:4] != MODEL_MAGIC:
        raise ValueError("not a model file")
    header_len = int.from_bytes(raw[4:8], "little")
    if len(raw) < 8 + header_len:
        raise ValueError("truncated model file")
    header = json.loads(raw[8:8 + header_len].decode())
    if header.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format {header.get('format_version')}")
    adoc = header["architecture"]
    file_arch = Architecture(
        encoder_filters=tuple(adoc["encoder_filters"]),
        latent_filters=int(adoc["latent_filters"]),
        decoder_filters=tuple(adoc["decoder_filters"]),
        kernel=int(adoc["kernel"]),
    )
    if arch is not None and arch != file_arch:
        raise ValueError("shape mismatch: file architecture differs from expected")
    params = ModelParams(file_arch, int(header["seed"]))
    offset = 8 + header_len
    expected_tensors = []
    for spec in file_arch.layer_specs():
        expected_tensors.append((spec["cout"], spec["cin"], file_arch.kernel))
        expected_tensors.append((spec["cout"],))
    declared = [tuple(shape) for _, shape in header["tensors"]]
    if declared != expected_tensors:
        raise ValueError("shape mismatch: tensor table inconsistent with architecture")
    total = sum(int(np.prod(s)) for s in expected_tensors)
    if len(raw) - offset != 4 * total:
        raise ValueError("truncated model file: payload size mismatch")
    for shape in expected_tensors:
        n = int(np.prod(shape))
        t = np.frombuffer(raw, dtype="<f4", count=n, offset=offset)
        offset += 4 * n
        t = t.reshape(shape).astype(np.float64)
        if len(shape) == 3:
            params.weights.append(t)
        else:
            params.biases.append(t)
    return params
