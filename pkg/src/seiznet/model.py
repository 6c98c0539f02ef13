"""Model assembly: configuration, parameter initialization, and the full
forward/backward passes.

Architecture: three [Conv -> BatchNorm -> ReLU -> MaxPool] stages, multi-head
self-attention over the final feature map combined through an additive skip
connection, LayerNorm, global average pooling, then two [Dense -> BatchNorm
-> ReLU -> Dropout] blocks and a single sigmoid output unit.
"""

from dataclasses import dataclass

import numpy as np

from . import layers
from .errors import NumericError


@dataclass(frozen=True)
class ModelConfig:
    input_len: int = 178
    conv_filters: tuple = (32, 64, 128)
    conv_kernels: tuple = (7, 5, 3)
    pool_size: int = 2
    attn_heads: int = 4
    attn_key_dim: int = 32
    dense_units: tuple = (128, 64)
    dropout_rate: float = 0.5
    l2_lambda: float = 0.001

    def __post_init__(self):
        if len(self.conv_filters) != len(self.conv_kernels):
            raise ValueError("conv_filters and conv_kernels must have equal length")
        if any(k % 2 == 0 or k < 1 for k in self.conv_kernels):
            raise ValueError("conv kernel sizes must be odd")
        if self.pool_size != 2:
            raise ValueError("only pool size 2 is supported")
        # head concatenation must match the skip connection width
        if self.attn_heads * self.attn_key_dim != self.conv_filters[-1]:
            raise ValueError(
                f"attn_heads * attn_key_dim must equal the final conv channel "
                f"count ({self.conv_filters[-1]})"
            )
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        if self.input_len // 2 ** len(self.conv_filters) < 1:
            raise ValueError("input too short for the pooling cascade")

    @property
    def attn_len(self):
        """Sequence length entering the attention block (178 -> 22)."""
        n = self.input_len
        for _ in self.conv_filters:
            n //= 2
        return n


def toy_config():
    """Small configuration for fast end-to-end gradient checks."""
    return ModelConfig(
        input_len=16,
        conv_filters=(2, 2, 2),
        conv_kernels=(7, 5, 3),
        attn_heads=1,
        attn_key_dim=2,
        dense_units=(4, 2),
    )


def param_shapes(config: ModelConfig) -> dict[str, tuple]:
    """Every tensor's shape, fully determined by the configuration.

    Keys ending in _mean/_var are batch-norm running statistics: part of the
    model state and the serialized artifact, but not touched by gradients.
    """
    shapes = {}
    c_in = 1
    for s, (f, k) in enumerate(zip(config.conv_filters, config.conv_kernels), start=1):
        shapes[f"conv{s}_w"] = (k, c_in, f)
        shapes[f"conv{s}_b"] = (f,)
        for stat in ("gamma", "beta", "mean", "var"):
            shapes[f"bn{s}_{stat}"] = (f,)
        c_in = f
    d = config.conv_filters[-1]
    shapes["attn_wq"] = (config.attn_heads, d, config.attn_key_dim)
    shapes["attn_wk"] = (config.attn_heads, d, config.attn_key_dim)
    shapes["attn_wv"] = (config.attn_heads, d, config.attn_key_dim)
    shapes["attn_wo"] = (d, d)
    shapes["ln_gamma"] = (d,)
    shapes["ln_beta"] = (d,)
    width = d
    for i, units in enumerate(config.dense_units, start=1):
        shapes[f"fc{i}_w"] = (width, units)
        shapes[f"fc{i}_b"] = (units,)
        for stat in ("gamma", "beta", "mean", "var"):
            shapes[f"bnd{i}_{stat}"] = (units,)
        width = units
    out = len(config.dense_units) + 1
    shapes[f"fc{out}_w"] = (width, 1)
    shapes[f"fc{out}_b"] = (1,)
    return shapes


def param_names(config: ModelConfig) -> list[str]:
    return list(param_shapes(config))


def learnable_names(config: ModelConfig) -> list[str]:
    return [n for n in param_shapes(config)
            if not n.endswith("_mean") and not n.endswith("_var")]


def l2_names(config: ModelConfig) -> list[str]:
    """Conv and dense kernels: the only tensors the L2 penalty covers."""
    return [n for n in param_shapes(config)
            if (n.startswith("conv") or n.startswith("fc")) and n.endswith("_w")]


def init_params(config: ModelConfig, seed: int) -> dict[str, np.ndarray]:
    """Fan-in-scaled uniform weights, zero biases, identity norm parameters."""
    rng = np.random.default_rng(seed)
    params = {}
    for name, shape in param_shapes(config).items():
        if name.endswith(("_w", "_wq", "_wk", "_wv", "_wo")):
            fan_in = int(np.prod(shape[:-1])) if name.startswith("conv") else shape[-2]
            limit = np.sqrt(6.0 / fan_in)
            params[name] = rng.uniform(-limit, limit, size=shape)
        elif name.endswith(("_gamma", "_var")):
            params[name] = np.ones(shape)
        else:  # biases, betas, running means
            params[name] = np.zeros(shape)
    return params


def model_forward(config, params, batch, mode="infer", dropout_rng=None):
    """Run the network on a batch of signals.

    batch: [N, input_len] or [N, input_len, 1]. Returns (probs, trace);
    trace is None in infer mode. Train mode with a nonzero dropout rate
    requires a dropout_rng.
    """
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim == 2:
        x = x[:, :, None]
    if x.shape[1] != config.input_len or x.shape[2] != 1:
        raise ValueError(f"batch shape {x.shape} does not match input ({config.input_len}, 1)")
    train = mode == "train"
    if train and config.dropout_rate > 0.0 and dropout_rng is None:
        raise ValueError("train mode needs a dropout rng")
    trace = {} if train else None

    h = x
    for s in range(1, len(config.conv_filters) + 1):
        h, c_conv = layers.conv1d_forward(h, params[f"conv{s}_w"], params[f"conv{s}_b"])
        h, c_bn = layers.batchnorm_forward(
            h, params[f"bn{s}_gamma"], params[f"bn{s}_beta"],
            params[f"bn{s}_mean"], params[f"bn{s}_var"], mode=mode)
        h, c_relu = layers.relu_forward(h)
        h, c_pool = layers.maxpool_forward(h)
        if train:
            trace[f"conv{s}"], trace[f"bn{s}"] = c_conv, c_bn
            trace[f"relu{s}"], trace[f"pool{s}"] = c_relu, c_pool

    attn, c_mha = layers.mha_forward(
        h, params["attn_wq"], params["attn_wk"], params["attn_wv"], params["attn_wo"])
    merged = h + attn  # skip connection
    normed, c_ln = layers.layernorm_forward(merged, params["ln_gamma"], params["ln_beta"])
    pooled, gap_len = layers.global_average_pool(normed)
    if train:
        trace["mha"], trace["ln"], trace["gap_len"] = c_mha, c_ln, gap_len

    d = pooled
    for i in range(1, len(config.dense_units) + 1):
        d, c_fc = layers.dense_forward(d, params[f"fc{i}_w"], params[f"fc{i}_b"])
        d, c_bn = layers.batchnorm_forward(
            d, params[f"bnd{i}_gamma"], params[f"bnd{i}_beta"],
            params[f"bnd{i}_mean"], params[f"bnd{i}_var"], mode=mode)
        d, c_relu = layers.relu_forward(d)
        d, c_drop = layers.dropout_forward(d, config.dropout_rate, mode, dropout_rng)
        if train:
            trace[f"fc{i}"], trace[f"bnd{i}"] = c_fc, c_bn
            trace[f"relud{i}"], trace[f"drop{i}"] = c_relu, c_drop

    out = len(config.dense_units) + 1
    z, c_out = layers.dense_forward(d, params[f"fc{out}_w"], params[f"fc{out}_b"])
    probs = layers.sigmoid(z[:, 0])
    if not np.isfinite(probs).all():
        raise NumericError("non-finite model output")
    if train:
        trace["out"] = c_out
        trace["probs"] = probs
    return probs, trace


def model_backward(config, params, trace, grad_probs):
    """Gradients of every learnable tensor, given dLoss/dprobs."""
    probs = trace["probs"]
    grads = {}
    # back through the output sigmoid
    g = (grad_probs * probs * (1.0 - probs))[:, None]
    out = len(config.dense_units) + 1
    g, grads[f"fc{out}_w"], grads[f"fc{out}_b"] = layers.dense_backward(trace["out"], g)

    for i in range(len(config.dense_units), 0, -1):
        g = layers.dropout_backward(trace[f"drop{i}"], g)
        g = layers.relu_backward(trace[f"relud{i}"], g)
        g, grads[f"bnd{i}_gamma"], grads[f"bnd{i}_beta"] = \
            layers.batchnorm_backward(trace[f"bnd{i}"], g)
        g, grads[f"fc{i}_w"], grads[f"fc{i}_b"] = layers.dense_backward(trace[f"fc{i}"], g)

    g = layers.global_average_pool_backward(trace["gap_len"], g)
    g, grads["ln_gamma"], grads["ln_beta"] = layers.layernorm_backward(trace["ln"], g)
    # the skip add routes the same gradient to the conv branch and attention
    g_attn, grads["attn_wq"], grads["attn_wk"], grads["attn_wv"], grads["attn_wo"] = \
        layers.mha_backward(trace["mha"], g)
    g = g + g_attn

    for s in range(len(config.conv_filters), 0, -1):
        g = layers.maxpool_backward(trace[f"pool{s}"], g)
        g = layers.relu_backward(trace[f"relu{s}"], g)
        g, grads[f"bn{s}_gamma"], grads[f"bn{s}_beta"] = \
            layers.batchnorm_backward(trace[f"bn{s}"], g)
        g, grads[f"conv{s}_w"], grads[f"conv{s}_b"] = \
            layers.conv1d_backward(trace[f"conv{s}"], g)
    return grads


def predict_probs(config, params, features, chunk_size=256):
    """Infer-mode probabilities for a feature matrix, evaluated in chunks."""
    x = np.asarray(features, dtype=np.float64)
    parts = []
    for start in range(0, x.shape[0], chunk_size):
        p, _ = model_forward(config, params, x[start:start + chunk_size], mode="infer")
        parts.append(p)
    return np.concatenate(parts) if parts else np.empty(0)
