"""Model artifact: one file holding the architecture, scaler statistics,
wavelet policy, training metadata, and every parameter tensor.

Layout: a text header (version line, key = value lines, one "tensor" line
per block in fixed order), then a "==binary==" divider, then for each tensor
a little-endian uint64 element count followed by the raw little-endian
float64 data. The round trip is bitwise exact.
"""

import os
import struct

import numpy as np

from .errors import DataError
from .model import ModelConfig, param_names, param_shapes
from .preprocess import ScalerParams, parse_policy

VERSION_TAG = "seiznet-model v1"
_DIVIDER = b"==binary==\n"


def _config_lines(config: ModelConfig):
    return [
        f"input_len = {config.input_len}",
        f"conv_filters = {','.join(str(v) for v in config.conv_filters)}",
        f"conv_kernels = {','.join(str(v) for v in config.conv_kernels)}",
        f"pool_size = {config.pool_size}",
        f"attn_heads = {config.attn_heads}",
        f"attn_key_dim = {config.attn_key_dim}",
        f"dense_units = {','.join(str(v) for v in config.dense_units)}",
        f"dropout_rate = {config.dropout_rate!r}",
        f"l2_lambda = {config.l2_lambda!r}",
    ]


def save_artifact(path, config, params, scaler, wavelet_policy, metadata=None):
    """Write the artifact atomically (temp file + rename)."""
    parse_policy(wavelet_policy)
    tensors = [("scaler_mean", scaler.mean), ("scaler_std", scaler.std)]
    tensors += [(name, params[name]) for name in param_names(config)]

    lines = [VERSION_TAG]
    lines += _config_lines(config)
    lines.append(f"wavelet = {wavelet_policy}")
    for key, value in (metadata or {}).items():
        lines.append(f"meta.{key} = {value}")
    for name, arr in tensors:
        dims = ",".join(str(d) for d in np.asarray(arr).shape)
        lines.append(f"tensor = {name} {dims}")

    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write("\n".join(lines).encode("utf-8") + b"\n")
        fh.write(_DIVIDER)
        for _, arr in tensors:
            data = np.ascontiguousarray(arr, dtype="<f8")
            fh.write(struct.pack("<Q", data.size))
            fh.write(data.tobytes())
    os.replace(tmp, path)


def _parse_header(text):
    lines = text.splitlines()
    if not lines or lines[0] != VERSION_TAG:
        head = lines[0] if lines else ""
        raise DataError(f"unsupported model artifact version {head!r}")
    keys, metadata, tensor_specs = {}, {}, []
    for line in lines[1:]:
        if not line.strip():
            continue
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key == "tensor":
            name, _, dims = value.partition(" ")
            try:
                shape = tuple(int(d) for d in dims.split(",") if d != "")
            except ValueError:
                raise DataError(f"bad tensor line in artifact: {line!r}")
            tensor_specs.append((name, shape))
        elif key.startswith("meta."):
            metadata[key[len("meta."):]] = value
        else:
            keys[key] = value
    return keys, metadata, tensor_specs


def _config_from_keys(keys):
    def ints(name):
        return tuple(int(v) for v in keys[name].split(","))

    try:
        return ModelConfig(
            input_len=int(keys["input_len"]),
            conv_filters=ints("conv_filters"),
            conv_kernels=ints("conv_kernels"),
            pool_size=int(keys["pool_size"]),
            attn_heads=int(keys["attn_heads"]),
            attn_key_dim=int(keys["attn_key_dim"]),
            dense_units=ints("dense_units"),
            dropout_rate=float(keys["dropout_rate"]),
            l2_lambda=float(keys["l2_lambda"]),
        )
    except (KeyError, ValueError) as exc:
        raise DataError(f"model artifact header is incomplete or invalid: {exc}")


def load_artifact(path):
    """Returns (config, params, scaler, wavelet_policy, metadata)."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read model artifact {path}: {exc}")
    split_at = blob.find(_DIVIDER)
    if split_at < 0:
        raise DataError(f"{path}: not a model artifact (missing binary divider)")
    keys, metadata, tensor_specs = _parse_header(blob[:split_at].decode("utf-8"))
    config = _config_from_keys(keys)
    if "wavelet" not in keys:
        raise DataError("model artifact lacks a wavelet policy")
    policy = keys["wavelet"]
    parse_policy(policy)

    expected = [("scaler_mean", (config.input_len,)),
                ("scaler_std", (config.input_len,))]
    expected += [(n, param_shapes(config)[n]) for n in param_names(config)]
    if [(n, s) for n, s in tensor_specs] != expected:
        raise DataError("model artifact tensor inventory does not match its config")

    offset = split_at + len(_DIVIDER)
    arrays = {}
    for name, shape in tensor_specs:
        if offset + 8 > len(blob):
            raise DataError(f"model artifact truncated before tensor {name}")
        (count,) = struct.unpack_from("<Q", blob, offset)
        offset += 8
        want = int(np.prod(shape)) if shape else 1
        if count != want:
            raise DataError(
                f"tensor {name}: stored {count} values, shape {shape} needs {want}")
        end = offset + 8 * count
        if end > len(blob):
            raise DataError(f"model artifact truncated inside tensor {name}")
        arrays[name] = np.frombuffer(blob[offset:end], dtype="<f8").reshape(shape).copy()
        offset = end
    if offset != len(blob):
        raise DataError("model artifact has trailing bytes")

    scaler = ScalerParams(arrays.pop("scaler_mean"), arrays.pop("scaler_std"))
    return config, arrays, scaler, policy, metadata
