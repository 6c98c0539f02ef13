"""Finite-difference verification of the analytic gradients.

Each check builds a small random instance, reduces the layer output to a
scalar through a fixed random projection, and compares the backward pass
against central differences with h = 1e-4 * max(1, |theta|). The relative
error is |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
"""

import numpy as np

from . import layers, model, optim

H_SCALE = 1e-4
LAYER_BOUND = 1e-4
MODEL_BOUND = 1e-3


def relative_error(analytic, numeric) -> float:
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-8)
    return float((np.abs(a - n) / denom).max()) if a.size else 0.0


def numeric_gradient(f, arr):
    """Central differences of the scalar f() with respect to arr, in place."""
    grad = np.zeros_like(arr)
    for ix in np.ndindex(arr.shape):
        orig = arr[ix]
        h = H_SCALE * max(1.0, abs(orig))
        arr[ix] = orig + h
        fp = f()
        arr[ix] = orig - h
        fm = f()
        arr[ix] = orig
        grad[ix] = (fp - fm) / (2.0 * h)
    return grad


def _worst(f, pairs):
    return max(relative_error(g, numeric_gradient(f, arr)) for arr, g in pairs)


def check_conv(seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((2, 12, 2))
    w = rng.standard_normal((3, 2, 3)) * 0.5
    b = rng.standard_normal(3) * 0.1
    r = rng.standard_normal((2, 12, 3))

    def f():
        return float((layers.conv1d_forward(x, w, b)[0] * r).sum())

    _, cache = layers.conv1d_forward(x, w, b)
    gx, gw, gb = layers.conv1d_backward(cache, r)
    return _worst(f, [(x, gx), (w, gw), (b, gb)])


def check_batchnorm(seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((4, 6, 2))
    gamma = 1.0 + 0.2 * rng.standard_normal(2)
    beta = 0.1 * rng.standard_normal(2)
    r = rng.standard_normal((4, 6, 2))

    def f():
        out, _ = layers.batchnorm_forward(x, gamma, beta, np.zeros(2), np.ones(2), "train")
        return float((out * r).sum())

    _, cache = layers.batchnorm_forward(x, gamma, beta, np.zeros(2), np.ones(2), "train")
    gx, gg, gb = layers.batchnorm_backward(cache, r)
    return _worst(f, [(x, gx), (gamma, gg), (beta, gb)])


def check_maxpool(seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((2, 9, 3))  # odd length exercises the floor path
    r = rng.standard_normal((2, 4, 3))

    def f():
        return float((layers.maxpool_forward(x)[0] * r).sum())

    _, cache = layers.maxpool_forward(x)
    gx = layers.maxpool_backward(cache, r)
    return _worst(f, [(x, gx)])


def check_mha(seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((2, 5, 8))
    wq = rng.standard_normal((2, 8, 4)) * 0.5
    wk = rng.standard_normal((2, 8, 4)) * 0.5
    wv = rng.standard_normal((2, 8, 4)) * 0.5
    wo = rng.standard_normal((8, 8)) * 0.5
    r = rng.standard_normal((2, 5, 8))

    def f():
        return float((layers.mha_forward(x, wq, wk, wv, wo)[0] * r).sum())

    _, cache = layers.mha_forward(x, wq, wk, wv, wo)
    gx, gq, gk, gv, go = layers.mha_backward(cache, r)
    return _worst(f, [(x, gx), (wq, gq), (wk, gk), (wv, gv), (wo, go)])


def check_skip_add(seed=0):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((3, 7, 4))
    b = rng.standard_normal((3, 7, 4))
    r = rng.standard_normal((3, 7, 4))

    def f():
        return float(((a + b) * r).sum())

    # the sum rule duplicates the upstream gradient to both branches
    return _worst(f, [(a, r), (b, r)])


def check_layernorm(seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((3, 4, 5))
    gamma = 1.0 + 0.2 * rng.standard_normal(5)
    beta = 0.1 * rng.standard_normal(5)
    r = rng.standard_normal((3, 4, 5))

    def f():
        return float((layers.layernorm_forward(x, gamma, beta)[0] * r).sum())

    _, cache = layers.layernorm_forward(x, gamma, beta)
    gx, gg, gb = layers.layernorm_backward(cache, r)
    return _worst(f, [(x, gx), (gamma, gg), (beta, gb)])


def check_gap(seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((2, 6, 3))
    r = rng.standard_normal((2, 3))

    def f():
        return float((layers.global_average_pool(x)[0] * r).sum())

    gx = layers.global_average_pool_backward(x.shape[1], r)
    return _worst(f, [(x, gx)])


def check_dense(seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((4, 6))
    w = rng.standard_normal((6, 3)) * 0.5
    b = rng.standard_normal(3) * 0.1
    r = rng.standard_normal((4, 3))

    def f():
        return float((layers.dense_forward(x, w, b)[0] * r).sum())

    _, cache = layers.dense_forward(x, w, b)
    gx, gw, gb = layers.dense_backward(cache, r)
    return _worst(f, [(x, gx), (w, gw), (b, gb)])


def check_dropout(seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((3, 50))
    r = rng.standard_normal((3, 50))

    def f():
        out, _ = layers.dropout_forward(x, 0.4, "train", np.random.default_rng(7))
        return float((out * r).sum())

    _, cache = layers.dropout_forward(x, 0.4, "train", np.random.default_rng(7))
    gx = layers.dropout_backward(cache, r)
    return _worst(f, [(x, gx)])


def check_model(seed=0):
    """End-to-end check of the toy model through the full training loss."""
    cfg = model.toy_config()
    params = model.init_params(cfg, seed)
    rng = np.random.default_rng(seed + 1)
    x = rng.standard_normal((3, cfg.input_len))
    y = np.array([0.0, 1.0, 1.0])
    keys = model.l2_names(cfg)

    def loss_fn():
        probs, _ = model.model_forward(cfg, params, x, "train",
                                       dropout_rng=np.random.default_rng(11))
        loss, _ = optim.bce_loss(probs, y, params, cfg.l2_lambda, keys)
        return loss

    probs, trace = model.model_forward(cfg, params, x, "train",
                                       dropout_rng=np.random.default_rng(11))
    _, grad_probs = optim.bce_loss(probs, y, params, cfg.l2_lambda, keys)
    grads = model.model_backward(cfg, params, trace, grad_probs)
    for k in keys:
        grads[k] = grads[k] + 2.0 * cfg.l2_lambda * params[k]
    return max(relative_error(grads[n], numeric_gradient(loss_fn, params[n]))
               for n in model.learnable_names(cfg))


def run_all(seed=0):
    """All layer checks plus the end-to-end model check.

    Returns a list of (name, max relative error, bound) rows.
    """
    return [
        ("conv1d", check_conv(seed), LAYER_BOUND),
        ("batchnorm", check_batchnorm(seed), LAYER_BOUND),
        ("maxpool", check_maxpool(seed), LAYER_BOUND),
        ("mha", check_mha(seed), LAYER_BOUND),
        ("skip_add", check_skip_add(seed), LAYER_BOUND),
        ("layernorm", check_layernorm(seed), LAYER_BOUND),
        ("global_avg_pool", check_gap(seed), LAYER_BOUND),
        ("dense", check_dense(seed), LAYER_BOUND),
        ("dropout", check_dropout(seed), LAYER_BOUND),
        ("model_end_to_end", check_model(seed), MODEL_BOUND),
    ]
