"""Loss, Adam optimizer, and the training loop with early stopping and
plateau learning-rate reduction.

Training is single-threaded and deterministic: one seeded generator drives
the epoch shuffles and dropout masks in a fixed consumption order, so
identical (data, hyperparameters, seed) reproduce identical histories.
"""

from dataclasses import dataclass, field

import numpy as np

from .dataset import partition_indices
from .errors import DataError, NumericError
from .metrics import EvalReport, compute_metrics, confusion
from .model import l2_names, init_params, model_backward, model_forward, predict_probs

PROB_EPS = 1e-7
IMPROVE_TOL = 1e-4


@dataclass
class TrainHyper:
    lr: float = 1e-3
    batch_size: int = 32
    max_epochs: int = 100
    seed: int = 42
    patience_es: int = 10
    patience_lr: int = 5
    lr_factor: float = 0.5
    min_lr: float = 1e-5
    val_fraction: float = 0.1


@dataclass
class TrainState:
    epoch: int = 0
    # per-epoch rows: (train_loss, train_acc, val_loss, val_acc, lr)
    history: list = field(default_factory=list)
    best_val_loss: float = float("inf")
    best_epoch: int = 0
    epochs_since_improvement: int = 0
    lr: float = 0.0
    stopped_early: bool = False


def l2_penalty(params, keys, lam):
    if lam == 0.0 or not keys:
        return 0.0
    return lam * sum(float((params[k] ** 2).sum()) for k in keys)


def bce_loss(probs, labels, params=None, l2_lambda=0.0, l2_keys=()):
    """Mean binary cross-entropy plus the weight penalty.

    Returns (loss, gradient of the data term w.r.t. probs). The penalty
    gradient (2 * lambda * W) is added straight onto the parameter gradients
    by the caller, not routed through this gradient.
    """
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if probs.shape != labels.shape:
        raise DataError(f"probs {probs.shape} and labels {labels.shape} differ in length")
    n = probs.shape[0]
    p = np.clip(probs, PROB_EPS, 1.0 - PROB_EPS)
    data = -float(np.mean(labels * np.log(p) + (1.0 - labels) * np.log(1.0 - p)))
    grad = (p - labels) / (p * (1.0 - p)) / n
    penalty = l2_penalty(params, l2_keys, l2_lambda) if params is not None else 0.0
    return data + penalty, grad


class Adam:
    """Adam with bias correction; epsilon sits outside the root."""

    def __init__(self, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {}
        self.v = {}

    def step(self, params, grads):
        for name, g in grads.items():
            if g.shape != params[name].shape:
                raise ValueError(f"gradient shape mismatch for {name}")
            if not np.isfinite(g).all():
                raise NumericError(f"non-finite gradient for {name}; step aborted")
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for name, g in grads.items():
            m = self.m.setdefault(name, np.zeros_like(g))
            v = self.v.setdefault(name, np.zeros_like(g))
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            params[name] -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


def _batch_slices(n, batch_size, perm):
    """Index batches for one epoch; a trailing singleton is folded into the
    previous batch so batch normalization always sees at least 2 samples."""
    batches = [perm[i:i + batch_size] for i in range(0, n, batch_size)]
    if len(batches) > 1 and len(batches[-1]) == 1:
        batches[-2] = np.concatenate([batches[-2], batches[-1]])
        batches.pop()
    return batches


def train(config, features, labels, hyper: TrainHyper):
    """Fit the model; returns (params at the best validation epoch, TrainState)."""
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.shape[0] == 0:
        raise DataError("empty training set")
    if x.shape[0] < 4:
        raise DataError("training needs at least 4 samples")

    tr_idx, val_idx = partition_indices(
        y, 1.0 - hyper.val_fraction, hyper.seed, stratified=True)
    if len(np.unique(y[val_idx])) < 2:
        raise DataError("validation split ended up single-class; need more data")
    x_tr, y_tr = x[tr_idx], y[tr_idx]
    x_val, y_val = x[val_idx], y[val_idx]

    params = init_params(config, hyper.seed)
    keys = l2_names(config)
    lam = config.l2_lambda
    adam = Adam(lr=hyper.lr)
    rng = np.random.default_rng(hyper.seed)

    state = TrainState(lr=hyper.lr)
    best_params = None
    wait_lr = 0
    n_tr = x_tr.shape[0]

    for epoch in range(1, hyper.max_epochs + 1):
        perm = rng.permutation(n_tr)
        loss_sum = 0.0
        correct = 0
        for idx in _batch_slices(n_tr, hyper.batch_size, perm):
            xb, yb = x_tr[idx], y_tr[idx]
            probs, trace = model_forward(config, params, xb, "train", dropout_rng=rng)
            loss, grad_probs = bce_loss(probs, yb, params, lam, keys)
            grads = model_backward(config, params, trace, grad_probs)
            for k in keys:
                grads[k] += 2.0 * lam * params[k]
            adam.lr = state.lr
            adam.step(params, grads)
            loss_sum += loss * len(idx)
            correct += int(((probs > 0.5) == (yb == 1)).sum())

        val_probs = predict_probs(config, params, x_val)
        val_loss, _ = bce_loss(val_probs, y_val, params, lam, keys)
        val_acc = float(((val_probs > 0.5) == (y_val == 1)).mean())
        state.epoch = epoch
        state.history.append(
            (loss_sum / n_tr, correct / n_tr, val_loss, val_acc, state.lr))

        improved = val_loss < state.best_val_loss - IMPROVE_TOL
        if val_loss < state.best_val_loss:
            # track the exact minimum for restore-best even when the drop is
            # below the improvement tolerance
            state.best_val_loss = val_loss
            state.best_epoch = epoch
            best_params = {k: v.copy() for k, v in params.items()}
        if improved:
            state.epochs_since_improvement = 0
            wait_lr = 0
        else:
            state.epochs_since_improvement += 1
            wait_lr += 1
            if wait_lr >= hyper.patience_lr:
                state.lr = max(state.lr * hyper.lr_factor, hyper.min_lr)
                wait_lr = 0
            if state.epochs_since_improvement >= hyper.patience_es:
                state.stopped_early = True
                break

    if best_params is not None:
        params = best_params
    return params, state


def evaluate(config, params, features, labels, threshold=0.5) -> EvalReport:
    """Infer-mode evaluation: confusion matrix plus all six metrics."""
    x = np.asarray(features, dtype=np.float64)
    if x.shape[0] == 0:
        raise DataError("cannot evaluate an empty dataset")
    probs = predict_probs(config, params, x)
    return compute_metrics(confusion(probs, np.asarray(labels), threshold))
