"""Locally adaptive regression: OLS coefficients shifted per observation by a meta-learner.

Each coefficient becomes beta_j + probit(prob_j(x)) * se_j, where prob_j
comes from the meta-learner applied to the normalized features, and the
prediction is the linear model with those coefficients applied to the raw
features.
"""

import csv
import json
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .data import Dataset, Normalizer, fit_normalizer
from .errors import ConfigError, DataError, NumericError, ShapeError
from .gaussian import probit, probit_with_derivative
from .meta_net import (ARCHITECTURES, MetaNet, build_meta_net, meta_backward, meta_forward,
                       sgd_step)
from .ols import OlsFit, fit_dataset

log = logging.getLogger(__name__)

MODEL_FORMAT = "loair-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    architecture: str = "shared"
    hidden_sizes: tuple = (64, 64, 16)
    lr: float = 1e-3
    max_epochs: int = 5000
    patience: int = 100
    batch_size: int = 32
    clip_norm: float = 10.0  # None disables clipping
    epsilon: float = 1e-6
    tau: float = 1e-5
    seed: int = 0
    normalization: str = "zscore"

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if self.architecture not in ARCHITECTURES:
            raise ConfigError(f"architecture must be one of {ARCHITECTURES}, got {self.architecture!r}")
        if self.patience < 1:
            raise ConfigError(f"patience must be >= 1, got {self.patience}")
        if self.max_epochs < 1:
            raise ConfigError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.lr <= 0:
            raise ConfigError(f"lr must be positive, got {self.lr}")
        if self.clip_norm is not None and self.clip_norm <= 0:
            raise ConfigError(f"clip_norm must be positive or None, got {self.clip_norm}")
        if not 0.0 < self.epsilon < self.tau:
            raise ConfigError(f"need 0 < epsilon < tau, got {self.epsilon}, {self.tau}")

    def to_dict(self):
        d = asdict(self)
        d["hidden_sizes"] = list(self.hidden_sizes)
        return d


@dataclass
class TrainedLoair:
    ols: OlsFit
    meta: MetaNet
    normalizer: Normalizer
    config: TrainConfig
    feature_names: tuple = ()
    target_name: str = "y"

    @property
    def p(self):
        return self.ols.p


@dataclass
class TrainingLog:
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    best_epoch: int = 0
    best_val_loss: float = float("inf")
    stopped_epoch: int = 0
    stop_reason: str = ""

    def to_rows(self):
        """(epoch, train_mse, val_mse) rows; epoch 0 is the untrained start."""
        return [(e, t, v) for e, (t, v) in enumerate(zip(self.train_loss, self.val_loss))]


def adapted_coefficients(ols, probs):
    """beta_j + probit(prob_j) * se_j; probs may be (p+1,) or (batch, p+1)."""
    probs = np.asarray(probs, dtype=float)
    if probs.shape[-1] != ols.p + 1:
        raise ShapeError(f"expected {ols.p + 1} probabilities, got {probs.shape[-1]}")
    return ols.coefficients + probit(probs) * ols.std_errors


def coefficient_bounds(ols, epsilon, tau):
    """Closed interval every adapted coefficient must lie in, given the smoothing."""
    lo = probit(epsilon / (1.0 + tau))
    hi = probit((1.0 + epsilon) / (1.0 + tau))
    return ols.coefficients + lo * ols.std_errors, ols.coefficients + hi * ols.std_errors


def _with_intercept(X_raw):
    return np.column_stack([np.ones(X_raw.shape[0]), X_raw])


def _check_features(model, X_raw):
    X = np.asarray(X_raw, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != model.p:
        raise ShapeError(f"model expects {model.p} features, got {X.shape[1]}")
    return X


def _evaluate(meta, ols, X_raw, X_norm):
    probs, raw, cache = meta_forward(meta, X_norm)
    coefs = adapted_coefficients(ols, probs)
    y_hat = coefs[:, 0] + np.einsum("ij,ij->i", coefs[:, 1:], X_raw)
    return y_hat, probs, coefs, cache


def predict(model, X_raw):
    """Batch prediction for raw feature rows."""
    X = _check_features(model, X_raw)
    y_hat, _, _, _ = _evaluate(model.meta, model.ols, X, model.normalizer.apply(X))
    return y_hat


def loair_predict(model, x_raw):
    x = np.asarray(x_raw, dtype=float)
    if x.ndim != 1:
        raise ShapeError("loair_predict takes a single feature vector; use predict() for batches")
    return float(predict(model, x)[0])


def _loss_and_grad(meta, ols, X_raw, X_norm, y):
    if X_raw.shape[0] == 0:
        raise DataError("empty batch")
    probs, _, cache = meta_forward(meta, X_norm)
    z, dz_dprob = probit_with_derivative(probs)
    coefs = ols.coefficients + z * ols.std_errors
    y_hat = coefs[:, 0] + np.einsum("ij,ij->i", coefs[:, 1:], X_raw)
    resid = y_hat - y
    if not np.all(np.isfinite(resid)):
        bad = int(np.flatnonzero(~np.isfinite(resid))[0])
        raise NumericError(f"non-finite prediction at batch row {bad}")
    loss = float(np.mean(resid ** 2))
    scale = (2.0 / X_raw.shape[0]) * resid[:, None] * _with_intercept(X_raw)
    grad_probs = scale * ols.std_errors * dz_dprob
    return loss, meta_backward(meta, cache, grad_probs), coefs


def loss_and_gradient(model, x_raw, x_norm, y):
    """Mean squared error of the adapted prediction and its gradient w.r.t. the meta-learner."""
    X = _check_features(model, x_raw)
    Xn = np.atleast_2d(np.asarray(x_norm, dtype=float))
    y = np.asarray(y, dtype=float).reshape(-1)
    if Xn.shape != X.shape or y.shape[0] != X.shape[0]:
        raise ShapeError("x_raw, x_norm and y must describe the same rows")
    loss, grads, _ = _loss_and_grad(model.meta, model.ols, X, Xn, y)
    return loss, grads


def _mse(meta, ols, X_raw, X_norm, y):
    y_hat, _, _, _ = _evaluate(meta, ols, X_raw, X_norm)
    return float(np.mean((y_hat - y) ** 2))


def train(train_set, val_set, config=None, on_batch=None):
    """Fit OLS and the normalizer on `train_set`, then the meta-learner by mini-batch SGD.

    Validation MSE is evaluated after every epoch (and once before training,
    as epoch 0). Training stops once it has not strictly improved for
    `config.patience` epochs, and the parameters of the best epoch are
    returned. `on_batch(epoch, coefficients)` is called with the adapted
    coefficients of every training batch.
    """
    config = config or TrainConfig()
    if train_set.n < 1 or val_set.n < 1:
        raise DataError("train and validation sets must be nonempty")
    if val_set.feature_names != train_set.feature_names:
        raise ShapeError("train and validation features differ")
    ols = fit_dataset(train_set)
    normalizer = fit_normalizer(train_set, config.normalization)
    meta = build_meta_net(config.architecture, train_set.p, config.hidden_sizes, config.seed,
                          config.epsilon, config.tau)

    X_tr, y_tr = train_set.X, train_set.y
    Xn_tr = normalizer.apply(X_tr)
    X_va, y_va = val_set.X, val_set.y
    Xn_va = normalizer.apply(X_va)

    history = TrainingLog()
    history.train_loss.append(_mse(meta, ols, X_tr, Xn_tr, y_tr))
    history.val_loss.append(_mse(meta, ols, X_va, Xn_va, y_va))
    best_params = meta.params.copy()
    history.best_val_loss = history.val_loss[0]
    history.best_epoch = 0

    rng = np.random.default_rng(config.seed)
    n = train_set.n
    history.stop_reason = "max_epochs"
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            try:
                loss, grads, coefs = _loss_and_grad(meta, ols, X_tr[idx], Xn_tr[idx], y_tr[idx])
                meta.params = sgd_step(meta.params, grads, config.lr, config.clip_norm)
            except NumericError as exc:
                history.stopped_epoch = epoch
                history.stop_reason = f"numeric failure: {exc}"
                exc.log = history
                raise
            if on_batch is not None:
                on_batch(epoch, coefs)
            total += loss * idx.size
        history.train_loss.append(total / n)
        val = _mse(meta, ols, X_va, Xn_va, y_va)
        if not np.isfinite(val):
            history.stopped_epoch = epoch
            history.stop_reason = "numeric failure: non-finite validation loss"
            err = NumericError(history.stop_reason)
            err.log = history
            raise err
        history.val_loss.append(val)
        if val < history.best_val_loss:
            history.best_val_loss = val
            history.best_epoch = epoch
            best_params = meta.params.copy()
        elif epoch - history.best_epoch >= config.patience:
            history.stopped_epoch = epoch
            history.stop_reason = "early_stopping"
            break
    else:
        history.stopped_epoch = config.max_epochs

    log.debug("stopped at epoch %d (%s), best epoch %d, val mse %.6g",
              history.stopped_epoch, history.stop_reason, history.best_epoch, history.best_val_loss)
    meta.params = best_params
    model = TrainedLoair(ols, meta, normalizer, config, train_set.feature_names, train_set.target_name)
    return model, history


@dataclass
class CoefficientTrace:
    """Per-observation probabilities, adapted coefficients and predictions."""

    feature_names: tuple
    X: np.ndarray
    probs: np.ndarray
    coefficients: np.ndarray
    predictions: np.ndarray

    def __len__(self):
        return self.X.shape[0]

    def header(self):
        k = self.probs.shape[1]
        return (["row"] + [f"feature_{name}" for name in self.feature_names]
                + [f"prob_{j}" for j in range(k)] + [f"coef_{j}" for j in range(k)] + ["prediction"])

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.header())
            for i in range(len(self)):
                writer.writerow([i] + [repr(float(v)) for v in self.X[i]]
                                + [repr(float(v)) for v in self.probs[i]]
                                + [repr(float(v)) for v in self.coefficients[i]]
                                + [repr(float(self.predictions[i]))])


def explain(model, dataset):
    """Trace of the per-observation coefficients, in input row order."""
    if isinstance(dataset, Dataset):
        if dataset.feature_names != tuple(model.feature_names):
            raise ShapeError(f"dataset features {dataset.feature_names} do not match model "
                             f"features {tuple(model.feature_names)}")
        X = dataset.X
    else:
        X = dataset
    X = _check_features(model, X)
    y_hat, probs, coefs, _ = _evaluate(model.meta, model.ols, X, model.normalizer.apply(X))
    return CoefficientTrace(tuple(model.feature_names), X.copy(), probs, coefs, y_hat)


def model_to_dict(model):
    return {"format": MODEL_FORMAT, "version": MODEL_VERSION,
            "feature_names": list(model.feature_names), "target_name": model.target_name,
            "config": model.config.to_dict(), "ols": model.ols.to_dict(),
            "normalizer": model.normalizer.to_dict(), "meta": model.meta.to_dict()}


def model_from_dict(d):
    if d.get("format") != MODEL_FORMAT:
        raise DataError("not a loair model file")
    if d.get("version") != MODEL_VERSION:
        raise DataError(f"unsupported model version {d.get('version')}")
    return TrainedLoair(OlsFit.from_dict(d["ols"]), MetaNet.from_dict(d["meta"]),
                        Normalizer.from_dict(d["normalizer"]), TrainConfig(**d["config"]),
                        tuple(d["feature_names"]), d["target_name"])


def dumps_model(model):
    return json.dumps(model_to_dict(model))


def save_model(model, path):
    with open(path, "w") as fh:
        fh.write(dumps_model(model))


def load_model(path):
    with open(path) as fh:
        return model_from_dict(json.load(fh))
