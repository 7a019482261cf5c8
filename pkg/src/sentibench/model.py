"""L2-regularized logistic regression for binary polarity.

Objective: mean logistic loss + (lam / 2) * ||w||^2, bias unregularized,
minimized by full-batch gradient descent with Armijo backtracking and a
fixed diagonal rescaling of the weight step.

Row shards have a fixed size independent of the thread count and partial
gradients are combined by a pairwise tree in shard order, so the trained
weights are bit-identical for any ``threads`` value.
"""

from __future__ import annotations

import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import kernels
from .corpus import atomic_write_text
from .errors import DomainError, FeatureSpaceMismatch, ParseError, PreconditionError
from .vectorize import CSRMatrix, DenseMatrix, DenseVector, SparseVector

logger = logging.getLogger(__name__)

MODEL_FORMAT = "sentibench-linear-model"
MODEL_VERSION = 1
SHARD_ROWS = 32768

Features = Union[CSRMatrix, DenseMatrix, np.ndarray]


def log1pexp(z: np.ndarray) -> np.ndarray:
    """Stable ``log(1 + exp(z))``."""
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    ez = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + ez), ez / (1.0 + ez))


def _pairwise_sum(parts: list[np.ndarray]) -> np.ndarray:
    while len(parts) > 1:
        nxt = [parts[i] + parts[i + 1] for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


class _Design:
    """Sharded matvec / rmatvec over a CSR or dense design matrix."""

    def __init__(self, X: Features, threads: int = 1):
        if isinstance(X, CSRMatrix):
            self.sparse = True
            self.indptr = np.ascontiguousarray(X.indptr, dtype=np.int64)
            self.indices = np.ascontiguousarray(X.indices, dtype=np.int64)
            self.data = np.ascontiguousarray(X.data, dtype=np.float64)
            self.n_rows, self.n_cols = X.shape
            finite = np.all(np.isfinite(self.data))
        else:
            values = X.values if isinstance(X, DenseMatrix) else X
            self.sparse = False
            self.values = np.ascontiguousarray(values, dtype=np.float64)
            if self.values.ndim != 2:
                raise PreconditionError("dense features must be a 2-D array")
            self.n_rows, self.n_cols = self.values.shape
            finite = np.all(np.isfinite(self.values))
        if not finite:
            raise PreconditionError("feature values must be finite")
        self.shards = [(s, min(s + SHARD_ROWS, self.n_rows)) for s in range(0, self.n_rows, SHARD_ROWS)]
        self.threads = max(1, int(threads))

    def _map(self, fn):
        if self.threads == 1 or len(self.shards) == 1:
            return [fn(s, e) for s, e in self.shards]
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return list(pool.map(lambda se: fn(*se), self.shards))

    def matvec(self, w: np.ndarray) -> np.ndarray:
        w = np.ascontiguousarray(w, dtype=np.float64)
        if self.sparse:
            fn = lambda s, e: kernels.csr_matvec(self.indptr, self.indices, self.data, w, s, e)
        else:
            fn = lambda s, e: self.values[s:e] @ w
        parts = self._map(fn)
        return np.concatenate(parts) if parts else np.zeros(0)

    def rmatvec(self, r: np.ndarray) -> np.ndarray:
        r = np.ascontiguousarray(r, dtype=np.float64)
        if self.sparse:
            fn = lambda s, e: kernels.csr_rmatvec(self.indptr, self.indices, self.data, r, s, e, self.n_cols)
        else:
            fn = lambda s, e: self.values[s:e].T @ r[s:e]
        parts = self._map(fn)
        return _pairwise_sum(parts) if parts else np.zeros(self.n_cols)


def _loss_from_margins(z: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean(log1pexp(z) - y * z))


def objective(
    X: Features, y: Sequence[int], w: np.ndarray, b: float, lam: float, threads: int = 1
) -> tuple[float, np.ndarray, float]:
    """Return ``(loss, grad_w, grad_b)`` of the regularized mean logistic loss."""
    design = X if isinstance(X, _Design) else _Design(X, threads)
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    z = design.matvec(w) + b
    n = design.n_rows
    loss = _loss_from_margins(z, y) + 0.5 * lam * float(w @ w)
    r = sigmoid(z) - y
    grad_w = design.rmatvec(r) / n + lam * w
    grad_b = float(np.sum(r)) / n
    return loss, grad_w, grad_b


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    regularization: float
    feature_space: dict = field(default_factory=dict)
    epochs: int = 0
    converged: bool = False

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if not np.all(np.isfinite(self.weights)) or not math.isfinite(self.bias):
            raise PreconditionError("model parameters must be finite")
        dims = self.feature_space.get("dims")
        if dims is not None and dims != self.weights.shape[0]:
            raise PreconditionError(f"feature space has {dims} dims but model has {self.weights.shape[0]} weights")

    @property
    def dims(self) -> int:
        return self.weights.shape[0]

    @property
    def descriptor(self) -> str:
        return self.feature_space.get("descriptor", "")

    def negated(self) -> "LinearModel":
        return LinearModel(-self.weights, -self.bias, self.regularization, dict(self.feature_space))


def default_regularization(n_samples: int, C: float = 1.0) -> float:
    """lam = 1 / (n * C), the per-sample form of the usual ``C = 1`` penalty."""
    return 1.0 / (n_samples * C)


def train(
    X: Features,
    y: Sequence[int],
    lam: Optional[float] = None,
    tol: float = 1e-4,
    max_epochs: int = 1000,
    seed: int = 0,
    random_init: bool = False,
    threads: int = 1,
    feature_space: Optional[dict] = None,
) -> LinearModel:
    y = np.asarray(y, dtype=np.float64)
    design = _Design(X, threads)
    n, d = design.n_rows, design.n_cols
    if y.shape != (n,):
        raise PreconditionError(f"{n} feature rows but {y.shape[0]} labels")
    if not np.all((y == 0) | (y == 1)):
        raise PreconditionError("labels must be 0 or 1")
    if y.min() == y.max():
        raise DomainError(f"training labels contain a single class ({int(y[0])})")
    lam = default_regularization(n) if lam is None else float(lam)
    if lam < 0:
        raise PreconditionError("regularization must be >= 0")

    if random_init:
        rng = np.random.default_rng(seed)
        w = rng.normal(scale=0.01, size=d)
        b = float(rng.normal(scale=0.01))
    else:
        w = np.zeros(d)
        b = 0.0

    z = design.matvec(w) + b
    loss = _loss_from_margins(z, y) + 0.5 * lam * float(w @ w)
    precond = 1.0 / (1.0 + lam)
    step = 1.0
    converged = False
    epoch = 0
    for epoch in range(1, max_epochs + 1):
        r = sigmoid(z) - y
        g_w = design.rmatvec(r) / n + lam * w
        g_b = float(np.sum(r)) / n
        gmax = max(float(np.max(np.abs(g_w))) if d else 0.0, abs(g_b))
        if gmax < tol:
            converged = True
            epoch -= 1
            break
        # Scaling the weight step by 1 / (1 + lam) keeps the bias from stalling
        # when a large penalty forces a tiny shared step.
        d_w = g_w * precond
        g_sq = float(g_w @ d_w) + g_b * g_b
        # Margins are linear in (w, b): z(t) = z - t * (X d_w + g_b).
        dz = design.matvec(d_w) + g_b
        while True:
            w_new = w - step * d_w
            z_new = z - step * dz
            loss_new = _loss_from_margins(z_new, y) + 0.5 * lam * float(w_new @ w_new)
            if loss_new <= loss - 1e-4 * step * g_sq or step < 1e-12:
                break
            step *= 0.5
        w, b, loss = w_new, b - step * g_b, loss_new
        if epoch % 50 == 0:
            z = design.matvec(w) + b
        else:
            z = z_new
        step *= 2.0
    if not converged:
        logger.info("logistic regression stopped at max_epochs=%d without reaching tol=%g", max_epochs, tol)
    space = dict(feature_space or {})
    space.setdefault("dims", d)
    return LinearModel(w, b, lam, space, epoch, converged)


def _check_space(model: LinearModel, space: str, dims: int) -> None:
    if dims != model.dims:
        raise FeatureSpaceMismatch(f"vector has {dims} dims, model expects {model.dims}")
    if space and model.descriptor and space != model.descriptor:
        raise FeatureSpaceMismatch("vectors were built with a different vocabulary or embedding table than the model")


def predict_score(model: LinearModel, vector: SparseVector | DenseVector) -> float:
    """Positive-class probability for a single document vector."""
    _check_space(model, vector.space, vector.dims)
    if isinstance(vector, SparseVector):
        margin = float(np.dot(model.weights[vector.indices], vector.weights)) + model.bias
    else:
        margin = float(np.dot(model.weights, vector.values)) + model.bias
    return float(sigmoid(margin))


def predict_scores(model: LinearModel, X: Features) -> np.ndarray:
    if isinstance(X, (CSRMatrix, DenseMatrix)):
        _check_space(model, X.space, X.n_cols)
    else:
        _check_space(model, "", np.asarray(X).shape[1])
    return sigmoid(_Design(X).matvec(model.weights) + model.bias)


def model_to_dict(model: LinearModel) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "dims": model.dims,
        "bias": model.bias,
        "regularization": model.regularization,
        "epochs": model.epochs,
        "converged": model.converged,
        "weights": model.weights.tolist(),
        "feature_space": model.feature_space,
    }


def model_from_dict(payload: dict) -> LinearModel:
    try:
        if payload.get("format") != MODEL_FORMAT or payload.get("version") != MODEL_VERSION:
            raise ParseError(f"not a {MODEL_FORMAT} v{MODEL_VERSION} file")
        weights = np.array(payload["weights"], dtype=np.float64)
        if weights.shape != (payload["dims"],):
            raise ParseError("weights length does not match dims")
        return LinearModel(
            weights,
            float(payload["bias"]),
            float(payload["regularization"]),
            dict(payload["feature_space"]),
            int(payload.get("epochs", 0)),
            bool(payload.get("converged", False)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"invalid model payload: {exc}") from exc


def save_model(model: LinearModel, path: str | os.PathLike) -> None:
    atomic_write_text(path, json.dumps(model_to_dict(model), sort_keys=True) + "\n")


def load_model(path: str | os.PathLike) -> LinearModel:
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(payload, dict):
        raise ParseError(f"{path}: model file must hold a JSON object")
    return model_from_dict(payload)
