"""Loss, gradient and Hessian for least squares and logistic regression.

Per-datum functions take a :class:`Datum`; shard-level functions take a
:class:`Shard`, which stores the shard's covariates as an ``(n, d)`` array and
responses as a length-``n`` array.  All shard quantities are plain means over
the shard, i.e. the local loss ``L_j(theta) = n^{-1} sum_i L(theta; z_ij)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg
from scipy.special import expit

from . import kernels


class SolverError(RuntimeError):
    """Base class for numerical failures of the estimation routines."""


class SingularHessian(SolverError):
    pass


class NoConvergence(SolverError):
    def __init__(self, message: str, theta: np.ndarray | None = None):
        super().__init__(message)
        self.theta = theta


class Family(enum.Enum):
    LINEAR = "linear"
    LOGISTIC = "logistic"

    @property
    def code(self) -> int:
        return kernels.LINEAR if self is Family.LINEAR else kernels.LOGISTIC


@dataclass(frozen=True)
class ModelSpec:
    family: Family

    @classmethod
    def parse(cls, name: str) -> "ModelSpec":
        return cls(Family(name.lower()))


LINEAR = ModelSpec(Family.LINEAR)
LOGISTIC = ModelSpec(Family.LOGISTIC)


class Datum(NamedTuple):
    x: np.ndarray
    y: float


@dataclass(frozen=True)
class Shard:
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.ascontiguousarray(self.X, dtype=np.float64)
        y = np.ascontiguousarray(self.y, dtype=np.float64)
        if X.ndim != 2 or y.shape != (X.shape[0],):
            raise ValueError(f"shape mismatch: X {X.shape}, y {y.shape}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_data(cls, data: Sequence[Datum]) -> "Shard":
        if len(data) == 0:
            raise ValueError("empty shard")
        return cls(np.array([z.x for z in data], dtype=float), np.array([z.y for z in data], dtype=float))

    def __len__(self) -> int:
        return self.X.shape[0]

    def __iter__(self):
        for x, y in zip(self.X, self.y):
            yield Datum(x, float(y))

    def __getitem__(self, i: int) -> Datum:
        return Datum(self.X[i], float(self.y[i]))

    @property
    def d(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class SolverConfig:
    max_newton_iters: int = 50
    grad_tol: float = 1e-10
    ridge: float = 1e-8

    def __post_init__(self):
        if self.max_newton_iters < 1:
            raise ValueError("max_newton_iters must be positive")
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")
        if self.ridge < 0:
            raise ValueError("ridge must be non-negative")


def _check(theta, x):
    theta = np.asarray(theta, dtype=float)
    x = np.asarray(x, dtype=float)
    if theta.shape != x.shape:
        raise ValueError(f"dimension mismatch: theta {theta.shape} vs x {x.shape}")
    return theta, x


def log1pexp(b):
    """``log(1 + exp(b))`` without overflow."""
    b = np.asarray(b, dtype=float)
    out = np.where(b > 0, b + np.log1p(np.exp(-np.abs(b))), np.log1p(np.exp(np.minimum(b, 0.0))))
    return out if out.ndim else float(out)


def loss(model: ModelSpec, theta, z: Datum) -> float:
    theta, x = _check(theta, z.x)
    eta = float(x @ theta)
    if model.family is Family.LINEAR:
        return 0.5 * (z.y - eta) ** 2
    return -z.y * eta + log1pexp(eta)


def gradient(model: ModelSpec, theta, z: Datum) -> np.ndarray:
    theta, x = _check(theta, z.x)
    eta = float(x @ theta)
    r = eta - z.y if model.family is Family.LINEAR else float(expit(eta)) - z.y
    return r * x


def hessian(model: ModelSpec, theta, z: Datum) -> np.ndarray:
    theta, x = _check(theta, z.x)
    c = 1.0
    if model.family is Family.LOGISTIC:
        s = float(expit(x @ theta))
        c = s * (1.0 - s)
    return c * np.outer(x, x)


def _check_shard(theta, shard: Shard) -> np.ndarray:
    if len(shard) == 0:
        raise ValueError("empty shard")
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (shard.d,):
        raise ValueError(f"dimension mismatch: theta {theta.shape} vs d={shard.d}")
    return theta


def per_datum_gradients(model: ModelSpec, theta, shard: Shard) -> np.ndarray:
    theta = _check_shard(theta, shard)
    return kernels.grad_rows(shard.X, shard.y, theta, model.family.code)


def shard_moments(model: ModelSpec, theta, shard: Shard, weights=None):
    """Mean loss, gradient and Hessian over the shard (optionally weighted)."""
    theta = _check_shard(theta, shard)
    return kernels.weighted_moments(shard.X, shard.y, weights, theta, model.family.code)


def shard_loss(model: ModelSpec, theta, shard: Shard, weights=None) -> float:
    return shard_moments(model, theta, shard, weights)[0]


def shard_gradient(model: ModelSpec, theta, shard: Shard, weights=None) -> np.ndarray:
    if weights is not None:
        return shard_moments(model, theta, shard, weights)[1]
    theta = _check_shard(theta, shard)
    return kernels.block_mean_gradients(shard.X, shard.y, theta, model.family.code, len(shard))[0]


def shard_hessian(model: ModelSpec, theta, shard: Shard, weights=None) -> np.ndarray:
    return shard_moments(model, theta, shard, weights)[2]


def spd_factor(A: np.ndarray, ridge: float = 1e-8):
    """Cholesky factor of a symmetric matrix, retrying once with ``A + ridge*I``.

    Raises :class:`SingularHessian` if neither attempt yields a numerically
    positive definite factor.
    """
    A = np.asarray(A, dtype=float)
    attempts = [0.0] + ([ridge] if ridge > 0 else [])
    scale = max(float(np.max(np.abs(np.diag(A)))) if A.size else 0.0, np.finfo(float).tiny)
    for shift in attempts:
        M = A + shift * np.eye(A.shape[0]) if shift else A
        if not np.all(np.isfinite(M)):
            break
        try:
            c, low = scipy.linalg.cho_factor(M, lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            continue
        pivots = np.diag(c)
        if np.min(pivots) ** 2 > 1e-14 * scale:
            return c, low
    raise SingularHessian("matrix is not numerically positive definite")


def spd_solve(A, b, ridge: float = 1e-8) -> np.ndarray:
    return scipy.linalg.cho_solve(spd_factor(A, ridge), np.asarray(b, dtype=float), check_finite=False)


def spd_inverse(A, ridge: float = 1e-8) -> np.ndarray:
    inv = spd_solve(A, np.eye(np.asarray(A).shape[0]), ridge)
    return 0.5 * (inv + inv.T)


def fit_local(model: ModelSpec, shard: Shard, cfg: SolverConfig = SolverConfig(), weights=None) -> np.ndarray:
    """Minimise the (optionally weighted) mean loss over one shard.

    Least squares is solved directly from the normal equations.  Logistic
    regression runs damped Newton from zero, halving the step until the loss
    does not increase, and stops once the sup-norm of the mean gradient is at
    most ``cfg.grad_tol``.
    """
    if len(shard) == 0:
        raise ValueError("empty shard")
    d = shard.d
    if weights is not None:
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (len(shard),) or np.any(weights < 0) or weights.sum() <= 0:
            raise ValueError("weights must be non-negative, one per datum, not all zero")

    if model.family is Family.LINEAR:
        w = np.ones(len(shard)) if weights is None else weights
        Xw = shard.X * (w / w.sum())[:, None]
        gram = Xw.T @ shard.X
        gram = 0.5 * (gram + gram.T)
        return spd_solve(gram, Xw.T @ shard.y, cfg.ridge)

    theta = np.zeros(d)
    f, g, H = shard_moments(model, theta, shard, weights)
    for _ in range(cfg.max_newton_iters):
        if np.max(np.abs(g)) <= cfg.grad_tol:
            return theta
        step = spd_solve(H, g, cfg.ridge)
        t = 1.0
        while True:
            cand = theta - t * step
            f_new, g_new, H_new = shard_moments(model, cand, shard, weights)
            if f_new <= f + 1e-14 * max(1.0, abs(f)) or t < 1e-10:
                break
            t *= 0.5
        theta, f, g, H = cand, f_new, g_new, H_new
        if not np.all(np.isfinite(theta)):
            break
    if np.all(np.isfinite(g)) and np.max(np.abs(g)) <= cfg.grad_tol:
        return theta
    raise NoConvergence(
        f"Newton did not reach |grad|_inf <= {cfg.grad_tol:g} in {cfg.max_newton_iters} iterations",
        theta,
    )
