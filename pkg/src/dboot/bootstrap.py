"""k-grad and n+k-1-grad multiplier bootstraps run on the master node.

Both statistics are norms of a linear map applied to Gaussian multipliers,
``W = || Q @ eps ||``, with the columns of ``Q`` being the (scaled, centred)
gradients premultiplied by ``-Theta``.  Building ``Q`` once per bootstrap and
feeding all ``B`` multiplier rows through :func:`dboot.kernels.multiplier_stats`
is what keeps the bootstrap cheap.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .seeding import normal_rows


class BootMethod(enum.Enum):
    KGRAD = "kgrad"
    NK1GRAD = "nk1grad"


@dataclass(frozen=True)
class NormFunctional:
    """``sup`` (simultaneous), ``coord`` (1-based coordinate ``index``), or ``l2``."""

    kind: str = "sup"
    index: int | None = None

    def __post_init__(self):
        if self.kind not in ("sup", "coord", "l2"):
            raise ValueError(f"unknown norm {self.kind!r}")
        if self.kind == "coord" and (self.index is None or self.index < 1):
            raise ValueError("coordinate norms need a 1-based index")

    @classmethod
    def parse(cls, text: str) -> "NormFunctional":
        text = text.strip().lower()
        if text.startswith("coord:"):
            return cls("coord", int(text.split(":", 1)[1]))
        return cls(text)

    def __str__(self) -> str:
        return f"coord:{self.index}" if self.kind == "coord" else self.kind

    @property
    def code(self) -> int:
        return {"sup": kernels.NORM_SUP, "coord": kernels.NORM_COORD, "l2": kernels.NORM_L2}[self.kind]

    def check_dim(self, d: int) -> None:
        if self.kind == "coord" and self.index > d:
            raise ValueError(f"coordinate {self.index} out of range for d={d}")

    def __call__(self, v) -> float:
        v = np.asarray(v, dtype=float)
        if self.kind == "sup":
            return float(np.max(np.abs(v)))
        if self.kind == "l2":
            return float(np.sqrt(v @ v))
        self.check_dim(v.shape[0])
        return float(abs(v[self.index - 1]))


SUP = NormFunctional("sup")
L2 = NormFunctional("l2")


def Coordinate(l: int) -> NormFunctional:
    return NormFunctional("coord", l)


def _as_rows(vectors, d=None) -> np.ndarray:
    G = np.asarray(vectors, dtype=float)
    if G.ndim == 1 and G.size == 0:
        G = G.reshape(0, d if d is not None else 0)
    if G.ndim != 2 or (d is not None and G.shape[1] != d):
        raise ValueError(f"gradient array has shape {G.shape}, expected (m, {d})")
    return G


def _check_inv(theta_inv, d) -> np.ndarray:
    T = np.asarray(theta_inv, dtype=float)
    if T.shape != (d, d):
        raise ValueError(f"inverse Hessian has shape {T.shape}, expected ({d}, {d})")
    return T


def kgrad_matrix(theta_inv, grads, n: int) -> np.ndarray:
    """Columns ``-Theta sqrt(n/k) (g_j - gbar)``, shape ``(d, k)``."""
    G = _as_rows(grads)
    k, d = G.shape
    if k < 1:
        raise ValueError("need at least one gradient")
    T = _check_inv(theta_inv, d)
    C = (G - G.mean(axis=0)) * math.sqrt(n / k)
    return -T @ C.T


def nk1grad_matrix(theta_inv, master_grads, worker_grads, gbar=None) -> np.ndarray:
    """Columns for the n+k-1-grad statistic, shape ``(d, n + k - 1)``.

    The first ``n`` columns carry the master's per-datum gradients, the rest
    the ``sqrt(n)``-scaled worker gradients, all centred at the global mean
    gradient and divided by ``sqrt(n + k - 1)``.
    """
    M = _as_rows(master_grads)
    n, d = M.shape
    if n < 1:
        raise ValueError("master must hold at least one datum")
    Wk = _as_rows(worker_grads, d)
    T = _check_inv(theta_inv, d)
    k = Wk.shape[0] + 1
    if gbar is None:
        gbar = (M.mean(axis=0) + Wk.sum(axis=0)) / k
    C = np.vstack([M - gbar, math.sqrt(n) * (Wk - gbar)]) / math.sqrt(n + k - 1)
    return -T @ C.T


def kgrad_draw(theta_inv, grads, eps, n: int, norm: NormFunctional = SUP) -> float:
    Q = kgrad_matrix(theta_inv, grads, n)
    eps = np.asarray(eps, dtype=float)
    if eps.shape != (Q.shape[1],):
        raise ValueError("need one multiplier per machine")
    norm.check_dim(Q.shape[0])
    return float(kernels.multiplier_stats(eps[None, :], Q, norm.code, (norm.index or 1) - 1)[0])


def nk1grad_draw(theta_inv, master_grads, worker_grads, eps_master, eps_workers, norm: NormFunctional = SUP) -> float:
    Q = nk1grad_matrix(theta_inv, master_grads, worker_grads)
    eps = np.concatenate([np.asarray(eps_master, dtype=float).ravel(), np.asarray(eps_workers, dtype=float).ravel()])
    if eps.shape != (Q.shape[1],):
        raise ValueError("need one multiplier per master datum plus one per worker")
    norm.check_dim(Q.shape[0])
    return float(kernels.multiplier_stats(eps[None, :], Q, norm.code, (norm.index or 1) - 1)[0])


def empirical_quantile(samples, alpha: float) -> float:
    """The ``ceil(alpha * B)``-th smallest sample (1-based), i.e. ``inf{t: F_B(t) >= alpha}``."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empirical quantile of an empty sample")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    pos = alpha * x.size
    r = round(pos)
    idx = r if abs(pos - r) <= 1e-9 * max(1.0, pos) else math.ceil(pos)
    idx = min(max(idx, 1), x.size)
    return float(np.partition(x, idx - 1)[idx - 1])


@dataclass(frozen=True)
class BootstrapSummary:
    draws: np.ndarray
    c_alpha: float
    intervals: np.ndarray
    B: int
    alpha: float
    N: int
    method: BootMethod
    norm: NormFunctional

    @property
    def half_width(self) -> float:
        return self.c_alpha / math.sqrt(self.N)

    @property
    def width(self) -> float:
        return 2.0 * self.half_width


def multiplier_matrix(method: BootMethod, theta_inv, grads, master_grads=None, n: int | None = None) -> np.ndarray:
    method = BootMethod(method)
    G = _as_rows(grads)
    if method is BootMethod.KGRAD:
        if n is None:
            if master_grads is None:
                raise ValueError("k-grad needs the shard size n")
            n = len(master_grads)
        return kgrad_matrix(theta_inv, G, n)
    if master_grads is None:
        raise ValueError("n+k-1-grad needs the master's per-datum gradients")
    return nk1grad_matrix(theta_inv, master_grads, G[1:], gbar=G.mean(axis=0))


def dist_boots(
    method: BootMethod | str,
    theta_tilde,
    grads,
    theta_inv,
    *,
    master_grads=None,
    n: int | None = None,
    B: int = 500,
    alpha: float = 0.95,
    norm: NormFunctional = SUP,
    seed=0,
) -> BootstrapSummary:
    """Bootstrap the sampling distribution of ``||sqrt(N)(theta_tilde - theta*)||``.

    Only master-side inputs are used: the k gathered gradients, the master's
    inverse Hessian and, for n+k-1-grad, the master's per-datum gradients.
    Multiplier row ``b`` is drawn from the stream ``(seed, b)``.
    """
    method = BootMethod(method)
    if B < 1:
        raise ValueError("B must be at least 1")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    theta_tilde = np.asarray(theta_tilde, dtype=float)
    Q = multiplier_matrix(method, theta_inv, grads, master_grads, n)
    d, m = Q.shape
    if theta_tilde.shape != (d,):
        raise ValueError("theta_tilde dimension does not match the gradients")
    norm.check_dim(d)
    k = len(grads)
    n_eff = n if n is not None else len(master_grads)
    E = normal_rows(seed, B, m)
    draws = kernels.multiplier_stats(E, Q, norm.code, (norm.index or 1) - 1)
    c = empirical_quantile(draws, alpha)
    N = n_eff * k
    h = c / math.sqrt(N)
    intervals = np.column_stack([theta_tilde - h, theta_tilde + h])
    return BootstrapSummary(draws, c, intervals, B, alpha, N, method, norm)


def conditional_covariance(method: BootMethod | str, theta_inv, grads, master_grads=None, n: int | None = None, k: int | None = None) -> np.ndarray:
    """Covariance of the pre-norm bootstrap vector given the data.

    k-grad:     Theta (k^-1 sum_j n (g_j - gbar)(g_j - gbar)^T) Theta^T
    n+k-1-grad: Theta (n+k-1)^-1 (sum_i (g_i1 - gbar)(...)^T
                                  + sum_{j>=2} n (g_j - gbar)(...)^T) Theta^T
    """
    method = BootMethod(method)
    G = _as_rows(grads)
    k = G.shape[0] if k is None else k
    if G.shape[0] != k:
        raise ValueError("number of gradients does not match k")
    d = G.shape[1]
    T = _check_inv(theta_inv, d)
    gbar = G.mean(axis=0)
    S = np.zeros((d, d))
    if method is BootMethod.KGRAD:
        if n is None:
            n = len(master_grads)
        for g in G:
            S += n * np.outer(g - gbar, g - gbar)
        S /= k
    else:
        M = _as_rows(master_grads, d)
        n = M.shape[0] if n is None else n
        for g in M:
            S += np.outer(g - gbar, g - gbar)
        for g in G[1:]:
            S += n * np.outer(g - gbar, g - gbar)
        S /= n + k - 1
    out = T @ S @ T.T
    return 0.5 * (out + out.T)


def covers(theta_star, theta_tilde, c_alpha: float, N: int, norm: NormFunctional = SUP) -> bool:
    theta_star = np.asarray(theta_star, dtype=float)
    theta_tilde = np.asarray(theta_tilde, dtype=float)
    if theta_star.shape != theta_tilde.shape:
        raise ValueError("dimension mismatch")
    return norm(math.sqrt(N) * (theta_tilde - theta_star)) <= c_alpha
