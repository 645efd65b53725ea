"""Synthetic Gaussian designs, responses, true coefficients, and sharding."""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import expit

from .models import LINEAR, Family, ModelSpec, Shard
from .seeding import as_seedspec


class CovKind(enum.Enum):
    TOEPLITZ = "toeplitz"
    EQUICORR = "equicorr"
    IDENTITY = "identity"


TOEPLITZ_RHO = 0.9
EQUICORR_RHO = 0.8


def build_covariance(cov: CovKind | str, d: int) -> np.ndarray:
    cov = CovKind(cov)
    if d < 1:
        raise ValueError("d must be at least 1")
    if cov is CovKind.TOEPLITZ:
        idx = np.arange(d)
        return TOEPLITZ_RHO ** np.abs(idx[:, None] - idx[None, :]).astype(float)
    if cov is CovKind.EQUICORR:
        S = np.full((d, d), EQUICORR_RHO)
        np.fill_diagonal(S, 1.0)
        return S
    return np.eye(d)


@dataclass(frozen=True)
class DesignSpec:
    d: int
    theta_star: np.ndarray = field(compare=False)
    cov: CovKind = CovKind.TOEPLITZ
    model: ModelSpec = LINEAR
    noise_sd: float = 1.0

    def __post_init__(self):
        theta = np.asarray(self.theta_star, dtype=float)
        if theta.shape != (self.d,):
            raise ValueError(f"theta_star has shape {theta.shape}, expected ({self.d},)")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be non-negative")
        object.__setattr__(self, "theta_star", theta)
        object.__setattr__(self, "cov", CovKind(self.cov))


def draw_theta_star(d: int, seed) -> np.ndarray:
    return as_seedspec(seed).generator().uniform(-0.5, 0.5, size=d)


def sample_covariates(cov: CovKind | str, d: int, N: int, seed) -> np.ndarray:
    S = build_covariance(cov, d)
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise ValueError("covariance is not positive definite") from exc
    Z = as_seedspec(seed).generator().standard_normal((N, d))
    return Z @ L.T


def sample_dataset(spec: DesignSpec, N: int, seed) -> Shard:
    """Draw ``N`` i.i.d. observations; returns them as one unsharded block."""
    if N < 1:
        raise ValueError("N must be at least 1")
    seed = as_seedspec(seed)
    X = sample_covariates(spec.cov, spec.d, N, seed.child("x"))
    eta = X @ spec.theta_star
    rng = seed.child("y").generator()
    if spec.model.family is Family.LINEAR:
        y = eta + spec.noise_sd * rng.standard_normal(N)
    else:
        y = (rng.random(N) < expit(eta)).astype(float)
    return Shard(X, y)


@dataclass(frozen=True)
class ShardedDataset:
    """``k`` equal-size shards; ``shards[0]`` is the master's.

    When built by :func:`shard`, ``blocks`` holds the contiguous pooled data
    the shards are views of, so per-shard reductions can run in one pass.
    """

    shards: tuple
    blocks: Shard | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        sizes = {len(s) for s in self.shards}
        if not self.shards or len(sizes) != 1:
            raise ValueError("need at least one shard, all of equal size")

    @property
    def k(self) -> int:
        return len(self.shards)

    @property
    def n(self) -> int:
        return len(self.shards[0])

    @property
    def N(self) -> int:
        return self.n * self.k

    @property
    def d(self) -> int:
        return self.shards[0].d

    @property
    def master(self) -> Shard:
        return self.shards[0]

    def pooled(self) -> Shard:
        if self.blocks is not None:
            return self.blocks
        return Shard(np.vstack([s.X for s in self.shards]), np.concatenate([s.y for s in self.shards]))


def shard(data: Shard, k: int) -> ShardedDataset:
    """Split into ``k`` contiguous blocks; block 0 belongs to the master."""
    N = len(data)
    if k < 1 or N % k:
        raise ValueError(f"k={k} does not divide N={N}")
    n = N // k
    shards = tuple(Shard(data.X[j * n:(j + 1) * n], data.y[j * n:(j + 1) * n]) for j in range(k))
    return ShardedDataset(shards, blocks=data)


def dump_csv(data: Shard, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x_{l + 1}" for l in range(data.d)] + ["y"])
        for x, y in zip(data.X, data.y):
            w.writerow([repr(float(v)) for v in x] + [repr(float(y))])


def load_csv(path) -> Shard:
    with open(Path(path), newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if not header or header[-1] != "y":
        raise ValueError("expected columns x_1..x_d,y")
    arr = np.array(body, dtype=float).reshape(len(body), len(header))
    return Shard(arr[:, :-1], arr[:, -1])
