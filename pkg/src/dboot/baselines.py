"""Reference quantities: the centralised fit, the oracle width, the oracle
multiplier bootstrap, and BLB/SDB width baselines.

The BLB and SDB routines are reimplementations for width comparison only.
Subsets are the existing shards; every resample puts ``N`` multinomial
counts on a shard's ``n`` points and refits with those weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bootstrap import SUP, NormFunctional, empirical_quantile
from .models import ModelSpec, Shard, SolverConfig, fit_local, per_datum_gradients, shard_hessian, spd_inverse
from .seeding import as_seedspec, normal_rows
from .synthdata import DesignSpec, ShardedDataset, sample_dataset
from . import kernels


@dataclass(frozen=True)
class OracleResult:
    theta_hat: np.ndarray
    width: float
    c_star: float


@dataclass(frozen=True)
class BlbConfig:
    r: int = 100
    alpha: float = 0.95

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("r must be at least 1")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")


def _pooled(dataset) -> Shard:
    return dataset.pooled() if isinstance(dataset, ShardedDataset) else dataset


def centralized_fit(dataset, model: ModelSpec, cfg: SolverConfig = SolverConfig()) -> np.ndarray:
    return fit_local(model, _pooled(dataset), cfg)


def oracle_deviations(spec: DesignSpec, N: int, reps: int, seed, norm: NormFunctional = SUP,
                      cfg: SolverConfig = SolverConfig(), executor=None) -> np.ndarray:
    """``norm(theta_hat_r - theta*)`` for ``reps`` independent datasets of size ``N``."""
    if reps < 1:
        raise ValueError("reps must be at least 1")
    seed = as_seedspec(seed)

    def one(r):
        data = sample_dataset(spec, N, seed.child("oracle", r))
        return norm(fit_local(spec.model, data, cfg) - spec.theta_star)

    mapper = executor.map if executor is not None else map
    return np.fromiter(mapper(one, range(reps)), dtype=float, count=reps)


def oracle_width(spec: DesignSpec, N: int, reps: int = 500, alpha: float = 0.95, seed=0,
                 norm: NormFunctional = SUP, cfg: SolverConfig = SolverConfig(), executor=None) -> float:
    """Twice the ``alpha`` empirical quantile of ``norm(theta_hat - theta*)``."""
    devs = oracle_deviations(spec, N, reps, seed, norm, cfg, executor)
    return 2.0 * empirical_quantile(devs, alpha)


def oracle_multiplier_boot(dataset, theta_hat, model: ModelSpec, B: int = 500, alpha: float = 0.95,
                           norm: NormFunctional = SUP, seed=0, ridge: float = 1e-8,
                           return_draws: bool = False):
    """Quantile of ``||-H^-1 N^-1/2 sum_i eps_i (g_i - gbar)||`` over ``B`` draws.

    ``H`` is the full-data Hessian at ``theta_hat``; one multiplier per datum.
    """
    data = _pooled(dataset)
    N = len(data)
    G = per_datum_gradients(model, theta_hat, data)
    H_inv = spd_inverse(shard_hessian(model, theta_hat, data), ridge)
    Q = -H_inv @ ((G - G.mean(axis=0)).T / math.sqrt(N))
    norm.check_dim(Q.shape[0])
    draws = kernels.multiplier_stats(normal_rows(seed, B, N), Q, norm.code, (norm.index or 1) - 1)
    c = empirical_quantile(draws, alpha)
    return (c, draws) if return_draws else c


def oracle_analysis(dataset, model: ModelSpec, width: float, B: int = 500, alpha: float = 0.95,
                    norm: NormFunctional = SUP, seed=0, cfg: SolverConfig = SolverConfig()) -> OracleResult:
    theta_hat = centralized_fit(dataset, model, cfg)
    c = oracle_multiplier_boot(dataset, theta_hat, model, B, alpha, norm, seed, cfg.ridge)
    return OracleResult(theta_hat, width, c)


def multinomial_weights(rng: np.random.Generator, N: int, n: int) -> np.ndarray:
    """Counts of ``N`` uniform draws over ``n`` cells (sums to ``N`` exactly)."""
    return rng.multinomial(N, np.full(n, 1.0 / n)).astype(float)


def blb_subset_width(model: ModelSpec, shard: Shard, weight_vectors, alpha: float,
                     cfg: SolverConfig = SolverConfig(), norm: NormFunctional = SUP) -> float:
    theta_j = fit_local(model, shard, cfg)
    devs = [norm(fit_local(model, shard, cfg, weights=w) - theta_j) for w in weight_vectors]
    return 2.0 * empirical_quantile(devs, alpha)


def blb_width(sharded: ShardedDataset, model: ModelSpec, blb: BlbConfig = BlbConfig(), seed=0,
              cfg: SolverConfig = SolverConfig(), norm: NormFunctional = SUP) -> float:
    """Bag of little bootstraps with the shards as subsets; mean of per-shard widths."""
    seed = as_seedspec(seed)
    N, n = sharded.N, sharded.n
    widths = []
    for j, sh in enumerate(sharded.shards):
        weights = (multinomial_weights(seed.child("blb", j, b).generator(), N, n) for b in range(blb.r))
        widths.append(blb_subset_width(model, sh, weights, blb.alpha, cfg, norm))
    return float(np.mean(widths))


def sdb_width(sharded: ShardedDataset, model: ModelSpec, alpha: float = 0.95, seed=0,
              cfg: SolverConfig = SolverConfig(), norm: NormFunctional = SUP) -> float:
    """Subsampled double bootstrap: one resample per shard, pooled across shards."""
    seed = as_seedspec(seed)
    N, n = sharded.N, sharded.n
    devs = []
    for j, sh in enumerate(sharded.shards):
        w = multinomial_weights(seed.child("sdb", j).generator(), N, n)
        devs.append(norm(fit_local(model, sh, cfg, weights=w) - fit_local(model, sh, cfg)))
    return 2.0 * empirical_quantile(devs, alpha)
