"""Communication-efficient surrogate likelihood (CSL) iterations.

Each round broadcasts the current iterate, gathers the k local gradients,
and takes a Newton step that uses the *master's* Hessian with the *global*
gradient:

    theta_t = theta_{t-1} - H_1(theta_{t-1})^{-1} * mean_j grad L_j(theta_{t-1})

No damping is applied.  A non-finite iterate raises :class:`NoConvergence`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .cluster import Cluster
from .models import NoConvergence, SolverConfig, fit_local


@dataclass(frozen=True)
class CslState:
    t: int
    theta: np.ndarray
    theta_prev: np.ndarray | None = None
    grads_at_prev: tuple | None = None
    theta_tilde_inv_hessian: np.ndarray | None = None

    @property
    def global_gradient(self) -> np.ndarray:
        return mean_in_order(self.grads_at_prev)


class CslResult(NamedTuple):
    theta: np.ndarray
    grads: tuple
    theta_tilde_inv_hessian: np.ndarray


def mean_in_order(vectors) -> np.ndarray:
    """Mean of the vectors, summed strictly in index order."""
    acc = np.array(vectors[0], dtype=float, copy=True)
    for v in vectors[1:]:
        acc += v
    return acc / len(vectors)


def csl_init(cluster: Cluster, cfg: SolverConfig = SolverConfig()) -> CslState:
    theta0 = fit_local(cluster.model, cluster.sharded.master, cfg)
    return CslState(t=0, theta=theta0)


def csl_round(state: CslState, cluster: Cluster, cfg: SolverConfig = SolverConfig()) -> CslState:
    theta_old = state.theta
    grads = tuple(cluster.broadcast_and_gather_gradients(theta_old))
    inv_h = cluster.master_hessian_inverse(theta_old, cfg.ridge)
    with np.errstate(over="ignore", invalid="ignore"):
        theta_new = theta_old - inv_h @ mean_in_order(grads)
    if not np.all(np.isfinite(theta_new)):
        raise NoConvergence(f"CSL iterate became non-finite at round {state.t + 1}", theta_old)
    return CslState(
        t=state.t + 1,
        theta=theta_new,
        theta_prev=theta_old,
        grads_at_prev=grads,
        theta_tilde_inv_hessian=inv_h,
    )


def csl_iterates(cluster: Cluster, tau: int, cfg: SolverConfig = SolverConfig()) -> Iterator[CslState]:
    """Yield the states after rounds 1..tau (the initial local fit is not yielded)."""
    if tau < 1:
        raise ValueError("tau must be at least 1")
    state = csl_init(cluster, cfg)
    for _ in range(tau):
        state = csl_round(state, cluster, cfg)
        yield state


def csl_run(cluster: Cluster, tau: int, cfg: SolverConfig = SolverConfig()) -> CslResult:
    """Return ``(theta^(tau), grads at theta^(tau-1), master inverse Hessian at theta^(tau-1))``."""
    for state in csl_iterates(cluster, tau, cfg):
        pass
    return CslResult(state.theta, state.grads_at_prev, state.theta_tilde_inv_hessian)


def master_grads_for(state: CslState, cluster: Cluster, at: str = "prev") -> np.ndarray:
    """Master per-datum gradients for the n+k-1-grad bootstrap.

    ``at="prev"`` evaluates them at theta^(tau-1), consistent with the other
    bootstrap inputs; ``at="current"`` uses theta^(tau) instead.
    """
    if at == "prev":
        return cluster.master_per_datum_gradients(state.theta_prev)
    if at == "current":
        return cluster.master_per_datum_gradients(state.theta)
    raise ValueError(f"unknown evaluation point {at!r}")
