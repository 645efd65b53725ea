"""In-process master/worker cluster with a communication ledger.

Node 0 is the master and owns shard 0; nodes 1..k-1 are workers.  Workers'
data are only touched inside :meth:`Cluster.broadcast_and_gather_gradients`,
and every touch is counted in ``worker_reads`` so tests can check it.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .kernels import block_mean_gradients
from .models import ModelSpec, per_datum_gradients, shard_gradient, shard_hessian, spd_inverse
from .synthdata import ShardedDataset


@dataclass
class CommLedger:
    rounds: int = 0
    scalars_sent: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def record(self, rounds: int, scalars: int) -> None:
        with self._lock:
            self.rounds += rounds
            self.scalars_sent += scalars

    def snapshot(self) -> tuple[int, int]:
        with self._lock:
            return self.rounds, self.scalars_sent


class Cluster:
    def __init__(self, sharded: ShardedDataset, model: ModelSpec, executor=None):
        self.sharded = sharded
        self.model = model
        self.ledger = CommLedger()
        self.worker_reads = 0
        self._executor = executor

    @property
    def k(self) -> int:
        return self.sharded.k

    @property
    def n(self) -> int:
        return self.sharded.n

    @property
    def d(self) -> int:
        return self.sharded.d

    @property
    def N(self) -> int:
        return self.sharded.N

    def _check_theta(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.d,):
            raise ValueError(f"theta has shape {theta.shape}, expected ({self.d},)")
        return theta

    def broadcast_and_gather_gradients(self, theta) -> list[np.ndarray]:
        """Send ``theta`` to every worker and collect ``[grad L_1, ..., grad L_k]``.

        Costs one round and ``2 (k-1) d`` scalars.  Results are returned in
        shard order whether workers are evaluated sequentially or on the
        executor.
        """
        theta = self._check_theta(theta)
        shards = self.sharded.shards
        blocks = self.sharded.blocks
        if self._executor is not None and self.k > 1:
            master = shard_gradient(self.model, theta, shards[0])
            workers = list(self._executor.map(lambda s: shard_gradient(self.model, theta, s), shards[1:]))
            grads = [master] + workers
        elif blocks is not None:
            # one pass over the pooled blocks; each block is reduced exactly as
            # shard_gradient would reduce it on its own
            grads = list(block_mean_gradients(blocks.X, blocks.y, theta, self.model.family.code, self.n))
        else:
            grads = [shard_gradient(self.model, theta, s) for s in shards]
        self.worker_reads += self.k - 1
        self.ledger.record(1, 2 * (self.k - 1) * self.d)
        return grads

    def master_per_datum_gradients(self, theta) -> np.ndarray:
        """Rows are ``grad L(theta; z_i1)`` for the master's data.  No communication."""
        return per_datum_gradients(self.model, self._check_theta(theta), self.sharded.master)

    def master_gradient(self, theta) -> np.ndarray:
        return shard_gradient(self.model, self._check_theta(theta), self.sharded.master)

    def master_hessian_inverse(self, theta, ridge: float = 1e-8) -> np.ndarray:
        H = shard_hessian(self.model, self._check_theta(theta), self.sharded.master)
        return spd_inverse(H, ridge)
