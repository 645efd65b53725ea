"""Distributed multiplier bootstrap for simultaneous inference.

k-grad and n+k-1-grad bootstraps on top of the CSL estimator, run over a
simulated master/worker cluster, with oracle, BLB and SDB baselines and a
Monte-Carlo harness.
"""

from .bootstrap import (
    L2,
    SUP,
    BootMethod,
    BootstrapSummary,
    Coordinate,
    NormFunctional,
    conditional_covariance,
    covers,
    dist_boots,
    empirical_quantile,
    kgrad_draw,
    nk1grad_draw,
)
from .cluster import Cluster, CommLedger
from .csl import CslResult, CslState, csl_init, csl_iterates, csl_round, csl_run, master_grads_for
from .kernels import BACKEND
from .models import (
    LINEAR,
    LOGISTIC,
    Datum,
    Family,
    ModelSpec,
    NoConvergence,
    Shard,
    SingularHessian,
    SolverConfig,
    SolverError,
    fit_local,
)
from .synthdata import CovKind, DesignSpec, ShardedDataset, build_covariance, draw_theta_star, sample_dataset, shard
from .theory import TauPlan, exponents_from_sizes, tau_min

__version__ = "0.1.0"
