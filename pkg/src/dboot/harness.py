"""Monte-Carlo experiments: coverage/width studies, baseline comparison,
run-time benchmark, and CSV/JSON reports.

A replication is a pure job of ``(config, replication index)``: it samples
one dataset of size ``N`` and reuses it for every ``k`` in the grid, running
CSL once up to the largest ``tau`` and bootstrapping at each requested round.
Jobs may run on a thread pool; results are merged in replication order, so
reports do not depend on the number of threads (wall times aside).
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .baselines import BlbConfig, blb_width, oracle_width, sdb_width
from .bootstrap import SUP, BootMethod, NormFunctional, covers, dist_boots
from .cluster import Cluster
from .csl import csl_iterates, master_grads_for
from .models import ModelSpec, SolverConfig, SolverError
from .seeding import SeedSpec
from .synthdata import CovKind, DesignSpec, draw_theta_star, sample_dataset, shard

GRADIENT_METHODS = ("kgrad", "nk1grad")
BASELINE_METHODS = ("blb", "sdb")
COLUMNS = ("d", "k", "n", "tau", "method", "coverage", "avg_width", "oracle_width",
           "wall_time_s", "comm_rounds", "failures")


@dataclass(frozen=True)
class ExperimentConfig:
    d: int = 2
    N: int = 2**12
    k_grid: tuple = (16,)
    tau_grid: tuple = (2,)
    methods: tuple = GRADIENT_METHODS
    model: str = "linear"
    cov: str = "toeplitz"
    noise_sd: float = 1.0
    B: int = 500
    alpha: float = 0.95
    reps: int = 200
    norm: str = "sup"
    root_seed: int = 0
    oracle_reps: int = 500
    blb_r: int = 100
    max_newton_iters: int = 50
    grad_tol: float = 1e-10
    ridge: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "k_grid", tuple(int(k) for k in self.k_grid))
        object.__setattr__(self, "tau_grid", tuple(sorted(int(t) for t in self.tau_grid)))
        object.__setattr__(self, "methods", tuple(self.methods))
        for k in self.k_grid:
            if k < 1 or self.N % k:
                raise ValueError(f"k={k} does not divide N={self.N}")
        if self.reps < 1 or self.B < 1 or self.oracle_reps < 1:
            raise ValueError("reps, B and oracle_reps must be positive")
        if not self.tau_grid or self.tau_grid[0] < 1:
            raise ValueError("tau_grid needs values >= 1")
        unknown = set(self.methods) - set(GRADIENT_METHODS + BASELINE_METHODS)
        if unknown:
            raise ValueError(f"unknown methods: {sorted(unknown)}")
        CovKind(self.cov)
        ModelSpec.parse(self.model)
        self.norm_functional.check_dim(self.d)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        names = {f.name for f in fields(cls)}
        extra = set(raw) - names
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**raw)

    @classmethod
    def load(cls, path) -> list["ExperimentConfig"]:
        """Read a JSON config.  ``"d"`` may be a list, giving one config per dimension."""
        raw = json.loads(Path(path).read_text())
        ds = raw.get("d", cls.d)
        if isinstance(ds, list):
            return [cls.from_dict({**raw, "d": d}) for d in ds]
        return [cls.from_dict(raw)]

    def replace(self, **changes) -> "ExperimentConfig":
        return ExperimentConfig(**{**asdict(self), **changes})

    @property
    def seed(self) -> SeedSpec:
        return SeedSpec(self.root_seed)

    @property
    def model_spec(self) -> ModelSpec:
        return ModelSpec.parse(self.model)

    @property
    def norm_functional(self) -> NormFunctional:
        return NormFunctional.parse(self.norm)

    @property
    def solver(self) -> SolverConfig:
        return SolverConfig(self.max_newton_iters, self.grad_tol, self.ridge)

    def design(self) -> DesignSpec:
        """The design with theta* drawn once per (root seed, d)."""
        theta = draw_theta_star(self.d, self.seed.child("theta_star", self.d))
        return DesignSpec(self.d, theta, CovKind(self.cov), self.model_spec, self.noise_sd)


@dataclass
class ReportRow:
    d: int
    k: int
    n: int
    tau: int
    method: str
    coverage: float | None
    avg_width: float | None
    oracle_width: float | None
    wall_time_s: float
    comm_rounds: int
    failures: int


@dataclass
class ExperimentReport:
    rows: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def row(self, method: str, k: int, tau: int | None = None, d: int | None = None) -> ReportRow:
        for r in self.rows:
            if r.method == method and r.k == k and (tau is None or r.tau == tau) and (d is None or r.d == d):
                return r
        raise KeyError((method, k, tau, d))

    def extend(self, other: "ExperimentReport") -> "ExperimentReport":
        return ExperimentReport(self.rows + other.rows)

    def deterministic_view(self) -> list[tuple]:
        """All fields except wall time, for reproducibility comparisons."""
        return [tuple(getattr(r, c) for c in COLUMNS if c != "wall_time_s") for r in self.rows]


@dataclass
class _Cell:
    covered: list = field(default_factory=list)
    widths: list = field(default_factory=list)
    times: list = field(default_factory=list)
    rounds: set = field(default_factory=set)
    failures: int = 0


def _pool(threads: int):
    return ThreadPoolExecutor(max_workers=threads) if threads > 1 else None


def _map(pool, fn, items):
    return pool.map(fn, items) if pool is not None else map(fn, items)


def _gradient_cells(cfg: ExperimentConfig, design: DesignSpec, data, r: int, k: int, methods) -> dict:
    """Results for every (tau, method) of one replication at one k."""
    out = {}
    norm = cfg.norm_functional
    cluster = Cluster(shard(data, k), design.model)
    wanted = set(cfg.tau_grid)
    t_csl = time.perf_counter()
    try:
        for state in csl_iterates(cluster, cfg.tau_grid[-1], cfg.solver):
            if state.t not in wanted:
                continue
            csl_elapsed = time.perf_counter() - t_csl
            rounds = cluster.ledger.rounds
            for m in methods:
                t0 = time.perf_counter()
                master = master_grads_for(state, cluster) if m == "nk1grad" else None
                summary = dist_boots(
                    m, state.theta, state.grads_at_prev, state.theta_tilde_inv_hessian,
                    master_grads=master, n=cluster.n, B=cfg.B, alpha=cfg.alpha, norm=norm,
                    seed=cfg.seed.child("boot", cfg.d, r, k, state.t, m),
                )
                hit = covers(design.theta_star, state.theta, summary.c_alpha, cluster.N, norm)
                out[(state.t, m)] = (hit, summary.width, csl_elapsed + time.perf_counter() - t0, rounds)
    except SolverError:
        for tau in cfg.tau_grid:
            for m in methods:
                out.setdefault((tau, m), None)
    return out


def _baseline_cells(cfg: ExperimentConfig, design: DesignSpec, data, r: int, k: int, methods) -> dict:
    out = {}
    sharded = shard(data, k)
    for m in methods:
        t0 = time.perf_counter()
        seed = cfg.seed.child(m, cfg.d, r, k)
        try:
            if m == "blb":
                w = blb_width(sharded, design.model, BlbConfig(cfg.blb_r, cfg.alpha), seed, cfg.solver, cfg.norm_functional)
            else:
                w = sdb_width(sharded, design.model, cfg.alpha, seed, cfg.solver, cfg.norm_functional)
        except SolverError:
            out[(0, m)] = None
            continue
        out[(0, m)] = (None, w, time.perf_counter() - t0, 1)
    return out


def _run(cfg: ExperimentConfig, methods, threads: int) -> ExperimentReport:
    design = cfg.design()
    grad_methods = [m for m in methods if m in GRADIENT_METHODS]
    base_methods = [m for m in methods if m in BASELINE_METHODS]

    def job(r):
        data = sample_dataset(design, cfg.N, cfg.seed.child("data", cfg.d, r))
        res = {}
        for k in cfg.k_grid:
            if grad_methods:
                for key, v in _gradient_cells(cfg, design, data, r, k, grad_methods).items():
                    res[(k,) + key] = v
            if base_methods:
                for key, v in _baseline_cells(cfg, design, data, r, k, base_methods).items():
                    res[(k,) + key] = v
        return res

    pool = _pool(threads)
    try:
        ow = oracle_width(design, cfg.N, cfg.oracle_reps, cfg.alpha, cfg.seed.child("oracle", cfg.d),
                          cfg.norm_functional, cfg.solver, pool)
        cells: dict = {}
        for res in _map(pool, job, range(cfg.reps)):
            for key, v in res.items():
                cell = cells.setdefault(key, _Cell())
                if v is None:
                    cell.failures += 1
                    continue
                hit, width, elapsed, rounds = v
                if hit is not None:
                    cell.covered.append(hit)
                cell.widths.append(width)
                cell.times.append(elapsed)
                cell.rounds.add(rounds)
    finally:
        if pool is not None:
            pool.shutdown()

    rows = []
    for k in cfg.k_grid:
        for tau in list(cfg.tau_grid) + [0]:
            for m in methods:
                cell = cells.get((k, tau, m))
                if cell is None:
                    continue
                if len(cell.rounds) > 1:
                    raise RuntimeError(f"inconsistent round counts {cell.rounds} for {(k, tau, m)}")
                rows.append(ReportRow(
                    d=cfg.d, k=k, n=cfg.N // k, tau=tau, method=m,
                    coverage=float(np.mean(cell.covered)) if cell.covered else None,
                    avg_width=float(np.mean(cell.widths)) if cell.widths else None,
                    oracle_width=ow,
                    wall_time_s=float(np.mean(cell.times)) if cell.times else 0.0,
                    comm_rounds=next(iter(cell.rounds)) if cell.rounds else (tau if tau else 1),
                    failures=cell.failures,
                ))
    return ExperimentReport(rows)


def run_coverage_experiment(cfg: ExperimentConfig, threads: int = 1) -> ExperimentReport:
    """Coverage and average width of the gradient bootstraps for every (k, tau, method)."""
    methods = [m for m in cfg.methods if m in GRADIENT_METHODS] or list(GRADIENT_METHODS)
    return _run(cfg, methods, threads)


def run_comparison(cfg: ExperimentConfig, threads: int = 1) -> ExperimentReport:
    """Widths of k-grad, n+k-1-grad, BLB and SDB against the oracle width.

    Baseline rows carry ``tau = 0``, no coverage, and one communication round
    (each worker sends back its own summary).
    """
    methods = [m for m in cfg.methods if m in GRADIENT_METHODS + BASELINE_METHODS]
    for m in GRADIENT_METHODS + BASELINE_METHODS:
        if m not in methods:
            methods.append(m)
    return _run(cfg, methods, threads)


def run_bench(cfg: ExperimentConfig, runs: int | None = None) -> ExperimentReport:
    """Mean wall time per (method, k) over ``runs`` fresh datasets, CSL with tau = 1.

    Gradient-method timings cover the CSL round and the bootstrap; baseline
    timings cover the whole width computation.  Generating and sharding the
    data is untimed.
    """
    runs = cfg.reps if runs is None else runs
    design = cfg.design()
    norm = cfg.norm_functional
    methods = list(cfg.methods)
    rows = []
    for k in cfg.k_grid:
        for m in methods:
            times, widths, failures = [], [], 0
            for r in range(runs):
                data = sample_dataset(design, cfg.N, cfg.seed.child("bench", cfg.d, r))
                sharded = shard(data, k)
                t0 = time.perf_counter()
                try:
                    if m in GRADIENT_METHODS:
                        cluster = Cluster(sharded, design.model)
                        state = next(iter(csl_iterates(cluster, 1, cfg.solver)))
                        master = master_grads_for(state, cluster) if m == "nk1grad" else None
                        w = dist_boots(m, state.theta, state.grads_at_prev, state.theta_tilde_inv_hessian,
                                       master_grads=master, n=cluster.n, B=cfg.B, alpha=cfg.alpha,
                                       norm=norm, seed=cfg.seed.child("bench-boot", cfg.d, r, k, m)).width
                    elif m == "blb":
                        w = blb_width(sharded, design.model, BlbConfig(cfg.blb_r, cfg.alpha),
                                      cfg.seed.child("blb", cfg.d, r, k), cfg.solver, norm)
                    else:
                        w = sdb_width(sharded, design.model, cfg.alpha,
                                      cfg.seed.child("sdb", cfg.d, r, k), cfg.solver, norm)
                except SolverError:
                    failures += 1
                    continue
                times.append(time.perf_counter() - t0)
                widths.append(w)
            rows.append(ReportRow(
                d=cfg.d, k=k, n=cfg.N // k, tau=1 if m in GRADIENT_METHODS else 0, method=m,
                coverage=None, avg_width=float(np.mean(widths)) if widths else None, oracle_width=None,
                wall_time_s=float(np.mean(times)) if times else 0.0, comm_rounds=1, failures=failures,
            ))
    return ExperimentReport(rows)


def _cell_str(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_report(report: ExperimentReport, fmt: str = "csv", path=None) -> str:
    """Serialise the report; write it to ``path`` if given and return the text."""
    if fmt == "csv":
        lines = [",".join(COLUMNS)]
        lines += [",".join(_cell_str(getattr(r, c)) for c in COLUMNS) for r in report.rows]
        text = "\n".join(lines) + "\n"
    elif fmt == "json":
        text = json.dumps([{c: getattr(r, c) for c in COLUMNS} for r in report.rows], indent=2) + "\n"
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if path is not None:
        Path(path).write_text(text)
    return text


_TYPES = {"d": int, "k": int, "n": int, "tau": int, "method": str, "coverage": float, "avg_width": float,
          "oracle_width": float, "wall_time_s": float, "comm_rounds": int, "failures": int}


def parse_report(text: str, fmt: str = "csv") -> ExperimentReport:
    if fmt == "json":
        return ExperimentReport([ReportRow(**obj) for obj in json.loads(text)])
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")
    reader = csv.DictReader(text.splitlines())
    if tuple(reader.fieldnames or ()) != COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    rows = [ReportRow(**{c: (None if rec[c] == "" else _TYPES[c](rec[c])) for c in COLUMNS}) for rec in reader]
    return ExperimentReport(rows)


def load_report(path, fmt: str | None = None) -> ExperimentReport:
    path = Path(path)
    fmt = fmt or ("json" if path.suffix == ".json" else "csv")
    return parse_report(path.read_text(), fmt)
