"""Sufficient numbers of CSL rounds for bootstrap validity.

Sizes enter through exponents: ``n = d**gamma_n`` and ``k = d**gamma_k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bootstrap import BootMethod

_SNAP = 1e-12


def _floor(x: float) -> int:
    r = round(x)
    return int(r) if abs(x - r) <= _SNAP else math.floor(x)


@dataclass(frozen=True)
class TauPlan:
    family: str
    method: BootMethod
    gamma_n: float
    gamma_k: float
    feasible: bool
    tau_min: int | None = None
    tau0: int | None = None
    nu0: float | None = None

    @property
    def nu0_degenerate(self) -> bool:
        """True when ``nu0`` falls outside ``(0, 1]``, which happens when
        ``(gamma_n - 1)/(gamma_n - 4)`` is an exact power of two."""
        return self.nu0 is not None and not (_SNAP < self.nu0 <= 1 + _SNAP)

    def as_dict(self) -> dict:
        return {
            "family": self.family,
            "method": self.method.value,
            "gamma_n": self.gamma_n,
            "gamma_k": self.gamma_k,
            "feasible": self.feasible,
            "tau_min": self.tau_min,
            "tau0": self.tau0,
            "nu0": self.nu0,
            "nu0_degenerate": self.nu0_degenerate,
        }


def glm_offsets(gamma_n: float) -> tuple[int, float]:
    """``(tau0, nu0)`` for GLMs; requires ``gamma_n > 4``."""
    ratio = (gamma_n - 1) / (gamma_n - 4)
    tau0 = 1 + _floor(math.log2(ratio))
    nu0 = 2 - 2**tau0 * (gamma_n - 4) / (gamma_n - 1)
    if abs(nu0) <= _SNAP:
        nu0 = 0.0
    return tau0, nu0


def tau_min(family: str, method: BootMethod | str, gamma_n: float, gamma_k: float) -> TauPlan:
    family = family.lower()
    if family == "logistic":
        family = "glm"
    if family not in ("linear", "glm"):
        raise ValueError(f"unknown model family {family!r}")
    method = BootMethod(method)
    gn, gk = float(gamma_n), float(gamma_k)
    if gn < 0 or gk < 0:
        raise ValueError("exponents must be non-negative")
    plan = dict(family=family, method=method, gamma_n=gn, gamma_k=gk)

    if family == "linear":
        if method is BootMethod.KGRAD:
            if not (gn > 1 and gk > 3):
                return TauPlan(feasible=False, **plan)
            tau = 1 + _floor(max((gk + 1) / (gn - 1), 1 + 3 / (gn - 1)))
        else:
            if not (gn > 1 and max(gn, gk) > 3 and gn + gk > 4):
                return TauPlan(feasible=False, **plan)
            tau = 1 + _floor((max(gk - 1, min(gn, gk), 1) + 2) / (gn - 1))
        return TauPlan(feasible=True, tau_min=tau, **plan)

    if method is BootMethod.KGRAD:
        if not (gn > 4 and gk > 3):
            return TauPlan(feasible=False, **plan)
        tau0, nu0 = glm_offsets(gn)
        tau = tau0 + max(_floor((gk - 2) / (gn - 1) + nu0), 1)
    else:
        if not (gn > 4 and gn + gk > 5):
            return TauPlan(feasible=False, **plan)
        tau0, nu0 = glm_offsets(gn)
        tau = tau0 + _floor((max(gk - 1, min(gn, gk)) - 1) / (gn - 1) + nu0)
    return TauPlan(feasible=True, tau_min=tau, tau0=tau0, nu0=nu0, **plan)


def exponents_from_sizes(n: int, k: int, d: int) -> tuple[float, float]:
    if d < 2:
        raise ValueError("d must be at least 2 to define exponents")
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    ld = math.log(d)
    return math.log(n) / ld, math.log(k) / ld
