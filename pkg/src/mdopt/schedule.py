"""k-continuation driver: geometric k ladder, monotone E^(k)(f) trace.

The default growth factor is e, which makes the per-stage boundary shrinkage
roughly k-independent (the shrink rate scales as 1/k, and the integral of
1/s over [k, e*k] is 1).  Stops on small variance, since dE/dk = -Var for the
exponential transform, or on a quadrature-floor stall.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .integrate import IntegratorConfig
from .nmd import Exponential, NascentMD, TauKind
from .objective import Objective
from .region import CompactRegion


@dataclass(frozen=True)
class ContinuationConfig:
    k0: float = 1.0
    growth: float = float(np.e)
    max_stages: int = 16
    var_tol: float = 1e-8
    integrator: Optional[IntegratorConfig] = None
    tau: TauKind = field(default_factory=Exponential)

    def __post_init__(self):
        if self.k0 <= 0:
            raise ValueError("k0 must be positive")
        if self.growth <= 1.0:
            raise ValueError("growth must exceed 1")
        if self.max_stages < 1:
            raise ValueError("max_stages must be at least 1")


@dataclass(frozen=True)
class TraceRecord:
    k: float
    Ef: float
    Ef_error: float
    Varf: float
    mean_x: np.ndarray
    D0_measure: Optional[float] = None
    Df_measure: Optional[float] = None


@dataclass(frozen=True)
class MinimizeResult:
    fstar_estimate: float
    xstar_estimate: np.ndarray
    trace: list[TraceRecord]
    stop_reason: str  # var_tol | max_stages | stalled


def run_continuation(obj: Objective, region: CompactRegion,
                     cfg: ContinuationConfig | None = None) -> MinimizeResult:
    """Anneal k geometrically and record E^(k)(f), Var^(k)(f), mean location."""
    cfg = cfg or ContinuationConfig()
    md = NascentMD(obj, region, tau=cfg.tau, k=cfg.k0, integrator=cfg.integrator)
    trace: list[TraceRecord] = []
    stop_reason = "max_stages"
    stall = 0
    for j in range(cfg.max_stages):
        m = md.with_k(cfg.k0 * cfg.growth ** j)
        ef = m.expect_f()
        var = m.variance_f()
        trace.append(TraceRecord(
            k=m.k, Ef=ef.value, Ef_error=ef.error, Varf=var.value,
            mean_x=m.mean_location(),
        ))
        if var.value < cfg.var_tol:
            stop_reason = "var_tol"
            break
        if len(trace) > 1 and trace[-2].Ef - trace[-1].Ef < ef.error:
            stall += 1
            if stall >= 3:
                stop_reason = "stalled"
                break
        else:
            stall = 0
    last = trace[-1]
    return MinimizeResult(
        fstar_estimate=last.Ef,
        xstar_estimate=last.mean_x,
        trace=trace,
        stop_reason=stop_reason,
    )


TRACE_COLUMNS = ("stage", "k", "Ef", "Ef_error", "Varf", "mean_x")


def trace_to_rows(result: MinimizeResult) -> tuple[list[str], list[list]]:
    """CSV-ready (header, rows); mean_x expands to one column per coordinate."""
    dim = result.xstar_estimate.shape[0]
    header = ["stage", "k", "Ef", "Ef_error", "Varf"]
    header += [f"mean_x{j}" for j in range(dim)]
    rows = []
    for j, rec in enumerate(result.trace):
        rows.append([j, rec.k, rec.Ef, rec.Ef_error, rec.Varf, *rec.mean_x.tolist()])
    return header, rows
