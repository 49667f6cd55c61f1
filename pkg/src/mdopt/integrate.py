"""Quadrature and Monte Carlo over a region, with a log-domain variant.

Grid integration is a midpoint rule on the member nodes of a cell-centered
mesh; the reported error is the difference between the two finest refinement
levels.  Monte Carlo is plain box sampling with indicator filtering and a
3-sigma standard-error bound.  ``log_integrate_exp`` is the max-shifted
log-sum used by every density normalization, so that exponentially peaked
integrands never overflow.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp

from .region import CompactRegion, EmptyRegionError


class DegenerateIntegrandError(ValueError):
    """All log-integrand values are -inf; nothing to normalize."""


class IntegrandError(ValueError):
    """Integrand produced a non-finite value on a member point."""


@dataclass(frozen=True)
class IntegratorConfig:
    """Backend selection: kind "grid" (resolution per axis) or "mc" (n, seed)."""

    kind: str = "grid"
    resolution: tuple[int, ...] | int = 1024
    n: int = 100_000
    seed: int = 0
    refinement_levels: int = 2

    def __post_init__(self):
        if self.kind not in ("grid", "mc"):
            raise ValueError(f"unknown integrator kind {self.kind!r}")
        if self.kind == "mc" and self.n < 100:
            raise ValueError("Monte Carlo needs n >= 100")
        if self.refinement_levels < 1:
            raise ValueError("refinement_levels must be >= 1")

    def resolutions(self, dim: int) -> list[np.ndarray]:
        """Resolution ladder, coarsest first, finest last."""
        res = np.atleast_1d(np.asarray(self.resolution, dtype=int))
        if res.shape[0] == 1:
            res = np.full(dim, res[0])
        if np.any(res < 2):
            raise ValueError("grid resolution must be at least 2 per axis")
        ladder = [res]
        for _ in range(self.refinement_levels - 1):
            ladder.append(np.maximum(ladder[-1] // 2, 2))
        return ladder[::-1]


def default_config(dim: int, seed: int = 0) -> IntegratorConfig:
    """Grid for low dimension (exactness matters), Monte Carlo above 3-d."""
    if dim == 1:
        return IntegratorConfig(kind="grid", resolution=1024)
    if dim == 2:
        return IntegratorConfig(kind="grid", resolution=256)
    if dim == 3:
        return IntegratorConfig(kind="grid", resolution=64)
    return IntegratorConfig(kind="mc", n=200_000, seed=seed)


@dataclass(frozen=True)
class Estimate:
    value: float
    error: float


def integrate(region: CompactRegion, integrand: Callable[[np.ndarray], np.ndarray],
              cfg: IntegratorConfig | None = None) -> Estimate:
    """Integral of a vectorized integrand over the region."""
    cfg = cfg or default_config(region.dim)
    if cfg.kind == "grid":
        values = []
        for res in cfg.resolutions(region.dim):
            mesh = region.build_grid(res)
            if mesh.nodes.shape[0] == 0:
                raise EmptyRegionError("no member nodes at grid resolution")
            vals = np.asarray(integrand(mesh.nodes), dtype=float)
            if not np.all(np.isfinite(vals)):
                raise IntegrandError("non-finite integrand value on a member point")
            values.append(mesh.cell_volume * float(np.sum(vals)))
        err = abs(values[-1] - values[-2]) if len(values) > 1 else abs(values[-1]) * 1e-12
        return Estimate(values[-1], err)
    rng = np.random.Generator(np.random.Philox(cfg.seed))
    pts = region.lower + rng.random((cfg.n, region.dim)) * (region.upper - region.lower)
    inside = np.asarray(region.contains(pts)) if region.constraints else np.ones(cfg.n, bool)
    contrib = np.zeros(cfg.n)
    if np.any(inside):
        vals = np.asarray(integrand(pts[inside]), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise IntegrandError("non-finite integrand value on a member point")
        contrib[inside] = vals
    vol = region.box_volume
    mean = float(np.mean(contrib))
    sem = float(np.std(contrib, ddof=1) / np.sqrt(cfg.n))
    return Estimate(vol * mean, 3.0 * vol * sem)


def log_integrate_exp(region: CompactRegion,
                      log_integrand: Callable[[np.ndarray], np.ndarray],
                      cfg: IntegratorConfig | None = None) -> float:
    """log of the integral of exp(log_integrand), max-shifted for stability."""
    cfg = cfg or default_config(region.dim)
    if cfg.kind == "grid":
        res = cfg.resolutions(region.dim)[-1]
        mesh = region.build_grid(res)
        if mesh.nodes.shape[0] == 0:
            raise EmptyRegionError("no member nodes at grid resolution")
        ell = np.asarray(log_integrand(mesh.nodes), dtype=float)
        return log_weighted_sum_exp(ell, np.log(mesh.cell_volume))
    rng = np.random.Generator(np.random.Philox(cfg.seed))
    pts = region.lower + rng.random((cfg.n, region.dim)) * (region.upper - region.lower)
    inside = np.asarray(region.contains(pts)) if region.constraints else np.ones(cfg.n, bool)
    if not np.any(inside):
        raise DegenerateIntegrandError("no member points in Monte Carlo sample")
    ell = np.asarray(log_integrand(pts[inside]), dtype=float)
    return log_weighted_sum_exp(ell, np.log(region.box_volume) - np.log(cfg.n))


def log_weighted_sum_exp(ell: np.ndarray, log_weight: float) -> float:
    """log(sum w * exp(ell)) with a shared scalar log-weight."""
    if np.all(np.isneginf(ell)):
        raise DegenerateIntegrandError("all log-integrand values are -inf")
    return float(logsumexp(ell) + log_weight)
