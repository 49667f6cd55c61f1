"""Compact feasible regions: membership, measure, grid meshes, uniform sampling.

A region is an axis-aligned box optionally intersected with inequality
constraints ``g_i(x) >= 0``.  Constraint callables must be vectorized:
they take an ``(N, dim)`` array and return an ``(N,)`` array.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


class RegionError(ValueError):
    """Invalid region specification or use."""


class DimensionMismatchError(RegionError):
    """Point dimension does not match the region dimension."""


class EmptyRegionError(RegionError):
    """No member point could be found in the region."""


class InfeasibleRegionError(RegionError):
    """Rejection sampling acceptance rate is effectively zero."""


def _as_points(x, dim: int) -> tuple[np.ndarray, bool]:
    """Coerce a point or batch of points to an (N, dim) array.

    Returns the array and a flag telling whether the input was a single point.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        if arr.shape[0] != dim:
            raise DimensionMismatchError(
                f"point has dimension {arr.shape[0]}, region has dimension {dim}"
            )
        return arr[None, :], True
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise DimensionMismatchError(
            f"expected points of dimension {dim}, got array of shape {arr.shape}"
        )
    return arr, False


@dataclass(frozen=True)
class MeasureEstimate:
    """Lebesgue measure estimate with an absolute error bound."""

    value: float
    error: float


@dataclass(frozen=True)
class GridMesh:
    """Cell-centered tensor grid restricted to region members.

    ``nodes`` holds member points in row-major order over the full lattice,
    so masks from two meshes of identical resolution line up index-by-index.
    ``lattice_mask`` is the membership mask over the full lattice (shape
    ``resolution``), needed for neighbor queries.
    """

    region: "CompactRegion"
    resolution: tuple[int, ...]
    axes: tuple[np.ndarray, ...]
    lattice_mask: np.ndarray
    nodes: np.ndarray
    cell_volume: float

    def same_layout(self, other: "GridMesh") -> bool:
        return (
            self.resolution == other.resolution
            and self.region.dim == other.region.dim
            and np.array_equal(self.region.lower, other.region.lower)
            and np.array_equal(self.region.upper, other.region.upper)
        )


@dataclass(frozen=True)
class CompactRegion:
    """Axis-aligned box intersected with constraints ``g_i(x) >= 0``.

    Immutable after construction; safe to share across threads.
    """

    lower: np.ndarray
    upper: np.ndarray
    constraints: tuple[Callable[[np.ndarray], np.ndarray], ...] = ()

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.shape != upper.shape or lower.ndim != 1:
            raise RegionError("lower and upper must be 1-d arrays of equal length")
        if not np.all(lower < upper):
            raise RegionError("need lower[j] < upper[j] for every coordinate")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if self.constraints and not self._probe_nonempty():
            raise EmptyRegionError("no member point found; region appears empty")

    def _probe_nonempty(self) -> bool:
        res = 16 if self.dim <= 3 else 4
        axes = [
            self.lower[j] + (np.arange(res) + 0.5) * (self.upper[j] - self.lower[j]) / res
            for j in range(self.dim)
        ]
        pts = np.array(list(itertools.product(*axes)))
        return bool(np.any(self.contains(pts)))

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @property
    def box_volume(self) -> float:
        return float(np.prod(self.upper - self.lower))

    def contains(self, x) -> bool | np.ndarray:
        """Membership test; accepts a single point or an (N, dim) batch."""
        pts, single = _as_points(x, self.dim)
        ok = np.all((pts >= self.lower) & (pts <= self.upper), axis=1)
        for g in self.constraints:
            ok &= np.asarray(g(pts)) >= 0.0
        return bool(ok[0]) if single else ok

    def measure(self, resolution: int | Sequence[int] = 256, *,
                mc_n: int | None = None, seed: int = 0) -> MeasureEstimate:
        """Lebesgue measure of the region.

        Exact (error 0) for plain boxes.  With constraints, a member-fraction
        estimate on a cell-centered grid (error from one refinement step) or,
        when ``mc_n`` is given, Monte Carlo with a 3-sigma binomial error.
        """
        if not self.constraints:
            return MeasureEstimate(self.box_volume, 0.0)
        if mc_n is not None:
            if mc_n < 100:
                raise RegionError("Monte Carlo measure needs at least 100 samples")
            rng = np.random.Generator(np.random.Philox(seed))
            pts = self.lower + rng.random((mc_n, self.dim)) * (self.upper - self.lower)
            p = float(np.mean(self.contains(pts)))
            if p == 0.0:
                raise EmptyRegionError("no member points in Monte Carlo measure sample")
            err = 3.0 * self.box_volume * np.sqrt(p * (1.0 - p) / mc_n)
            return MeasureEstimate(self.box_volume * p, float(err))
        res = np.atleast_1d(np.asarray(resolution, dtype=int))
        if res.shape[0] == 1:
            res = np.full(self.dim, res[0])
        values = []
        for r in (np.maximum(res // 2, 2), res):
            mesh = self.build_grid(r)
            values.append(mesh.cell_volume * mesh.nodes.shape[0])
        if values[-1] == 0.0:
            raise EmptyRegionError("no member grid points; region appears empty")
        return MeasureEstimate(values[-1], abs(values[-1] - values[-2]))

    def build_grid(self, resolution: int | Sequence[int]) -> GridMesh:
        """Deterministic cell-centered mesh filtered by membership."""
        res = np.atleast_1d(np.asarray(resolution, dtype=int))
        if res.shape[0] == 1:
            res = np.full(self.dim, res[0])
        if res.shape[0] != self.dim:
            raise RegionError(f"resolution must have length {self.dim}")
        if np.any(res < 2):
            raise RegionError("grid resolution must be at least 2 per axis")
        widths = (self.upper - self.lower) / res
        axes = tuple(
            self.lower[j] + (np.arange(res[j]) + 0.5) * widths[j]
            for j in range(self.dim)
        )
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        if self.constraints:
            mask = self.contains(pts)
        else:
            mask = np.ones(pts.shape[0], dtype=bool)
        return GridMesh(
            region=self,
            resolution=tuple(int(r) for r in res),
            axes=axes,
            lattice_mask=mask.reshape(tuple(res)),
            nodes=pts[mask],
            cell_volume=float(np.prod(widths)),
        )

    def sample_uniform(self, n: int, seed: int = 0) -> np.ndarray:
        """n i.i.d.-uniform member points by rejection from the box.

        Deterministic for a fixed seed: the proposal stream is a pure function
        of (seed, draw index) via counter-based Philox bits.
        """
        if n < 1:
            raise RegionError("need n >= 1")
        rng = np.random.Generator(np.random.Philox(seed))
        if not self.constraints:
            return self.lower + rng.random((n, self.dim)) * (self.upper - self.lower)
        out = []
        got = 0
        tried = 0
        batch = max(1024, 2 * n)
        while got < n:
            pts = self.lower + rng.random((batch, self.dim)) * (self.upper - self.lower)
            keep = pts[self.contains(pts)]
            tried += batch
            got += keep.shape[0]
            out.append(keep)
            if tried >= 10**6 and got / tried < 1e-6:
                raise InfeasibleRegionError(
                    f"acceptance rate {got / tried:.2e} below 1e-6; region too thin to sample"
                )
        return np.concatenate(out, axis=0)[:n]


def box(lower, upper, constraints=()) -> CompactRegion:
    """Convenience constructor accepting scalars for 1-d regions."""
    return CompactRegion(np.atleast_1d(lower), np.atleast_1d(upper), tuple(constraints))
