"""Target functions on compact regions, plus a registry of stock problems.

Objectives are vectorized: ``fn`` maps an ``(N, dim)`` array to an ``(N,)``
array.  Gradients are analytic when registered, central finite differences
otherwise.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .region import CompactRegion, _as_points, box


class EvaluationError(ValueError):
    """Objective produced a non-finite value at a member point."""

    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point


class UnknownFunctionError(KeyError):
    """Requested name is not in the catalog."""


class StencilError(ValueError):
    """Finite-difference stencil would leave the region."""


_FD_STEP = float(np.finfo(float).eps) ** (1.0 / 3.0)


@dataclass(frozen=True)
class Objective:
    """Scalar field on a region, with optional gradient and test oracle data."""

    name: str
    dim: int
    fn: Callable[[np.ndarray], np.ndarray]
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    oracle_fstar: Optional[float] = None
    oracle_minimizers: Optional[tuple] = None

    def __call__(self, x) -> float | np.ndarray:
        pts, single = _as_points(x, self.dim)
        vals = np.asarray(self.fn(pts), dtype=float)
        return float(vals[0]) if single else vals


def evaluate_batch(obj: Objective, xs) -> np.ndarray:
    """Element-wise f over a batch, order preserved; rejects non-finite values."""
    pts, _ = _as_points(xs, obj.dim)
    vals = np.asarray(obj.fn(pts), dtype=float)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise EvaluationError(
            f"{obj.name} returned non-finite value at {pts[i]}", point=pts[i]
        )
    return vals


def gradient(obj: Objective, x, h: float | None = None,
             region: CompactRegion | None = None) -> np.ndarray:
    """Gradient at a point: analytic if available, else central differences.

    ``h`` scales per axis as h*max(1, |x_j|).  When a region is given, the
    stencil must stay inside its box.
    """
    pts, _ = _as_points(x, obj.dim)
    if obj.grad is not None:
        return np.asarray(obj.grad(pts), dtype=float)[0]
    x0 = pts[0]
    step = (_FD_STEP if h is None else h) * np.maximum(1.0, np.abs(x0))
    if region is not None:
        if np.any(x0 - step < region.lower) or np.any(x0 + step > region.upper):
            raise StencilError(f"point {x0} is within one step of the box boundary")
    g = np.empty(obj.dim)
    for j in range(obj.dim):
        e = np.zeros(obj.dim)
        e[j] = step[j]
        g[j] = (obj((x0 + e)) - obj((x0 - e))) / (2.0 * step[j])
    return g


# --- catalog -----------------------------------------------------------------

_CATALOG: dict[str, Callable[[], tuple[Objective, CompactRegion]]] = {}


def register(name: str):
    def deco(factory):
        _CATALOG[name] = factory
        return factory
    return deco


def catalog_get(name: str) -> tuple[Objective, CompactRegion]:
    """Look up a registered problem by name; ``constC`` is parsed numerically."""
    if name in _CATALOG:
        return _CATALOG[name]()
    m = re.fullmatch(r"const(-?\d+(?:\.\d+)?)", name)
    if m:
        c = float(m.group(1))
        obj = Objective(
            name=name, dim=1,
            fn=lambda p, c=c: np.full(p.shape[0], c),
            grad=lambda p: np.zeros_like(p),
            oracle_fstar=c,
        )
        return obj, box(0.0, 1.0)
    raise UnknownFunctionError(name)


def catalog_names() -> list[str]:
    return sorted(_CATALOG) + ["const<c>"]


@register("paper1d")
def _paper1d():
    obj = Objective(
        name="paper1d", dim=1,
        fn=lambda p: np.cos(p[:, 0] ** 2) + p[:, 0] / 5.0 + 1.0,
        grad=lambda p: (-2.0 * p[:, 0] * np.sin(p[:, 0] ** 2) + 0.2)[:, None],
    )
    return obj, box(0.0, 5.0)


@register("paper2d")
def _paper2d():
    def fn(p):
        return (np.cos(p[:, 0] ** 2) + np.cos(p[:, 1] ** 2)
                + p[:, 0] / 5.0 + p[:, 1] / 5.0 + 2.0)

    def grad(p):
        return -2.0 * p * np.sin(p ** 2) + 0.2

    obj = Objective(name="paper2d", dim=2, fn=fn, grad=grad)
    return obj, box([0.0, 0.0], [3.5, 3.5])


@register("stability1d")
def _stability1d():
    # two global minima at x = sqrt(2*pi) and sqrt(6*pi), curvatures x*^2
    obj = Objective(
        name="stability1d", dim=1,
        fn=lambda p: np.cos(0.5 * p[:, 0] ** 2) + 1.0,
        grad=lambda p: (-p[:, 0] * np.sin(0.5 * p[:, 0] ** 2))[:, None],
        oracle_fstar=0.0,
        oracle_minimizers=(np.sqrt(2.0 * np.pi), np.sqrt(6.0 * np.pi)),
    )
    return obj, box(0.0, 5.0)


@register("stability2d")
def _stability2d():
    def fn(p):
        return np.cos(p[:, 0] ** 2) + np.cos(p[:, 1] ** 2) + 2.0

    def grad(p):
        return -2.0 * p * np.sin(p ** 2)

    obj = Objective(name="stability2d", dim=2, fn=fn, grad=grad)
    return obj, box([0.0, 0.0], [3.5, 3.5])


@register("quadratic")
def _quadratic():
    obj = Objective(
        name="quadratic", dim=2,
        fn=lambda p: np.sum(p ** 2, axis=1),
        grad=lambda p: 2.0 * p,
        oracle_fstar=0.0,
        oracle_minimizers=((0.0, 0.0),),
    )
    return obj, box([-0.5, -0.5], [1.0, 1.0])


@register("doublewell")
def _doublewell():
    obj = Objective(
        name="doublewell", dim=1,
        fn=lambda p: (p[:, 0] ** 2 - 1.0) ** 2,
        grad=lambda p: (4.0 * p[:, 0] * (p[:, 0] ** 2 - 1.0))[:, None],
        oracle_fstar=0.0,
        oracle_minimizers=(-1.0, 1.0),
    )
    return obj, box(-2.0, 2.0)


@register("rastrigin")
def _rastrigin():
    def fn(p):
        return 10.0 * p.shape[1] + np.sum(p ** 2 - 10.0 * np.cos(2.0 * np.pi * p), axis=1)

    def grad(p):
        return 2.0 * p + 20.0 * np.pi * np.sin(2.0 * np.pi * p)

    obj = Objective(name="rastrigin", dim=2, fn=fn, grad=grad,
                    oracle_fstar=0.0, oracle_minimizers=((0.0, 0.0),))
    return obj, box([-5.12, -5.12], [5.12, 5.12])


@register("ackley")
def _ackley():
    a, b, c = 20.0, 0.2, 2.0 * np.pi

    def fn(p):
        n = p.shape[1]
        s1 = np.sqrt(np.sum(p ** 2, axis=1) / n)
        s2 = np.mean(np.cos(c * p), axis=1)
        return -a * np.exp(-b * s1) - np.exp(s2) + a + np.e

    obj = Objective(name="ackley", dim=2, fn=fn,
                    oracle_fstar=0.0, oracle_minimizers=((0.0, 0.0),))
    return obj, box([-5.0, -5.0], [5.0, 5.0])
