"""Annealed density engine: m^(k)(x) = tau(x)^k / Z(k) on a compact region.

tau is a positive, decreasing transform of f (exponential e^{-f} or the
rational 1/(f - L + p)), so m^(k) concentrates on the global minimizers as k
grows.  Everything is evaluated in log space: Z(k) is a max-shifted log-sum
over the quadrature nodes, and expectations are softmax-weighted node
averages.  Node sets, f values and log Z are cached and shared between
``with_k`` clones so k-continuation runs pay the function evaluations once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import logsumexp, softmax

from .integrate import IntegratorConfig, default_config
from .objective import Objective, evaluate_batch, gradient
from .region import CompactRegion, EmptyRegionError, _as_points


class InvalidShiftError(ValueError):
    """Rational tau hit f(x) - L + p <= 0."""


class DomainError(ValueError):
    """h^nu undefined: h <= 0 somewhere with non-integer nu."""


@dataclass(frozen=True)
class Exponential:
    """tau(x) = exp(-f(x))."""


@dataclass(frozen=True)
class Rational:
    """tau(x) = 1 / (f(x) - L + p); L=None resolves a safe shift from node data.

    The automatic shift is (best f seen on the nodes) - max(p, 0.1 * range),
    which keeps f - L + p strictly positive everywhere on the node set.
    """

    p: float = 1.0
    L: Optional[float] = None

    def __post_init__(self):
        if self.p <= 0:
            raise ValueError("rational tau needs p > 0")


TauKind = Exponential | Rational


@dataclass(frozen=True)
class Expectation:
    """A softmax-weighted node average with an absolute error estimate."""

    value: float
    error: float
    k: float
    kind: str


class NascentMD:
    """The density m^(k) bound to (objective, region, tau kind, integrator).

    Immutable except for internal caches; cache fills are idempotent so
    concurrent first use is safe.
    """

    def __init__(self, objective: Objective, region: CompactRegion,
                 tau: TauKind | None = None, k: float = 1.0,
                 integrator: IntegratorConfig | None = None,
                 _shared: dict | None = None):
        if objective.dim != region.dim:
            raise ValueError("objective and region dimensions differ")
        self.objective = objective
        self.region = region
        self.tau = tau if tau is not None else Exponential()
        self.k = float(k)
        self.integrator = integrator or default_config(region.dim)
        # shared across with_k clones: node sets, f values, shift, measure, logZ
        self._shared = _shared if _shared is not None else {"logZ": {}}

    def with_k(self, k: float) -> "NascentMD":
        """Same density family at a different k, sharing all node caches."""
        return NascentMD(self.objective, self.region, self.tau, k,
                         self.integrator, _shared=self._shared)

    # --- node caches ---------------------------------------------------------

    def _levels(self) -> list[dict]:
        levels = self._shared.get("levels")
        if levels is not None:
            return levels
        cfg = self.integrator
        levels = []
        if cfg.kind == "grid":
            for res in cfg.resolutions(self.region.dim):
                mesh = self.region.build_grid(res)
                if mesh.nodes.shape[0] == 0:
                    raise EmptyRegionError("no member nodes at grid resolution")
                levels.append({
                    "nodes": mesh.nodes,
                    "f": evaluate_batch(self.objective, mesh.nodes),
                    "log_node_weight": float(np.log(mesh.cell_volume)),
                })
        else:
            pts = self.region.sample_uniform(cfg.n, cfg.seed)
            f = evaluate_batch(self.objective, pts)
            for m in (cfg.n // 2, cfg.n):
                levels.append({
                    "nodes": pts[:m],
                    "f": f[:m],
                    "log_node_weight": float(np.log(self.region.measure(mc_n=max(cfg.n, 1000),
                                                                        seed=cfg.seed).value
                                                    if self.region.constraints
                                                    else self.region.box_volume) - np.log(m)),
                })
        self._shared["levels"] = levels
        return levels

    def _shift(self) -> float:
        """Resolved lower shift L for rational tau."""
        if not isinstance(self.tau, Rational):
            return 0.0
        if self.tau.L is not None:
            return self.tau.L
        L = self._shared.get("shift")
        if L is None:
            f = self._levels()[-1]["f"]
            fmin, fmax = float(np.min(f)), float(np.max(f))
            L = fmin - max(self.tau.p, 0.1 * (fmax - fmin))
            self._shared["shift"] = L
        return L

    def _log_tau_values(self, f: np.ndarray) -> np.ndarray:
        if isinstance(self.tau, Exponential):
            return -f
        arg = f - self._shift() + self.tau.p
        if np.any(arg <= 0.0):
            raise InvalidShiftError(
                "rational tau requires f(x) - L + p > 0 on all evaluated points"
            )
        return -np.log(arg)

    def _level_log_tau(self, i: int) -> np.ndarray:
        level = self._levels()[i]
        key = f"logtau_{type(self.tau).__name__}"
        if key not in level:
            level[key] = self._log_tau_values(level["f"])
        return level[key]

    def _weights(self, i: int) -> np.ndarray:
        """Normalized density weights at level i (they sum to 1)."""
        return softmax(self.k * self._level_log_tau(i))

    def log_Z(self) -> float:
        """log of the normalizer at the finest level, cached per k."""
        key = (self.k, type(self.tau).__name__)
        cache = self._shared["logZ"]
        if key not in cache:
            levels = self._levels()
            lt = self._level_log_tau(len(levels) - 1)
            cache[key] = float(logsumexp(self.k * lt) + levels[-1]["log_node_weight"])
        return cache[key]

    def region_measure(self) -> float:
        mu = self._shared.get("mu")
        if mu is None:
            if self.region.constraints:
                res = self.integrator.resolutions(self.region.dim)[-1] \
                    if self.integrator.kind == "grid" else 256
                mu = self.region.measure(res).value
            else:
                mu = self.region.box_volume
            self._shared["mu"] = mu
        return mu

    # --- pointwise evaluation ------------------------------------------------

    def log_tau(self, x):
        """log tau at a point or (N, dim) batch."""
        pts, single = _as_points(x, self.region.dim)
        vals = self._log_tau_values(evaluate_batch(self.objective, pts))
        return float(vals[0]) if single else vals

    def log_density(self, x):
        pts, single = _as_points(x, self.region.dim)
        vals = self.k * self._log_tau_values(evaluate_batch(self.objective, pts)) - self.log_Z()
        return float(vals[0]) if single else vals

    def density(self, x):
        return np.exp(self.log_density(x))

    def grad_density(self, x) -> np.ndarray:
        """Gradient of m^(k): k m^(k) grad(tau)/tau."""
        pts, _ = _as_points(x, self.region.dim)
        x0 = pts[0]
        g = gradient(self.objective, x0)
        dens = self.density(x0)
        if isinstance(self.tau, Exponential):
            return -self.k * dens * g
        denom = self.objective(x0) - self._shift() + self.tau.p
        if denom <= 0.0:
            raise InvalidShiftError("rational tau undefined at point")
        return -self.k * dens * g / denom

    def ddk_density(self, x) -> float:
        """d/dk of m^(k): m^(k)(x) (log tau(x) - E(log tau))."""
        pts, _ = _as_points(x, self.region.dim)
        x0 = pts[0]
        return self.density(x0) * (self.log_tau(x0) - self.expect_log_tau().value)

    # --- expectations --------------------------------------------------------

    def _expect_values(self, per_level: Callable[[dict, int], np.ndarray],
                       kind: str) -> Expectation:
        levels = self._levels()
        vals = []
        for i, level in enumerate(levels):
            vals.append(float(np.dot(self._weights(i), per_level(level, i))))
        if self.integrator.kind == "grid" and len(vals) > 1:
            err = abs(vals[-1] - vals[-2])
        elif self.integrator.kind == "mc":
            w = self._weights(len(levels) - 1)
            h = per_level(levels[-1], len(levels) - 1)
            err = 3.0 * float(np.sqrt(np.sum(w ** 2 * (h - vals[-1]) ** 2)))
        else:
            err = abs(vals[-1]) * 1e-12
        return Expectation(vals[-1], err, self.k, kind)

    def expectation(self, h: Callable[[np.ndarray], np.ndarray] | None = None,
                    nu: float = 1.0, shift=None) -> Expectation:
        """E^(k) of h^nu, optionally with the integration variable shifted.

        ``h=None`` means the objective itself (its node values are cached).
        """
        if h is None and shift is None:
            def values(level, i):
                f = level["f"]
                if nu == 1.0:
                    return f
                return self._power(f, nu)
            return self._expect_values(values, kind=f"f^{nu:g}")
        off = np.zeros(self.region.dim) if shift is None else np.asarray(shift, float)
        fn = h if h is not None else (lambda p: evaluate_batch(self.objective, p))

        def values(level, i):
            return self._power(np.asarray(fn(level["nodes"] + off), float), nu)
        return self._expect_values(values, kind=f"h^{nu:g}")

    @staticmethod
    def _power(vals: np.ndarray, nu: float) -> np.ndarray:
        if nu == 1.0:
            return vals
        if not float(nu).is_integer() and np.any(vals <= 0.0):
            raise DomainError("h <= 0 somewhere with non-integer exponent")
        return vals ** nu

    def expect_f(self) -> Expectation:
        return self.expectation()

    def expect_log_tau(self) -> Expectation:
        return self._expect_values(lambda level, i: self._level_log_tau(i),
                                   kind="log_tau")

    def log_expect_tau(self) -> tuple[float, float]:
        """(log E^(k)(tau), absolute error of E^(k)(tau)); fully log-stable."""
        levels = self._levels()
        logs = []
        for i in range(len(levels)):
            lt = self._level_log_tau(i)
            logs.append(float(logsumexp((self.k + 1.0) * lt) - logsumexp(self.k * lt)))
        err = abs(np.exp(logs[-1]) - np.exp(logs[-2])) if len(logs) > 1 else 0.0
        return logs[-1], err

    def variance_f(self) -> Expectation:
        """Var^(k)(f) = E(f^2) - E(f)^2, clamped at zero."""
        ef = self.expect_f()
        ef2 = self.expectation(nu=2.0)
        value = max(ef2.value - ef.value ** 2, 0.0)
        err = ef2.error + 2.0 * abs(ef.value) * ef.error
        return Expectation(value, err, self.k, "var_f")

    def mean_location(self, with_error: bool = False):
        """Component-wise E^(k)(x); optionally also the error norm."""
        levels = self._levels()
        means = []
        for i, level in enumerate(levels):
            means.append(self._weights(i) @ level["nodes"])
        if not with_error:
            return means[-1]
        err = float(np.linalg.norm(means[-1] - means[-2])) if len(means) > 1 else 0.0
        return means[-1], err
