import numpy as np
import pytest
from scipy.special import erf

from mdopt.integrate import (DegenerateIntegrandError, Estimate, IntegratorConfig,
                             default_config, integrate, log_integrate_exp)
from mdopt.region import box

import oracles


UNIT = box(0.0, 1.0)
FIVE = box(0.0, 5.0)


def test_constant_integral():
    est = integrate(UNIT, lambda p: np.ones(p.shape[0]))
    assert est.value == pytest.approx(1.0, abs=1e-12)


def test_linear_integral():
    cfg = IntegratorConfig(kind="grid", resolution=1024)
    est = integrate(FIVE, lambda p: p[:, 0], cfg)
    assert abs(est.value - 12.5) <= max(est.error, 1e-10)


def test_paper1d_integral_vs_dense_oracle():
    cfg = IntegratorConfig(kind="grid", resolution=4096)
    est = integrate(FIVE, lambda p: np.cos(p[:, 0] ** 2) + p[:, 0] / 5.0 + 1.0, cfg)
    assert abs(est.value - oracles.PAPER1D_INT_F) <= max(est.error, 1e-6)


def test_linearity():
    cfg = IntegratorConfig(kind="grid", resolution=512)
    g = lambda p: np.sin(p[:, 0])
    h = lambda p: p[:, 0] ** 2
    combined = integrate(FIVE, lambda p: 2.0 * g(p) + 3.0 * h(p), cfg)
    parts = 2.0 * integrate(FIVE, g, cfg).value + 3.0 * integrate(FIVE, h, cfg).value
    assert combined.value == pytest.approx(parts, abs=1e-9)


def test_grid_vs_mc_agreement():
    f = lambda p: np.cos(p[:, 0] ** 2) + p[:, 0] / 5.0 + 1.0
    grid = integrate(FIVE, f, IntegratorConfig(kind="grid", resolution=2048))
    mc = integrate(FIVE, f, IntegratorConfig(kind="mc", n=200_000, seed=5))
    assert abs(grid.value - mc.value) <= grid.error + mc.error


def test_mc_deterministic():
    f = lambda p: p[:, 0]
    cfg = IntegratorConfig(kind="mc", n=10_000, seed=11)
    assert integrate(FIVE, f, cfg) == integrate(FIVE, f, cfg)


def test_log_integrate_constant():
    val = log_integrate_exp(UNIT, lambda p: np.zeros(p.shape[0]))
    assert val == pytest.approx(0.0, abs=1e-12)


def test_log_integrate_sharp_gaussian():
    # closed form: int_0^1 exp(-1000 x^2) dx = sqrt(pi/1000)/2 * erf(sqrt(1000))
    cfg = IntegratorConfig(kind="grid", resolution=8192)
    val = log_integrate_exp(UNIT, lambda p: -1000.0 * p[:, 0] ** 2, cfg)
    exact = np.log(np.sqrt(np.pi / 1000.0) / 2.0 * erf(np.sqrt(1000.0)))
    assert val == pytest.approx(exact, abs=1e-5)


def test_log_integrate_no_overflow_at_huge_scale():
    cfg = IntegratorConfig(kind="grid", resolution=4096)
    val = log_integrate_exp(UNIT, lambda p: -1e6 * p[:, 0] ** 2, cfg)
    assert np.isfinite(val)


def test_log_shift_identity():
    cfg = IntegratorConfig(kind="grid", resolution=1024)
    ell = lambda p: -3.0 * p[:, 0] ** 2
    base = log_integrate_exp(UNIT, ell, cfg)
    for c in (1.0, -50.0, 700.0):
        shifted = log_integrate_exp(UNIT, lambda p: ell(p) + c, cfg)
        assert shifted - base == pytest.approx(c, abs=1e-10)


def test_degenerate_integrand():
    with pytest.raises(DegenerateIntegrandError):
        log_integrate_exp(UNIT, lambda p: np.full(p.shape[0], -np.inf))


def test_default_config_by_dimension():
    assert default_config(1).kind == "grid"
    assert default_config(2).kind == "grid"
    assert default_config(4).kind == "mc"


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(kind="bogus")
    with pytest.raises(ValueError):
        IntegratorConfig(kind="mc", n=10)
    with pytest.raises(ValueError):
        IntegratorConfig(refinement_levels=0)
