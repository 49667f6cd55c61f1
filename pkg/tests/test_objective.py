import numpy as np
import pytest

from mdopt.objective import (EvaluationError, Objective, StencilError,
                             UnknownFunctionError, catalog_get, catalog_names,
                             evaluate_batch, gradient)

import oracles


def test_paper1d_value():
    obj, region = catalog_get("paper1d")
    assert obj(np.array([0.0])) == pytest.approx(2.0)
    assert region.lower[0] == 0.0 and region.upper[0] == 5.0


def test_paper2d_value():
    obj, _ = catalog_get("paper2d")
    assert obj(np.array([0.0, 0.0])) == pytest.approx(4.0)


def test_stability1d():
    obj, region = catalog_get("stability1d")
    assert obj(np.array([0.0])) == pytest.approx(2.0)  # cos(0)+1
    assert region.upper[0] == 5.0
    # both registered minimizers sit at f = 0
    for x in obj.oracle_minimizers:
        assert obj(np.array([x])) == pytest.approx(0.0, abs=1e-12)


def test_const_parsing():
    obj, _ = catalog_get("const3")
    assert obj(np.array([0.42])) == pytest.approx(3.0)
    obj2, _ = catalog_get("const-1.5")
    assert obj2(np.array([0.9])) == pytest.approx(-1.5)


def test_unknown_name():
    with pytest.raises(UnknownFunctionError):
        catalog_get("nope")


def test_catalog_names_mandatory():
    names = catalog_names()
    for required in ("paper1d", "paper2d", "stability1d", "stability2d",
                     "quadratic", "rastrigin", "ackley"):
        assert required in names


def test_evaluate_batch_order_preserved():
    obj, _ = catalog_get("paper1d")
    xs = np.array([[0.0], [1.0], [2.0]])
    vals = evaluate_batch(obj, xs)
    assert vals[0] == pytest.approx(2.0)
    assert np.array_equal(vals, obj(xs))


def test_evaluate_batch_nonfinite():
    bad = Objective(name="bad", dim=1,
                    fn=lambda p: np.where(p[:, 0] > 0.5, np.inf, 0.0))
    with pytest.raises(EvaluationError) as err:
        evaluate_batch(bad, np.array([[0.1], [0.9]]))
    assert err.value.point is not None


def test_gradient_fd_quadratic():
    obj = Objective(name="sq", dim=1, fn=lambda p: p[:, 0] ** 2)
    g = gradient(obj, np.array([0.5]), h=1e-5)
    assert g[0] == pytest.approx(1.0, abs=1e-8)


def test_gradient_constant_zero():
    obj, _ = catalog_get("const3")
    g = gradient(obj, np.array([0.3]))
    assert np.allclose(g, 0.0)


def test_gradient_paper1d_analytic():
    obj, _ = catalog_get("paper1d")
    g = gradient(obj, np.array([1.0]))
    assert g[0] == pytest.approx(-2.0 * np.sin(1.0) + 0.2, rel=1e-12)


@pytest.mark.parametrize("name", ["paper1d", "paper2d", "stability1d",
                                  "stability2d", "quadratic", "doublewell",
                                  "rastrigin"])
def test_analytic_matches_finite_difference(name):
    obj, region = catalog_get(name)
    assert obj.grad is not None
    rng = np.random.Generator(np.random.Philox(42))
    span = region.upper - region.lower
    pts = region.lower + 0.1 * span + 0.8 * span * rng.random((20, obj.dim))
    fd_obj = Objective(name=name + "_fd", dim=obj.dim, fn=obj.fn)
    for x in pts:
        ga = gradient(obj, x)
        gf = gradient(fd_obj, x)
        assert np.linalg.norm(ga - gf) <= 1e-5 * max(1.0, np.linalg.norm(ga))


def test_gradient_stencil_error():
    obj, region = catalog_get("ackley")  # no analytic gradient registered
    assert obj.grad is None
    with pytest.raises(StencilError):
        gradient(obj, region.lower.copy(), h=1e-3, region=region)


def test_paper1d_oracle_brute_force(paper1d_oracle):
    xs, fs = paper1d_oracle
    obj, _ = catalog_get("paper1d")
    assert obj(np.array([xs])) == pytest.approx(fs, abs=1e-14)
    # derivative vanishes at the refined minimizer
    assert gradient(obj, np.array([xs]))[0] == pytest.approx(0.0, abs=1e-6)
