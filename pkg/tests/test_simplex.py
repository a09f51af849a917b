import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from svcmsi.simplex import MinimizeConfig, simplex_minimize


def rosenbrock(x):
    return (1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2


def test_quadratic():
    x, f, n = simplex_minimize(lambda x: (x[0] - 3.0) ** 2, [0.0])
    assert x[0] == pytest.approx(3.0, abs=1e-6)
    assert f < 1e-12


def test_constant_objective_keeps_start():
    res = simplex_minimize(lambda x: 4.0, [1.0, -2.0])
    np.testing.assert_array_equal(res.x, [1.0, -2.0])
    assert res.fun == 4.0


def test_rosenbrock():
    res = simplex_minimize(rosenbrock, [-1.2, 1.0], MinimizeConfig(max_evaluations=5000))
    assert res.fun < 1e-6
    np.testing.assert_allclose(res.x, [1.0, 1.0], atol=1e-3)
    assert res.evaluations <= 5000


def test_budget_is_respected_and_flagged():
    calls = []

    def f(x):
        calls.append(1)
        return rosenbrock(x)

    res = simplex_minimize(f, [-1.2, 1.0], MinimizeConfig(max_evaluations=25))
    assert res.budget_exhausted
    assert res.evaluations == 25
    assert len(calls) == 25


def test_budget_of_one_returns_start():
    res = simplex_minimize(rosenbrock, [-1.2, 1.0], MinimizeConfig(max_evaluations=1))
    np.testing.assert_array_equal(res.x, [-1.2, 1.0])
    assert res.fun == rosenbrock([-1.2, 1.0])
    assert res.budget_exhausted


def test_non_finite_start_is_rejected():
    with pytest.raises(ValueError):
        simplex_minimize(lambda x: float("nan"), [0.0])


def test_non_finite_points_are_avoided():
    def f(x):
        return np.inf if x[0] > 2 else (x[0] - 1) ** 2

    res = simplex_minimize(f, [0.0])
    assert res.x[0] == pytest.approx(1.0, abs=1e-5)


def test_deterministic_for_a_seed():
    cfg = MinimizeConfig(max_evaluations=300, restarts=3, seed=9)
    a = simplex_minimize(rosenbrock, [0.0, 0.0], cfg)
    b = simplex_minimize(rosenbrock, [0.0, 0.0], cfg)
    assert a.x.tobytes() == b.x.tobytes()
    assert a.fun == b.fun


@settings(max_examples=30, deadline=None)
@given(
    x0=st.lists(st.floats(-5, 5), min_size=1, max_size=4),
    budget=st.integers(1, 200),
    seed=st.integers(0, 1000),
)
def test_never_worse_than_start(x0, budget, seed):
    def f(x):
        return float(np.sum(np.abs(x - 0.7)) + np.sin(5 * x).sum())

    res = simplex_minimize(f, x0, MinimizeConfig(max_evaluations=budget, seed=seed))
    assert res.fun <= f(np.array(x0))
    assert res.evaluations <= budget


@pytest.mark.parametrize(
    "kwargs",
    [{"max_evaluations": 0}, {"x_tolerance": 0.0}, {"f_tolerance": -1.0}, {"initial_step": 0.0},
     {"restarts": -1}, {"seed": -3}],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        MinimizeConfig(**kwargs)
