import numpy as np
import pytest

from inertia_plan import freq_response as fr
from inertia_plan.freq_response import CoiParams, coefficients
from inertia_plan.linearize import REF_SG1
from inertia_plan.sim_validate import (NotSettled, StepTooLarge, _propagator, _system, rk4_step,
                                       settle_horizon, simulate, simulate_many, trace_metrics)


def _random_underdamped(rng, n):
    out = []
    while len(out) < n:
        p = CoiParams(rng.uniform(0.2, 2), rng.uniform(15, 50), 0.0, rng.uniform(4, 25))
        p = p._replace(hp_gain=p.gov_gain * rng.uniform(0.1, 0.5))
        if fr._natural(p, 8.0)[1] < 0.98:
            out.append(p)
    return out


def test_zero_step():
    tr = simulate(REF_SG1, 0.0, horizon=5)
    assert not tr.df.any()
    m = trace_metrics(simulate(REF_SG1, 0.0))
    assert (m.nadir, m.rocof, m.qss) == (0.0, 0.0, 0.0)


def test_reference_trace():
    tr = simulate(REF_SG1, 0.2)
    k = int(np.argmin(tr.df))
    assert tr.df[k] == pytest.approx(-0.598, abs=1e-3)
    assert tr.t[k] == pytest.approx(2.37, abs=0.01)
    m = trace_metrics(tr)
    closed = fr.metrics(REF_SG1, 0.2)
    assert m.nadir == pytest.approx(closed.nadir, abs=1e-3)
    assert m.rocof == pytest.approx(closed.rocof, rel=1e-2)
    assert m.qss == pytest.approx(closed.qss, abs=1e-5)


def test_step_halving():
    a = simulate(REF_SG1, 0.2, horizon=10, dt=2e-3)
    b = simulate(REF_SG1, 0.2, horizon=10, dt=1e-3)
    assert np.max(np.abs(a.df - b.df[::2])) < 1e-8


def test_not_settled_and_step_guard():
    with pytest.raises(NotSettled):
        trace_metrics(simulate(REF_SG1, 0.2, horizon=1.0))
    with pytest.raises(StepTooLarge):
        simulate(REF_SG1, 0.2, dt=1.0)


def test_propagator_is_rk4():
    A, g = _system(REF_SG1, 8.0, 0.2)
    P, c = _propagator(A, g, 1e-2)
    y = np.array([0.01, -0.003])
    direct = rk4_step(lambda v: A @ v + g, y, 1e-2)
    np.testing.assert_allclose(P @ y + c, direct, rtol=1e-13, atol=1e-16)


def test_pointwise_against_closed_form():
    rng = np.random.default_rng(1)
    params = _random_underdamped(rng, 50)
    dps = rng.uniform(0.05, 0.5, size=50)
    horizon = max(settle_horizon(p) for p in params)
    traces = simulate_many(params, dps, horizon=horizon)
    for p, dp, tr in zip(params, dps, traces):
        exact = fr.trajectory(p, coefficients(p, 8.0), dp, tr.t)
        assert np.max(np.abs(exact - tr.df)) < 1e-4
        assert tr.df[-1] == pytest.approx(-50 * dp / (p.damping + p.gov_gain), abs=1e-5)
        assert (tr.df[1] - tr.df[0]) / tr.dt == pytest.approx(-50 * dp / p.inertia, rel=1e-2)
