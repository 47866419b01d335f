import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from inertia_plan import freq_response as fr
from inertia_plan.freq_response import CoiParams, coefficients
from inertia_plan.linearize import REF_SG1, error_stats, gradient, nadir_gain, taylor_h


def test_gain_reference():
    h = nadir_gain(REF_SG1, 8.0)
    # 16.718 is 10 / 0.598 with the nadir rounded to three digits
    assert h == pytest.approx(16.718, abs=0.03)
    c = coefficients(REF_SG1, 8.0)
    assert fr.nadir(REF_SG1, c, 0.2) * h == pytest.approx(-50 * 0.2, rel=1e-12)


def test_gain_radicand_zero():
    p = CoiParams(0.9, 20.0, 20.0, 14.0)
    assert nadir_gain(p) == pytest.approx(20.9)


def test_gradient_properties():
    tp = gradient(REF_SG1)
    assert tp.h0 == nadir_gain(REF_SG1)
    tp2 = gradient(REF_SG1, rel_step=0.5e-6)
    np.testing.assert_allclose(tp.partials, tp2.partials, rtol=1e-4)
    up = nadir_gain(REF_SG1._replace(inertia=14.5))
    assert up > tp.h0 and tp.partials.inertia > 0


def test_taylor_examples():
    tp = gradient(REF_SG1)
    assert taylor_h(tp, REF_SG1) == tp.h0
    q = REF_SG1._replace(hp_gain=REF_SG1.hp_gain + 0.3)
    assert taylor_h(tp, q) == pytest.approx(tp.h0 + 0.3 * tp.partials.hp_gain, rel=1e-12)
    rng = np.random.default_rng(3)
    x = np.array(REF_SG1)
    for _ in range(50):
        d = rng.normal(size=4)
        d *= 0.01 * np.linalg.norm(x) * rng.uniform() / np.linalg.norm(d)
        q = CoiParams(*(x + d))
        assert taylor_h(tp, q) == pytest.approx(nadir_gain(q), rel=5e-3)


def test_taylor_kw_scale():
    tp = gradient(REF_SG1)
    kw = CoiParams(*(v * 280 for v in REF_SG1))
    assert taylor_h(tp, kw, 1 / 280) == pytest.approx(tp.h0, rel=1e-12)


def test_error_stats_examples():
    zero = error_stats(1, spread=0.0)
    assert zero.mean_abs == 0 and zero.mean_rel == 0
    s = error_stats(1000, seed=11)
    assert s.mean_rel < 0.01
    assert 0 <= s.mean_abs <= s.max_abs
    assert error_stats(200, seed=5) == error_stats(200, seed=5)


def test_second_order_residual():
    rng = np.random.default_rng(21)
    x = np.array(REF_SG1)
    tp = gradient(REF_SG1)
    for _ in range(20):
        d = rng.normal(size=4)
        d *= 0.02 * x / np.linalg.norm(d)
        r1 = abs(nadir_gain(CoiParams(*(x + d))) - taylor_h(tp, CoiParams(*(x + d))))
        r2 = abs(nadir_gain(CoiParams(*(x + d / 2))) - taylor_h(tp, CoiParams(*(x + d / 2))))
        assert 3.5 <= r1 / r2 <= 4.5


@settings(max_examples=150, deadline=None)
@given(st.floats(0.1, 3), st.floats(10, 60), st.floats(0, 1), st.floats(2, 30), st.floats(0.01, 0.8))
def test_gain_identity(d, r, f, m, dp):
    p = CoiParams(d, r, f * r, m)
    assert fr.nadir_general(p, dp) * nadir_gain(p) == pytest.approx(-50 * dp, rel=1e-12)
