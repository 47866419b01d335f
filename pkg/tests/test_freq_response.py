import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from inertia_plan import freq_response as fr
from inertia_plan.freq_response import (CoiParams, FrequencyMetrics, SecurityLimits, aggregate,
                                        check_limits, coefficients, fleet_from_rows)

from conftest import SG1, sg1_fleet

SG1_COI = CoiParams(0.9, 1 / 0.03, 0.35 / 0.03, 14.0)


def test_aggregate_reference_sg():
    a = aggregate(sg1_fleet())
    assert a.sg_inertia == pytest.approx(14.0)
    assert a.sg_damping == pytest.approx(0.9)
    assert a.sg_gov_gain == pytest.approx(100 / 3)
    assert a.sg_hp_gain == pytest.approx(35 / 3)
    assert (a.inertia, a.damping, a.p_base) == pytest.approx((14.0, 0.9, 280.0))


def test_aggregate_shared_parameters_and_uncommitted():
    both = fleet_from_rows([{"kind": "sg", "capacity_kw": 280, "params": SG1},
                            {"kind": "vsm", "capacity_kw": 350, "params": {"M": 14, "D": 0.9}}])
    a = aggregate(both)
    assert a.inertia == pytest.approx(14.0)
    # droop gain of SG1 counts via gov_gain, VSM damping shares the common value
    assert a.damping == pytest.approx(0.9)
    off = fleet_from_rows([{"kind": "sg", "capacity_kw": 280, "params": SG1},
                           {"kind": "vsm", "capacity_kw": 350, "params": {"M": 14, "D": 0.9},
                            "committed": False}])
    assert aggregate(off) == aggregate(sg1_fleet())


def test_fixed_output_adds_base_only():
    a = aggregate(fleet_from_rows([{"kind": "sg", "capacity_kw": 100, "params": SG1},
                                   {"kind": "fixed", "capacity_kw": 100}]))
    assert a.p_base == 200
    assert a.inertia == pytest.approx(7.0)
    assert a.inertia_kw == pytest.approx(1400.0)


def test_empty_fleet():
    with pytest.raises(fr.EmptyFleet):
        aggregate(fleet_from_rows([{"kind": "sg", "capacity_kw": 1, "params": SG1, "committed": False}]))


def test_coefficients_reference():
    c = coefficients(SG1_COI, 8.0)
    assert c.omega_n == pytest.approx(0.5529, abs=1e-4)
    assert c.zeta == pytest.approx(0.9248, abs=1e-4)
    assert c.t_nadir == pytest.approx(2.37, abs=0.01)


def test_coefficients_scaling_and_overdamped():
    a = coefficients(SG1_COI, 8.0)
    scaled = CoiParams(4 * SG1_COI.damping, 4 * SG1_COI.gov_gain, SG1_COI.hp_gain, SG1_COI.inertia)
    assert fr._natural(scaled, 8.0)[0] == pytest.approx(2 * a.omega_n)
    # choose M so that zeta is exactly 1:  (M + T(D+F))^2 = 4 M T (D+R)
    D, R, F, T = 0.9, 1 / 0.03, 0.35 / 0.03, 8.0
    b = 2 * T * (D + F) - 4 * T * (D + R)
    c = (T * (D + F)) ** 2
    M = (-b + math.sqrt(b * b - 4 * c)) / 2
    with pytest.raises(fr.Overdamped):
        coefficients(CoiParams(D, R, F, M), T)


def test_nadir_rocof_qss_examples():
    c = coefficients(SG1_COI, 8.0)
    assert fr.nadir(SG1_COI, c, 0.0) == 0.0
    assert fr.nadir(SG1_COI, c, 0.2) == pytest.approx(-0.598, abs=1e-3)
    assert fr.nadir(SG1_COI, c, 0.4) == pytest.approx(2 * fr.nadir(SG1_COI, c, 0.2), rel=1e-12)
    assert fr.rocof(CoiParams(0.9, 1, 0, 14.0), 0.35) == pytest.approx(-1.25)
    assert fr.rocof(CoiParams(0.9, 1, 0, 7.0), 0.35) == pytest.approx(-2.5)
    assert fr.qss(SG1_COI, 0.2) == pytest.approx(-0.2921, abs=1e-4)
    assert fr.qss(SG1_COI._replace(inertia=3.0), 0.2) == fr.qss(SG1_COI, 0.2)


def test_general_nadir_matches_underdamped():
    c = coefficients(SG1_COI, 8.0)
    assert fr.nadir_general(SG1_COI, 0.2) == pytest.approx(fr.nadir(SG1_COI, c, 0.2), rel=1e-12)


def test_trajectory_anchors():
    c = coefficients(SG1_COI, 8.0)
    assert fr.trajectory(SG1_COI, c, 0.2, 0.0) == pytest.approx(0.0, abs=1e-12)
    assert fr.trajectory(SG1_COI, c, 0.2, c.t_nadir) == pytest.approx(fr.nadir(SG1_COI, c, 0.2), rel=1e-9)
    assert fr.trajectory(SG1_COI, c, 0.2, 120.0) == pytest.approx(fr.qss(SG1_COI, 0.2), abs=1e-6)
    h = 1e-4
    slope = fr.trajectory(SG1_COI, c, 0.2, h) / h
    assert slope == pytest.approx(fr.rocof(SG1_COI, 0.2), rel=1e-2)


def test_check_limits_examples():
    lim = SecurityLimits()
    r = check_limits(FrequencyMetrics(-0.598, -0.5, -0.1), lim)
    assert r["nadir"].ok and r["nadir"].margin == pytest.approx(0.002)
    assert not check_limits(FrequencyMetrics(0.0, -2.5, 0.0), lim)["rocof"].ok
    assert check_limits(FrequencyMetrics(0.0, 0.0, 0.0), lim).ok
    # symmetric: positive deviations are bounded the same way
    assert not check_limits(FrequencyMetrics(0.61, 0.0, 0.0), lim).ok


# ---- properties


def _units():
    sg = st.fixed_dictionaries({
        "kind": st.just("sg"), "capacity_kw": st.floats(10, 500),
        "committed": st.booleans(),
        "params": st.fixed_dictionaries({"M": st.floats(2, 20), "D": st.floats(0, 2), "K": st.floats(0.5, 1.5),
                                         "R": st.floats(0.02, 0.1), "F": st.floats(0, 1)})})
    vsm = st.fixed_dictionaries({
        "kind": st.just("vsm"), "capacity_kw": st.floats(10, 500), "committed": st.booleans(),
        "params": st.fixed_dictionaries({"M": st.floats(0, 20), "D": st.floats(0, 2)})})
    droop = st.fixed_dictionaries({
        "kind": st.just("droop"), "capacity_kw": st.floats(10, 500), "committed": st.booleans(),
        "params": st.fixed_dictionaries({"K": st.floats(0.5, 1.5), "R": st.floats(0.02, 0.1)})})
    fixed = st.fixed_dictionaries({"kind": st.just("fixed"), "capacity_kw": st.floats(10, 500),
                                   "committed": st.booleans()})
    return st.lists(st.one_of(sg, vsm, droop, fixed), min_size=1, max_size=6)


@settings(max_examples=200, deadline=None)
@given(_units())
def test_aggregation_consistency(rows):
    on = [r for r in rows if r["committed"]]
    if not on:
        return
    a = aggregate(fleet_from_rows(rows))
    m_sum = math.fsum(r["params"]["M"] * r["capacity_kw"] for r in on if r["kind"] in ("sg", "vsm"))
    assert a.inertia * a.p_base == pytest.approx(m_sum, rel=1e-12, abs=1e-12)
    d_sum = math.fsum(r["params"]["D"] * r["capacity_kw"] for r in on if r["kind"] in ("sg", "vsm"))
    d_sum += math.fsum(r["params"]["K"] / r["params"]["R"] * r["capacity_kw"] for r in on if r["kind"] == "droop")
    assert a.damping * a.p_base == pytest.approx(d_sum, rel=1e-12, abs=1e-12)
    assert a.p_base == pytest.approx(a.p_sg + a.p_cig)
    sgs = [r["params"]["M"] for r in on if r["kind"] == "sg"]
    if sgs:
        assert min(sgs) - 1e-9 <= a.sg_inertia <= max(sgs) + 1e-9
    vsms = [r["params"]["M"] for r in on if r["kind"] == "vsm"]
    cig_caps = sum(r["capacity_kw"] for r in on if r["kind"] != "sg")
    if vsms and cig_caps == sum(r["capacity_kw"] for r in on if r["kind"] == "vsm"):
        assert min(vsms) - 1e-9 <= a.cig_inertia <= max(vsms) + 1e-9


def _coi():
    return st.builds(lambda d, r, fr_, m: CoiParams(d, r, fr_ * r, m),
                     st.floats(0.1, 3), st.floats(10, 60), st.floats(0, 1), st.floats(2, 30))


@settings(max_examples=200, deadline=None)
@given(_coi(), st.floats(-0.8, 0.8), st.floats(0.1, 5))
def test_homogeneity(p, dp, k):
    m1 = fr.metrics(p, dp)
    m2 = fr.metrics(p, k * dp)
    for a, b in ((m1.nadir, m2.nadir), (m1.rocof, m2.rocof), (m1.qss, m2.qss)):
        assert b == pytest.approx(k * a, rel=1e-9, abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(_coi(), st.floats(0.01, 0.8))
def test_qss_inside_nadir(p, dp):
    m = fr.metrics(p, dp)
    assert abs(m.qss) <= abs(m.nadir) + 1e-12


def test_monotone_safety_grid():
    rng = np.random.default_rng(7)
    for _ in range(100):
        d, r, f, m = rng.uniform(0.1, 3), rng.uniform(10, 60), rng.uniform(0, 1), rng.uniform(2, 25)
        lo = CoiParams(d, r, f * r, m)
        hi = lo._replace(inertia=m * rng.uniform(1.05, 2.0))
        assert abs(fr.rocof(hi, 0.2)) < abs(fr.rocof(lo, 0.2))
        assert abs(fr.nadir_general(hi, 0.2)) <= abs(fr.nadir_general(lo, 0.2)) + 1e-12
