import json

import pytest

from inertia_plan.data import fixture_names, fixture_path
from inertia_plan.freq_response import fleet_from_rows
from inertia_plan.mg import instance_from_dict, load_instance

SG1 = {"M": 14.0, "D": 0.9, "K": 1.0, "R": 0.03, "F": 0.35}


def sg1_fleet(cap=280.0):
    return fleet_from_rows([{"kind": "sg", "capacity_kw": cap, "params": SG1}])


def one_bus(demand, units, tariff=0.1, rating=0.0, periods_hours=24.0, disc=2.0, shift=0.05, limits=None):
    """Single-bus instance with one 365-weight day."""
    n = int(round(24 / periods_hours))
    dem = demand if isinstance(demand, list) else [demand] * n
    doc = {
        "name": "one_bus", "period_hours": periods_hours, "buses": ["b1"], "lines": [],
        "grid": {"bus": "b1", "rating_kw": rating, "tariff": tariff},
        "units": units,
        "days": [{"weight": 365, "demand_kw": {"b1": dem}, "pv": [1.0] * n}],
        "penalties": {"shift": shift, "disconnection": disc},
    }
    if limits:
        doc["limits"] = limits
    return instance_from_dict(doc)


@pytest.fixture(scope="session")
def toy():
    return load_instance(fixture_path("toy"))


@pytest.fixture(scope="session")
def toy_doc():
    return json.loads(fixture_path("toy").read_text())


@pytest.fixture(scope="session", params=fixture_names())
def any_fixture(request):
    return load_instance(fixture_path(request.param))


class PlanCache:
    """Session-wide memo of planning runs with their wall time (first run only)."""

    def __init__(self):
        self.runs = {}

    def get(self, name, algorithm, **limits):
        import time

        from inertia_plan.decomposition import plan

        key = (name, algorithm, tuple(sorted(limits.items())))
        if key not in self.runs:
            inst = load_instance(fixture_path(name))
            if limits:
                inst = inst.with_limits(**limits)
            t0 = time.perf_counter()
            res = plan(inst, algorithm)
            self.runs[key] = (inst, res, time.perf_counter() - t0)
        return self.runs[key]


_CACHE = PlanCache()


@pytest.fixture(scope="session")
def plans():
    return _CACHE
