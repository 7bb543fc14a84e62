import json
from pathlib import Path

import pytest
from hypothesis import settings, HealthCheck

from hyperlat.quaternion import make_q17_algebra
from hyperlat.latenum import enumerate_units, load_cache, save_cache

DATA = Path(__file__).parent / "data"

settings.register_profile(
    "suite",
    derandomize=True,
    max_examples=200,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

WINDOW = (-1.0, 1.0, 0.5, 2.0)
EPS_LIST = [0.5, 0.25, 0.125, 0.0625, 0.03125]
DIO_SEED = 17
CACHE_R1 = 3.5
CACHE_R2 = 12.5


@pytest.fixture(scope="session")
def algebra():
    return make_q17_algebra()


@pytest.fixture(scope="session")
def dio_cache(algebra):
    """The window enumeration used by the approximation experiments;
    loaded from the shipped binary cache, rebuilt if absent or stale."""
    path = DATA / "units_cache_window.bin"
    if path.exists():
        try:
            return load_cache(path, algebra)
        except ValueError:
            pass
    cache = enumerate_units(algebra, CACHE_R1, CACHE_R2, node_budget=10**11)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_cache(cache, path)
    return cache


@pytest.fixture(scope="session")
def gram_golden():
    with open(DATA / "gram_q17.json") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def dio_band():
    with open(DATA / "diophantine_band.json") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def approx_golden():
    with open(DATA / "approx_regression.json") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def enum_counts_golden():
    with open(DATA / "enumeration_counts.json") as fh:
        return json.load(fh)
