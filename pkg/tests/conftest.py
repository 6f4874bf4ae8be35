import functools

import pytest

from artifact.catalog import CATALOG, entry
from artifact.field_tower import build_lattice_model, tower_from_spec
from artifact.ramification import profile


@functools.lru_cache(maxsize=None)
def catalog_model(name, precision=32):
    L, K = tower_from_spec({**entry(name).spec, "precision": precision})
    m = build_lattice_model(L, K)
    return m, profile(m)


WILD_WITH_A = [e.name for e in CATALOG if e.t > 0 and e.t % (e.spec["p"]) != 0]


@pytest.fixture
def model_of():
    return catalog_model


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
