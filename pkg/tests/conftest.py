import functools

import pytest

from realvar import corpus, pp
from realvar.parse import parse_system


@functools.lru_cache(maxsize=None)
def _cached_solve(name, items):
    return pp.solve(corpus.load(name), pp.SolveConfig(**dict(items)))


@pytest.fixture(scope="session")
def solved():
    """``solved(name, **config)``: solve a corpus system once per session."""

    def get(name, **kw):
        return _cached_solve(name, tuple(sorted(kw.items())))

    return get


@pytest.fixture
def system():
    return parse_system


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.LINES:
        terminalreporter.section("acceptance criteria")
        for line in mod.LINES:
            terminalreporter.write_line(line)
