import pytest

from ghostlab.families import mixed_small_family, sl2_family
from ghostlab.ghost import build_T, ghost_projection, make_window, rank_sequence


@pytest.fixture(scope="session")
def sl2_357():
    return sl2_family([3, 5, 7])


@pytest.fixture(scope="session")
def sl2_35():
    return sl2_family([3, 5])


@pytest.fixture(scope="session")
def mixed():
    return mixed_small_family()


@pytest.fixture(scope="session")
def sl2_pipeline(sl2_357):
    """Full sl2 {3,5,7} Steinberg pipeline, computed once."""
    window = make_window(sl2_357, policy="steinberg")
    T = build_T(window, parallelism=4)
    e = ghost_projection(T, parallelism=4)
    return window, T, e, rank_sequence(e)


@pytest.fixture(scope="session")
def mixed_pipeline(mixed):
    window = make_window(mixed, policy="deleted-natural")
    T = build_T(window)
    e = ghost_projection(T)
    return window, T, e, rank_sequence(e)


ACCEPTANCE_LINES = {}


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""
    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
