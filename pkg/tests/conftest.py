import pytest

from dynjt.network import make_network

# A -> B, A -> C, {B, C} -> D
DIAMOND = dict(
    variables=[("A", 2), ("B", 2), ("C", 2), ("D", 2)],
    cpts={
        "A": ([], [0.3, 0.7]),
        "B": (["A"], [0.9, 0.1, 0.2, 0.8]),
        "C": (["A"], [0.6, 0.4, 0.25, 0.75]),
        "D": (["B", "C"], [0.95, 0.05, 0.5, 0.5, 0.4, 0.6, 0.1, 0.9]),
    },
)

# A -> B, B -> C, A -> D, C -> D
LOOPED_CHAIN = dict(
    variables=[("A", 2), ("B", 2), ("C", 2), ("D", 2)],
    cpts={
        "A": ([], [0.4, 0.6]),
        "B": (["A"], [0.7, 0.3, 0.2, 0.8]),
        "C": (["B"], [0.5, 0.5, 0.1, 0.9]),
        "D": (["A", "C"], [0.9, 0.1, 0.3, 0.7, 0.6, 0.4, 0.05, 0.95]),
    },
)


@pytest.fixture
def diamond():
    return make_network(**DIAMOND)


@pytest.fixture
def looped_chain():
    return make_network(**LOOPED_CHAIN)


@pytest.fixture
def chain():
    return make_network(
        [("A", 2), ("B", 2), ("C", 2)],
        {"A": ([], [0.5, 0.5]), "B": (["A"], [0.9, 0.1, 0.3, 0.7]), "C": (["B"], [0.2, 0.8, 0.6, 0.4])},
    )


@pytest.fixture
def star():
    names = ["R"] + [f"L{k}" for k in range(1, 6)]
    cpts = {"R": ([], [0.35, 0.65])}
    for k, name in enumerate(names[1:], start=1):
        p = 0.1 * k
        cpts[name] = (["R"], [p, 1 - p, 1 - p / 2, p / 2])
    return make_network([(n, 2) for n in names], cpts)


ACCEPTANCE_RESULTS = {}


def record_criterion(number, ok, detail):
    ACCEPTANCE_RESULTS[number] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
