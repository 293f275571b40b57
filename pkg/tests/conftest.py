import numpy as np
import pytest

from scn2d.model import Network, OneDNode, Provenance, TwoDNode


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_2d_net(rng, d1=3, d2=4, L=5, m=2, scale=1.0):
    nodes = [TwoDNode(rng.uniform(-scale, scale, d1), rng.uniform(-scale, scale, d2),
                      rng.uniform(-scale, scale)) for _ in range(L)]
    return Network((d1, d2), nodes, rng.normal(size=(L, m)), Provenance("2DRVFL", 0))


def random_1d_net(rng, d=6, L=5, m=1, scale=1.0):
    nodes = [OneDNode(rng.uniform(-scale, scale, d), rng.uniform(-scale, scale)) for _ in range(L)]
    return Network((d,), nodes, rng.normal(size=(L, m)), Provenance("RVFL", 0))


_ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    """Record and print one PASS/FAIL line per acceptance criterion, then assert."""
    def record(number, name, ok, detail=""):
        line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else "")
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
