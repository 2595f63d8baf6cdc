import numpy as np
import pytest

from nonabelian_qgt.models import ModelSpec

ACCEPTANCE_LINES = []


def record(number, ok, detail):
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=[("cp_lattice", 1), ("cp_lattice", 2), ("c2t_lattice", 1), ("c2t_lattice", 2)],
                ids=lambda p: f"{p[0]}-n{p[1]}")
def lattice_spec(request):
    fam, n = request.param
    return ModelSpec(fam, n=n)


def random_k(rng, count):
    """Random momenta kept away from the M=2 monopoles at kz = +-pi/2."""
    k = rng.uniform(-np.pi, np.pi, (count, 3))
    k[:, 2] = rng.uniform(-1.2, 1.2, count)
    return k
