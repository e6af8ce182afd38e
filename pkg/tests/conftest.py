import json
from pathlib import Path

import pytest

from dirichlet_xray import kernels
from dirichlet_xray.evaluator import davenport_heilbronn, riemann_zeta
from dirichlet_xray.zeros import SearchRegion, locate_zeros, pair_zeros

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def dh():
    return davenport_heilbronn()


@pytest.fixture(scope="session")
def zeta():
    return riemann_zeta()


@pytest.fixture(scope="session")
def dh_fixture():
    return json.loads((FIXTURES / "dh_offline_pairs.json").read_text())


@pytest.fixture(scope="session")
def dh_scan(dh):
    """Zeros of the Davenport-Heilbronn function in [0,1] x [60,200] and their pairing."""
    zs = locate_zeros(dh, SearchRegion(0, 1, 60, 200))
    pairs, unpaired = pair_zeros(zs)
    return zs, [p for p in pairs if not p.degenerate], unpaired


BACKENDS = [("numpy", kernels.hurwitz_em_numpy, kernels.hurwitz_em_d_numpy)]
if kernels.hurwitz_em_compiled is not None:
    BACKENDS.append(("cython", kernels.hurwitz_em_compiled, kernels.hurwitz_em_d_compiled))


@pytest.fixture(params=BACKENDS, ids=[b[0] for b in BACKENDS])
def backend(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance") or __import__("sys").modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
