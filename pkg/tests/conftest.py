import sys
from fractions import Fraction as Fr
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from statdigits.baseq import Cycle  # noqa: E402
from statdigits.process import IID, CycleProcess, MarkovChain, Mixture  # noqa: E402


def process_suite():
    """Named processes covering every family; the last entry is non-stationary."""
    half = Fr(1, 2)
    return {
        "fair2": IID(2, (half, half)),
        "biased2": IID(2, (Fr(1, 3), Fr(2, 3))),
        "fair3": IID(3, (Fr(1, 3),) * 3),
        "biased3": IID(3, (half, Fr(1, 3), Fr(1, 6))),
        "markov2": MarkovChain(2, ((Fr(7, 10), Fr(3, 10)), (Fr(2, 5), Fr(3, 5)))),
        "markov3": MarkovChain(
            3, ((half, half, 0), (Fr(1, 4), Fr(1, 4), half), (Fr(1, 3), Fr(1, 3), Fr(1, 3)))
        ),
        "markov2_order2": MarkovChain(
            2,
            ((Fr(9, 10), Fr(1, 10)), (half, half), (Fr(1, 5), Fr(4, 5)), (Fr(3, 5), Fr(2, 5))),
            order=2,
        ),
        "cycle01": CycleProcess(Cycle(2, (0, 1))),
        "cycle001": CycleProcess(Cycle(2, (0, 0, 1))),
        "cycle012": CycleProcess(Cycle(3, (0, 1, 2))),
        "mixture": Mixture((Fr(2, 5), Fr(3, 5)), (IID(2, (half, half)), CycleProcess(Cycle(2, (0, 1))))),
        "nonstationary": MarkovChain(
            2, ((Fr(7, 10), Fr(3, 10)), (Fr(2, 5), Fr(3, 5))), initial=(Fr(1), Fr(0))
        ),
    }


@pytest.fixture(scope="session")
def suite():
    return process_suite()


@pytest.fixture(scope="session")
def stationary_suite():
    return {k: v for k, v in process_suite().items() if v.stationary}


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(results):
        terminalreporter.write_line(line)
