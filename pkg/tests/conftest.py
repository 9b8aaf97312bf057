import numpy as np
import pytest

from phononprobe import fock


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def coherent2():
    """Coherent state with |alpha|^2 = 2 on a comfortably large basis."""
    return fock.coherent_state(np.sqrt(2.0), 32)



def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(RESULTS, key=lambda k: int(k[1:])):
            terminalreporter.write_line(RESULTS[key])
