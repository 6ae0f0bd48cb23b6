import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ghostosc.params import Branch, ModelParams, derive_aux  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def flagship():
    """nu = 4, Omega = -2, g = 1 on the normalisable branch."""
    p = ModelParams(4.0, -2.0, 1.0)
    return p, derive_aux(p, Branch(-1, 1))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
