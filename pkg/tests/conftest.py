import sys

import pytest

from stopduel.model import GbmRealOptionModel
from stopduel.stopping import ValueOracle

# mu=0, sigma=0.2, r=0.04 puts the exercise multiplier eta at 2 (so B = 2K),
# which makes every boundary and value below available in closed form
STD_MU = 0.0
STD_SIGMA = 0.2
STD_R = 0.04
STD_K = 1.0


@pytest.fixture(scope="session")
def std_model():
    return GbmRealOptionModel(STD_MU, STD_SIGMA, STD_R, STD_K)


@pytest.fixture(scope="session")
def std_oracle(std_model):
    return ValueOracle.closed_form(std_model)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion, when that module ran."""
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, ok, detail in results:
        line = "%s  %s" % ("PASS" if ok else "FAIL", name)
        if detail:
            line += "  [%s]" % detail
        terminalreporter.write_line(line)
