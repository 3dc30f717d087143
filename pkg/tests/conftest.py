import re
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# acceptance verdict lines, printed after the run
ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    def add(criterion, passed, detail=""):
        line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'}"
        ACCEPTANCE_LINES.append(line + (f"  ({detail})" if detail else ""))
        print(ACCEPTANCE_LINES[-1])
        return passed

    return add


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(re.search(r"\d+", s).group())):
            terminalreporter.write_line(line)
