import sys
from pathlib import Path

from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

import testkit

# Reproducible CI runs: derandomized hypothesis, no flaky deadline failures.
settings.register_profile(
    "ci",
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if testkit.ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in testkit.ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
