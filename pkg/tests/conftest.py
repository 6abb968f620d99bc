import os
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("ci", derandomize=True, deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("dev", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))

FIXTURES = Path(__file__).parents[1] / "src" / "edt0l" / "fixtures"


@pytest.fixture(scope="session")
def free2():
    from edt0l.groups import build_free_bundle
    return build_free_bundle(2)


@pytest.fixture(scope="session")
def free1():
    from edt0l.groups import build_free_bundle
    return build_free_bundle(1)


@pytest.fixture(scope="session")
def surface2():
    from edt0l.groups import load_bundle
    return load_bundle(FIXTURES / "surface2.bundle")


@pytest.fixture(scope="session")
def example33():
    from edt0l.grammar import parse
    return parse((FIXTURES / "example33.grammar").read_text())


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
