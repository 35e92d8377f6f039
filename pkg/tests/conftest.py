import pytest

from qds.analysis import AnalysisOptions
from qds.channel import ChannelParams, DecoySettings
from qds.config import bundled_config_path
from qds.security import SecurityParams

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def channel():
    return ChannelParams()


@pytest.fixture
def decoy():
    return DecoySettings()


@pytest.fixture
def params():
    return SecurityParams()


@pytest.fixture
def options():
    return AnalysisOptions()


@pytest.fixture
def reference_cfg():
    return bundled_config_path()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
