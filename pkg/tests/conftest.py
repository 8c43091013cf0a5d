import pytest

from enginecal.campaign import run_campaign
from enginecal.config import load_campaign_config


@pytest.fixture(scope="session")
def two_dynamic_run(tmp_path_factory):
    """One complete adaptive run on the bundled two-actuator config, shared by
    the campaign, export and service tests."""
    out = tmp_path_factory.mktemp("two_dynamic")
    res = run_campaign(load_campaign_config("two_dynamic.yaml", seed=1), out_dir=out)
    return res, out


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES
    if LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(LINES):
            terminalreporter.write_line(LINES[n])
