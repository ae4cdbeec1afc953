import pytest

from gbam.model import alloctc_config, mam_config, rdm_config

REFERENCE_BCS = [248800, 217700, 155500]
REFERENCE_CAPACITY = 622000

_criteria: list[tuple[str, str, str]] = []


@pytest.fixture
def reference_configs():
    return {
        "mam": mam_config(REFERENCE_BCS, REFERENCE_CAPACITY),
        "rdm": rdm_config(REFERENCE_BCS, REFERENCE_CAPACITY),
        "alloctc": alloctc_config(REFERENCE_BCS, REFERENCE_CAPACITY),
    }


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.when != "call":
        return
    detail = "; ".join(f"{k}={v}" for k, v in item.user_properties)
    _criteria.append((marker.args[0], rep.outcome.upper(), detail))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, detail in _criteria:
        terminalreporter.write_line(f"{outcome:<7} {name}  {detail}".rstrip())
