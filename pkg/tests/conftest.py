import pathlib

import pytest

from loke import kb

FIXTURES = pathlib.Path(__file__).parent / "fixtures"

# criterion name -> True/False/None(skipped), in first-seen order
_criteria: dict = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(name): acceptance criterion verified by this test"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    name = marker.args[0]
    if report.failed:
        _criteria[name] = False
    elif report.skipped:
        _criteria.setdefault(name, None)
    elif report.when == "call" and report.passed:
        _criteria.setdefault(name, True)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in _criteria.items():
        status = {True: "PASS", False: "FAIL", None: "SKIP"}[ok]
        terminalreporter.write_line(f"{status}  {name}")


@pytest.fixture(scope="session")
def entity_index():
    return kb.build_index(kb.load_dump(str(FIXTURES / "entities.jsonl"), "entity"), "entity")


@pytest.fixture(scope="session")
def property_index():
    return kb.build_index(
        kb.load_dump(str(FIXTURES / "properties.jsonl"), "property"), "property"
    )
