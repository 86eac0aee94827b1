import pytest
from hypothesis import HealthCheck, settings

from tensorlift.corpus import DesignSpec, full_corpus, generate
from tensorlift.passes import run_pipeline

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def corpus():
    return full_corpus()


@pytest.fixture(scope="session")
def lifted_corpus(corpus):
    m, _ = corpus
    return run_pipeline(m, snapshots=True)


@pytest.fixture(scope="session")
def pe_module():
    return generate(DesignSpec("pe"))[0]


@pytest.fixture(scope="session")
def lifted_pe(pe_module):
    return run_pipeline(pe_module).module


# acceptance criteria: one PASS/FAIL line each in the terminal summary
_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            _CRITERIA.setdefault(mark.args[0], [mark.args[1], "NOT RUN"])


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if not mark:
        return
    entry = _CRITERIA[mark.args[0]]
    if call.excinfo is not None and call.excinfo.errisinstance(pytest.skip.Exception):
        if entry[1] == "NOT RUN":
            entry[1] = "SKIPPED"
    elif call.excinfo is not None and call.when in ("setup", "call"):
        entry[1] = "FAIL"
    elif call.when == "call" and entry[1] != "FAIL":
        entry[1] = "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, status = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:>2}: {status:<7} {title}")
