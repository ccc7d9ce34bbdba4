import pytest

from streambisim import bundled_lemmas, load_bundled, monadify_spec

# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def calc():
    return load_bundled("streamcalc")


@pytest.fixture(scope="session")
def mcalc():
    return load_bundled("streamcalc_monadic")


@pytest.fixture(scope="session")
def alt():
    return load_bundled("alt")


@pytest.fixture(scope="session")
def malt(alt):
    return monadify_spec(alt)


@pytest.fixture(scope="session")
def fg():
    return monadify_spec(load_bundled("fg"))


@pytest.fixture(scope="session")
def lemmas(mcalc):
    return bundled_lemmas(mcalc)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
