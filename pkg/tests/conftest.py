import pytest

from symcool.species import load_species_file

_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def registry():
    return load_species_file()


@pytest.fixture(scope="session")
def mgh(registry):
    return registry.pair("MgH+", "Mg+")


@pytest.fixture(scope="session")
def n2(registry):
    return registry.pair("N2+", "Ca+")


@pytest.fixture(scope="session")
def hd(registry):
    return registry.pair("HD+", "Be+")


@pytest.fixture
def record():
    """Store a one-line acceptance verdict, printed now and in the terminal summary."""
    def _record(number, title, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number:2d}  {title}: {detail}"
        _ACCEPTANCE[number] = line
        print(line)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number])
