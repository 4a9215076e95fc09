import numpy as np
import pytest

from rollcast import synthetic

_ACCEPTANCE = []


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None or call.when != "call":
        return
    _ACCEPTANCE.append((marker.args[0], call.excinfo is None))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok in sorted(_ACCEPTANCE, key=lambda r: int(r[0].split()[0][2:])):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}")


@pytest.fixture(scope="session")
def sine():
    return synthetic.sine_wave(400, period=40.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def write_csv(path, header, rows):
    path.write_text("\n".join([header] + rows) + "\n", encoding="utf-8")
    return path
