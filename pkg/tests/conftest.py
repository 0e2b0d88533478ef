import pytest

_VERDICTS = {}


class Criterion:
    """Collects the measured quantities of one acceptance criterion."""

    def __init__(self, number):
        self.number = number
        self.notes = []
        self.ok = True

    def check(self, label, ok, value=None):
        ok = bool(ok)
        self.ok &= ok
        self.notes.append(f"{label}={value:.3g}" if isinstance(value, float) else label if value is None else f"{label}={value}")
        return ok


@pytest.fixture
def criterion(request):
    marker = request.node.get_closest_marker("criterion")
    c = Criterion(marker.args[0])
    _VERDICTS[c.number] = c
    yield c
    line = f"{'PASS' if c.ok else 'FAIL'} criterion {c.number}: {', '.join(c.notes)}"
    print(line)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker and call.when == "call" and call.excinfo is not None and marker.args[0] in _VERDICTS:
        _VERDICTS[marker.args[0]].ok = False


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_VERDICTS):
        c = _VERDICTS[n]
        terminalreporter.write_line(f"{'PASS' if c.ok else 'FAIL'} criterion {n}: {', '.join(c.notes)}")
