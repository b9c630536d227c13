import time

from hypothesis import settings

# property tests draw the same examples on every run
settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")

import pytest

_LINES = pytest.StashKey[list]()


class Criterion:
    """Sub-checks of one acceptance criterion."""

    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title
        self.items: list[tuple[str, bool]] = []
        self.start = time.perf_counter()

    def check(self, label, value, expected, tol):
        ok = abs(value - expected) <= tol
        self.items.append((f"{label}: {value:.6g} vs {expected} +/- {tol}", ok))

    def require(self, label, ok):
        self.items.append((label, bool(ok)))

    @property
    def ok(self) -> bool:
        return bool(self.items) and all(ok for _, ok in self.items)

    def verify(self):
        bad = [label for label, ok in self.items if not ok]
        assert self.ok, f"criterion {self.number} failed: " + "; ".join(bad)


@pytest.fixture
def criterion(request):
    made = []

    def make(number, title):
        made.append(Criterion(number, title))
        return made[-1]

    request.node._criteria = made
    return make


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    crits = getattr(item, "_criteria", None)
    if report.when != "call" or not crits:
        return
    lines = item.config.stash.setdefault(_LINES, [])
    for c in crits:
        status = "PASS" if report.passed and c.ok else "FAIL"
        lines.append((c.number, f"{status}  criterion {c.number:>2}: {c.title} "
                                f"({time.perf_counter() - c.start:.1f} s)"))
        for label, ok in c.items:
            lines.append((c.number, f"        {'ok ' if ok else 'BAD'} {label}"))


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, text in sorted(lines, key=lambda t: t[0]):
        terminalreporter.write_line(text)
