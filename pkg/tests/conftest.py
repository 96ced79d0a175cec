import contextlib
import os
import time

# internal consistency asserts (Smith transforms, flip terminality) on for every test
os.environ.setdefault("TORIC_SARKISOV_CHECKS", "1")

import pytest  # noqa: E402
from hypothesis import HealthCheck, settings  # noqa: E402

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much, HealthCheck.data_too_large],
)
settings.load_profile("default")

_LINES: list[str] = []


class Criterion:
    """Records one PASS/FAIL line; failures still raise."""

    def __init__(self, label: str, limit_s: float | None = None):
        self.label = label
        self.limit_s = limit_s
        self.notes: list[str] = []

    def note(self, text: str) -> None:
        self.notes.append(text)

    @contextlib.contextmanager
    def run(self):
        t = time.perf_counter()
        try:
            yield self
        except BaseException as exc:
            msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
            _LINES.append(f"FAIL  {self.label}: {msg[:160]}")
            raise
        took = time.perf_counter() - t
        if self.limit_s is not None and took > self.limit_s:
            _LINES.append(f"FAIL  {self.label}: {took:.1f}s exceeds {self.limit_s:.0f}s")
            pytest.fail(f"{self.label} took {took:.1f}s, limit {self.limit_s}s")
        extra = "; ".join(self.notes)
        budget = f" ({took:.1f}s" + (f" of {self.limit_s:.0f}s)" if self.limit_s else ")")
        _LINES.append(f"PASS  {self.label}{budget}" + (f" [{extra}]" if extra else ""))


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in _LINES:
        terminalreporter.write_line(line)
