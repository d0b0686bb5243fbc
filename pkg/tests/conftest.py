import pytest

_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one pass/fail line; all lines are echoed in the terminal summary."""

    def _report(label: str, measured: float, tol: float, ok: bool | None = None) -> bool:
        ok = bool(measured < tol) if ok is None else bool(ok)
        line = f"{label}: {'PASS' if ok else 'FAIL'} (measured {measured:.3e}, tolerance {tol:.3e})"
        _LINES.append(line)
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
