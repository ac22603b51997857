from __future__ import annotations

import pytest

_LINES: list[tuple[int, bool, str]] = []


@pytest.fixture
def record_criterion():
    """Call ``record(n, ok, detail)`` once per acceptance criterion."""

    def record(n: int, ok: bool, detail: str) -> None:
        _LINES.append((n, ok, detail))
        print(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for n, ok, detail in sorted(_LINES):
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
