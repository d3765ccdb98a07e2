"""Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""

import pytest

_RESULTS: dict[int, tuple[str, bool, str]] = {}


class CriterionLog:
    def record(self, number: int, name: str, passed: bool, detail: str = "") -> bool:
        ok, prev = bool(passed), _RESULTS.get(number)
        if prev is not None:
            ok = ok and prev[1]
            detail = f"{prev[2]}; {detail}" if prev[2] else detail
        _RESULTS[number] = (name, ok, detail)
        line = format_line(number, name, ok, detail)
        print(line)
        return ok


def format_line(number: int, name: str, passed: bool, detail: str) -> str:
    status = "PASS" if passed else "FAIL"
    return f"criterion {number:>2} {status} {name}" + (f" ({detail})" if detail else "")


@pytest.fixture(scope="session")
def criteria() -> CriterionLog:
    return CriterionLog()


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        name, ok, detail = _RESULTS[number]
        terminalreporter.write_line(format_line(number, name, ok, detail))
