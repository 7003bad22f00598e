import dataclasses

import pytest

from spinspin.bodies import patroclus_menoetius

_VERDICTS: list[str] = []


@pytest.fixture
def pm():
    return patroclus_menoetius()


@pytest.fixture
def spherical(pm):
    return dataclasses.replace(pm, d1=0.0, d2=0.0, q1=0.0, q2=0.0)


@pytest.fixture
def verdict(capsys):
    """Record and print one PASS/FAIL line for an acceptance criterion."""
    def record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        _VERDICTS.append(line)
        with capsys.disabled():
            print(f"\n{line}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
