from functools import lru_cache

import pytest

from willmore_lab.geometry import curvature, make_immersion
from willmore_lab.grid import DiskGrid


@lru_cache(maxsize=None)
def grid(n: int) -> DiskGrid:
    return DiskGrid(n)


@lru_cache(maxsize=None)
def surface(name: str, n: int, **params):
    imm = make_immersion(name, grid(n), params)
    return imm, curvature(imm)


@pytest.fixture
def surf():
    return surface


ACCEPTANCE_LINES: list[str] = []


def record(number: int, title: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d} {title}" + (f": {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
