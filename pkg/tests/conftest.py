import os
from functools import lru_cache

import pytest

from sklift.curves import read_curves_tsv
from sklift.modsym import ModularSymbolSpace, newform_slot
from sklift.shintani import ShintaniTable

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "fixtures")

# level -> (N, p) for the two Np fixtures
SPLITS = {15: (3, 5), 21: (3, 7)}


@lru_cache(maxsize=None)
def curves() -> dict:
    return {row["conductor"]: row for row in read_curves_tsv(os.path.join(FIXTURE_DIR, "curves.tsv"))}


@lru_cache(maxsize=None)
def space(M: int) -> ModularSymbolSpace:
    return ModularSymbolSpace(M)


@lru_cache(maxsize=None)
def slot(M: int):
    """The newform of level M matching the curve in curves.tsv."""
    return newform_slot(space(M), curves()[M]["coeffs"])


@lru_cache(maxsize=None)
def table(M: int) -> ShintaniTable:
    p = SPLITS[M][1] if M in SPLITS else M
    return ShintaniTable(slot(M), p)


@pytest.fixture(params=[15, 21], ids=["level15", "level21"])
def level(request):
    return request.param


# acceptance criteria report one line each at the end of the run
ACCEPTANCE_LINES: dict = {}


def record_acceptance(key, ok: bool, elapsed: float, limit: float, detail: str) -> str:
    status = "PASS" if ok and elapsed < limit else "FAIL"
    line = f"criterion {key:<3} {status}  {elapsed:7.1f}s / {limit:.0f}s  {detail}"
    ACCEPTANCE_LINES[key] = line
    print(line)
    return status


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        order = sorted(ACCEPTANCE_LINES, key=lambda k: (int("".join(c for c in k if c.isdigit())), k))
        for key in order:
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
