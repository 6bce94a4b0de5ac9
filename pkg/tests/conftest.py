from pathlib import Path

import pytest

from fraccite.citations import CitationWindow
from fraccite.metrics import read_impact_tsv

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"

W3 = CitationWindow(2005, 2007)
W5 = CitationWindow(2005, 2009)


@pytest.fixture(scope="session")
def departments():
    """Published aggregates for 27 departments: P, IC and FC in two windows."""
    return read_impact_tsv((DATA / "departments_2005.tsv").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def printed_ratios():
    """Two-decimal ratio columns exactly as printed alongside the aggregates."""
    lines = (DATA / "departments_2005.tsv").read_text(encoding="utf-8").splitlines()
    header = lines[0].split("\t")
    out = {}
    for line in lines[1:]:
        cells = line.split("\t")
        out[cells[0]] = {h: float(c) for h, c in zip(header[1:], cells[1:]) if "/" in h}
    return out


ALIASES = {"Dep Chinese Language & Literature": "Dep Chinese Languages"}


def unit_label(printed: str) -> str:
    """Map a label as printed in the ranking tables onto the fixture's unit label."""
    printed = printed.strip()
    return ALIASES.get(printed, printed.replace(" Engr", " Engn"))


def read_published_ranking(name: str) -> list[tuple[str, int, str, int]]:
    """(first unit, rank, second unit, signed change) rows of a printed ranking table."""
    rows = []
    for line in (DATA / name).read_text(encoding="utf-8").splitlines()[1:]:
        first, rank, second, change = line.split("\t")
        rows.append((unit_label(first), int(rank), unit_label(second), int(change) if change else 0))
    return rows


_acceptance_key = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_acceptance_key] = []


@pytest.fixture
def acceptance(request):
    """record(criterion, ok, detail): one PASS/FAIL line per acceptance criterion."""
    lines = request.config.stash[_acceptance_key]

    def record(criterion: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  criterion {criterion}: {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_acceptance_key, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
