from __future__ import annotations

import functools
import warnings

import pytest

from cohesilab import REFERENCE_BAR, model_functions
from cohesilab.response import BarFitWarning


@functools.lru_cache(maxsize=None)
def functions(kind: str, ell: float = REFERENCE_BAR.ell):
    """Engineering functions shared across tests; building the inverse tables is not free."""
    return model_functions(kind, REFERENCE_BAR.with_ell(ell))


@pytest.fixture
def fns():
    return functions


@pytest.fixture(autouse=True)
def _quiet_bar_fit():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BarFitWarning)
        yield


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, title: str, ok: bool, detail: str) -> bool:
    line = f"{'PASS' if ok else 'FAIL'}  criterion {number:2d} {title}: {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
