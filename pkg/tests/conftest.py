from __future__ import annotations

import functools

import pytest

from sparseconv.stability import sharp_alpha_exhaustive


@functools.lru_cache(maxsize=None)
def _exhaustive(s: int, f: int, n: int):
    return sharp_alpha_exhaustive(s, f, n)


@pytest.fixture(scope="session")
def exhaustive():
    """Memoized exhaustive sharp alpha, shared across test modules."""
    return _exhaustive


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
