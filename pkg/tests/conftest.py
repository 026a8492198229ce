import contextlib

import pytest

from altcsit.channel import CsitPattern
from altcsit.scheme import TABLE1, mirror_pattern

TABLE1_PATTERNS = [CsitPattern.parse(p) for p in TABLE1]
ALL_PATTERNS = TABLE1_PATTERNS + [mirror_pattern(p) for p in TABLE1_PATTERNS]
EXEMPLARS = [CsitPattern.parse(p) for p in ("DD,ND,PN,NN", "ND,ND,DN,PN", "ND,DN,PD,NN")]

_ACCEPTANCE = []


@contextlib.contextmanager
def criterion(label):
    """Record pass/fail of one acceptance criterion for the terminal summary."""
    try:
        yield
    except BaseException as exc:
        _ACCEPTANCE.append((label, False, f"{type(exc).__name__}: {exc}".splitlines()[0]))
        raise
    _ACCEPTANCE.append((label, True, ""))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, why in sorted(_ACCEPTANCE):
        line = f"{'PASS' if ok else 'FAIL'}  {label}"
        terminalreporter.write_line(line + (f"  ({why})" if why else ""))


@pytest.fixture(params=ALL_PATTERNS, ids=str)
def any_pattern(request):
    return request.param


@pytest.fixture(params=TABLE1_PATTERNS, ids=str)
def table_pattern(request):
    return request.param
