"""Acceptance battery: one test per verification criterion.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
pass/fail lines with measured values and timings.  The same criteria are
exposed on the command line as `sl2cayley verify <suite>` / `verify all`.
"""

import pytest

from sl2cayley.verify import CRITERIA, Battery, criterion_determinism


@pytest.fixture(scope="module")
def battery():
    return Battery()


@pytest.mark.parametrize("fn", [fn for _, fn in CRITERIA],
                         ids=[name for name, _ in CRITERIA])
def test_criterion(battery, fn):
    res = fn(battery, threads=1)
    print("\n" + res.line())
    assert res.passed, res.detail


def test_criterion_determinism(battery):
    res = criterion_determinism(battery, threads_a=1, threads_b=8)
    print("\n" + res.line())
    assert res.passed, res.detail
