"""Exit criteria of the build, one test per criterion.

Each test runs the corresponding acceptance function (also reachable via
`east accept`) and prints its one-line summary, so `pytest -s
tests/test_acceptance.py` doubles as the acceptance report.  The flow
recursion's literal per-piece energy bounds at q = 0.25 are kept as a
strict xfail: they violate the size precondition |Lambda_x| <= 1/q of the
bound and provably fail there (see the decisions ledger); if they ever
start passing, the xfail turns the suite red so the exception gets
re-reviewed.
"""

import math

import pytest

from eastlab import acceptance
from eastlab.lattice import Box, ModelParams


def _run(number):
    res = acceptance.run_all(numbers=[number], stream=None)[0]
    print(acceptance.format_result(res))
    return res


@pytest.mark.parametrize("number", sorted(acceptance.NUMBERED))
def test_criterion(number):
    res = _run(number)
    assert res.passed, res.detail


@pytest.mark.xfail(
    strict=True,
    reason="per-piece energy bounds require |Lambda_x| <= 1/q; at q = 0.25 the "
    "instance has 9 sites > 4 and the exact prefactors (powers of 1/p) "
    "exceed e / (e/q); documented in the decisions ledger",
)
def test_flow_energy_bounds_literal_at_quarter():
    from eastlab.renorm import flow_recursion

    rep = flow_recursion((3, 3), Box((2, 2), (2, 2)), ModelParams(0.25))
    e = math.e
    for p in rep.pieces:
        assert p.energy_mimic <= e * p.resistance_y
        assert p.energy_reversal <= (e / 0.25) * p.resistance_y
        assert p.energy_carry <= (e / 0.25) * p.resistance_shifted
