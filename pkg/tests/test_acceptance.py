"""One test per acceptance criterion; each prints a PASS/FAIL line with its
measured values (also collected into the terminal summary)."""

import pytest

from mol.acceptance import CRITERIA


@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda c: f"criterion{c.number}-{c.key}")
def test_criterion(criterion, acceptance_log):
    outcome = criterion.run()
    line = outcome.line()
    print(line)
    acceptance_log.append(line)
    assert outcome.passed, line
