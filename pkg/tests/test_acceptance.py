"""Runs every acceptance criterion at its stated tolerance and time budget.

Each criterion prints one PASS/FAIL line. Simulation sizes follow
``STIGMA_OLG_ACCEPTANCE=quick|full`` (default full).
"""

import os

import pytest
from conftest import ACCEPTANCE_LINES

from stigma_olg import acceptance
from stigma_olg import equilibrium as eq

QUICK = os.environ.get("STIGMA_OLG_ACCEPTANCE", "full") == "quick"


@pytest.fixture(scope="module")
def results():
    out = {r.number: r for r in acceptance.run_all(quick=QUICK)}
    print()
    print(acceptance.format_table(sorted(out.values(), key=lambda r: r.number)))
    return out


@pytest.mark.parametrize("number", range(1, 12))
def test_criterion(results, number):
    r = results[number]
    line = f"{'PASS' if r.passed else 'FAIL'} criterion {r.number}: {r.name} ({r.seconds:.2f}s) {r.detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert r.passed, r.detail


def test_oracle_check_catches_sign_flip(monkeypatch):
    original = eq.interior_formula
    monkeypatch.setattr(eq, "interior_formula", lambda pi, b, alpha=0.0: -original(pi, b, alpha))
    ok, detail = acceptance.oracle_equivalence()
    assert not ok, detail
