"""The fourteen primary acceptance criteria, each at its stated tolerance.

Every test prints one PASS/FAIL line (collected into the terminal summary)
and asserts on the suite result.
"""
import time

import pytest

from fracspde import verify

from .conftest import ACCEPTANCE_LINES

CRITERIA = [
    (1, "heat-kernel reduction", "heat", 10.0),
    (2, "Cauchy reduction", "cauchy", None),
    (3, "Fourier roundtrip", "fourier-roundtrip", 120.0),
    (4, "mass identities", "masses", None),
    (5, "nonnegativity scans", "nonneg-scan", None),
    (6, "RL-derivative link", "rl-link", None),
    (7, "envelope sup and resonance slopes", "envelope", None),
    (8, "Mittag-Leffler identities and routes", "mittag-leffler", None),
    (9, "Dalang reductions", "dalang", None),
    (10, "existence certificate", "certificate", None),
    (11, "moment exponents", "exponents", None),
    (12, "chaos/Mittag-Leffler identity and flag", "chaos", None),
    (13, "simplex integral vs Monte Carlo", "simplex", None),
    (14, "convolution theorem", "convolution", None),
]


@pytest.mark.parametrize("number,title,suite,budget", CRITERIA,
                         ids=[f"criterion-{c[0]:02d}-{c[2]}" for c in CRITERIA])
def test_criterion(number, title, suite, budget):
    t0 = time.perf_counter()
    rep = verify.verify_suite(suite)
    elapsed = time.perf_counter() - t0
    in_budget = budget is None or elapsed < budget
    ok = rep.passed and in_budget
    worst = max(rep.checks, key=lambda c: (not c.passed, c.measured - c.tolerance))
    line = (f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} "
            f"({len(rep.checks)} check{'' if len(rep.checks) == 1 else 's'}, {elapsed:.1f} s"
            f"{'' if budget is None else f' of {budget:.0f} s budget'}; "
            f"tightest: {worst.name} = {worst.measured:.3g} vs {worst.tolerance:.3g})")
    ACCEPTANCE_LINES.append(line)
    print(line)
    failed = [c for c in rep.checks if not c.passed]
    assert not failed, failed
    assert in_budget, f"runtime {elapsed:.1f} s exceeds {budget} s"
