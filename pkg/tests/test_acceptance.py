"""One test per acceptance criterion.

Each criterion runs its verification groups, checks every residual against
its pinned tolerance and the runtime budget, and records a single PASS/FAIL
line. Run directly with ``python3 tests/test_acceptance.py`` for the lines
alone.
"""
import time

import pytest

from fresneltomo.verify import GROUPS

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # pragma: no cover
    ACCEPTANCE_LINES = []

# criterion -> (title, groups, runtime budget in seconds or None)
CRITERIA = {
    1: ("symplectic bijection and group law", ["symplectic"], 1.0),
    2: ("kernel equivalence and smeared group law", ["kernels"], 60.0),
    3: ("Fock-space operator suite at N=24", ["fock"], 120.0),
    4: ("eigen-equations, both representations", ["eigen"], None),
    5: ("state-vector vs Radon-of-Wigner tomograms", ["central"], 300.0),
    6: ("tomogram completeness and Wigner normalization", ["normalization", "wigner"], None),
    7: ("Fourier-slice relation", ["fourier"], None),
    8: ("filtered back-projection reconstruction", ["reconstruction"], 600.0),
    9: ("optics grammar fixtures and additivity", ["parser"], None),
}


def evaluate(k: int):
    title, groups, budget = CRITERIA[k]
    start = time.perf_counter()
    checks = [c for g in groups for c in GROUPS[g]()]
    elapsed = time.perf_counter() - start
    failed = [c for c in checks if not c.passed]
    slow = budget is not None and elapsed > budget
    ok = not failed and not slow
    worst = max((c.residual / c.tolerance if c.tolerance else 0.0) for c in checks)
    budget_txt = f" of {budget:g}s budget" if budget is not None else ""
    line = (f"{'PASS' if ok else 'FAIL'}  criterion {k}: {title}: {len(checks) - len(failed)}/{len(checks)} checks, "
            f"worst residual/tol {worst:.2e}, {elapsed:.1f}s{budget_txt}")
    details = [c.line() for c in failed]
    if slow:
        details.append(f"runtime {elapsed:.1f}s exceeds {budget:g}s")
    return ok, line, details


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k):
    ok, line, details = evaluate(k)
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, "\n".join(details)


if __name__ == "__main__":
    import sys

    results = [evaluate(k) for k in sorted(CRITERIA)]
    for ok, line, details in results:
        print(line, flush=True)
        for d in details:
            print("    " + d)
    sys.exit(0 if all(r[0] for r in results) else 1)
