"""Acceptance criteria 1-10, each backed by one or more verification suites.

Every suite check carries its own threshold. LIMITS pins those thresholds to
the agreed tolerances so that loosening a suite cannot turn a criterion green.
"""

import time

import pytest

from ncpainleve.suites import run_suite

CRITERIA = {
    1: ("Weyl relations (exact)", ["weyl-relations"]),
    2: ("relations as maps", ["dynamics-relations"]),
    3: ("equivariance and sum constraint", ["equivariance"]),
    4: ("chord vs residual-intersection oracle", ["oracle-equivalence"]),
    5: ("commutative limit", ["commutative-limit"]),
    6: ("torsion limit", ["torsion-limit"]),
    7: ("Sklyanin calibration", ["sklyanin-calibration"]),
    8: ("sheaf track", ["sheaf-trichotomy", "sheaf-cross-oracle"]),
    9: ("Poisson pairing", ["poisson"]),
    10: ("Ore lemma (exact)", ["ore-lemma"]),
}

# upper bounds for every "max" check, by check name
LIMITS = {
    "coxeter relations as maps": 1e-7,
    "alpha(1,2) alpha(2,1) = id": 1e-6,
    "lattice commutativity": 1e-6,
    "P-side equivariance": 1e-9,
    "constraint residual over orbit": 1e-6,
    "chord vs residual": 1e-6,
    "aux degree m vs m+1": 1e-6,
    "supporting cubic drift": 1e-7,
    "P drift under lattice moves": 1e-12,
    "D off the initial cubic": 1e-6,
    "kernel map translation residual": 1e-7,
    "relations under twisted evaluation": 1e-7,
    "central commutators": 1e-9,
    "Theta on E": 1e-9,
    "syzygy zero vs tau^-3 p": 1e-7,
    "fiber family base vanishing": 1e-7,
    "fiber cubic relation on its divisor": 1e-7,
    "generic base vanishing": 1e-7,
    "det divisor at tau^-3 p1, p2..p9": 1e-7,
    "hecke_s0 vs s0_move": 1e-5,
    "hecke_s0 twice": 1e-5,
    "skew-symmetry (relative)": 1e-6,
    "quadrature refinement change": 1e-6,
    "local splitting slack": 1e-8,
    "certificate residual": 1e-8,
    "certificate slack (lambda I, lambda I)": 1e-8,
    "global vs local splitting at one point": 1e-8,
    "trivial deformation pairs to zero": 1e-8,
    "GL x GL invariance": 1e-7,
    "hecke symplecticity discrepancy": 1e-3,
    "identity map discrepancy": 1e-8,
}

# exact expectations that must not drift
EXACT = {
    "dims (1..4)": [3, 6, 10, 15],
    "generic kernels (det map, constrained)": [3, 4],
    "forced-zero kernels": [4, 4],
    "fiber kernels": [4, 5],
    "tangent dimension": 2,
    "moduli dimension (d^2 + 1)": 10,
    "(x-1)(x-2), s=1, hbar=1/3": [["2", 1], ["2/3", 1]],
    "under 5 seconds": True,
}

RESULTS = {}
TIMINGS = {}


def summary_lines():
    lines = []
    for k, (title, _) in CRITERIA.items():
        status = RESULTS.get(k)
        label = "NOT RUN" if status is None else ("PASS" if status else "FAIL")
        lines.append("criterion %2d %-40s %s" % (k, title, label))
    if TIMINGS:
        lines.append("suite time total %.1f s" % sum(TIMINGS.values()))
    return lines


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    RESULTS[number] = False
    failed = []
    for name in CRITERIA[number][1]:
        start = time.perf_counter()
        rep = run_suite(name)
        TIMINGS[name] = time.perf_counter() - start
        assert rep.checks, name
        for c in rep.checks:
            if c.kind == "max":
                assert c.name in LIMITS, "unpinned check %r" % c.name
                assert c.threshold <= LIMITS[c.name], c.name
            if c.name in EXACT:
                assert c.kind == "eq" and c.threshold == EXACT[c.name], c.name
            if not c.passed:
                failed.append("%s: %s (%s %s)" % (name, c.name, c.value, c.threshold))
    assert not failed, failed
    RESULTS[number] = True


def test_total_runtime():
    if len(TIMINGS) < 11:
        pytest.skip("needs the full criterion run")
    assert sum(TIMINGS.values()) < 60.0
