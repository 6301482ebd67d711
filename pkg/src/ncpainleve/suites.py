"""Verification suites shared by the command line and the acceptance tests.

Each suite returns a SuiteReport: a list of named checks, each with a measured
value, a threshold and a comparison. A tolerance override replaces every
floating-point threshold (integer and exact checks keep theirs).
"""

import random
import time
from dataclasses import dataclass, field

import numpy as np

from . import weyl
from .dynamics import (
    apply_alpha,
    apply_element,
    apply_swap,
    equivariance_residual,
    orbit,
    random_curve,
    random_state,
    s0_move,
    supporting_curve,
)
from .elliptic import ProjPoint, proj_distance, random_point, tau_pow
from .plane_curves import auxiliary_degree
from .plane_curves import evaluate as curve_value


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    kind: str = "max"  # "max": value <= threshold; "min": value >= threshold; "eq": equal

    @property
    def passed(self):
        if self.kind == "max":
            return bool(self.value <= self.threshold)
        if self.kind == "min":
            return bool(self.value >= self.threshold)
        return self.value == self.threshold

    def to_json(self):
        val = self.value
        if isinstance(val, (np.floating, np.integer)):
            val = val.item()
        return {"name": self.name, "value": val, "threshold": self.threshold, "kind": self.kind,
                "passed": self.passed}


@dataclass
class SuiteReport:
    suite: str
    checks: list = field(default_factory=list)
    info: dict = field(default_factory=dict)
    tol: float = None

    def add(self, name, value, threshold, kind="max"):
        if self.tol is not None and kind != "eq" and isinstance(threshold, float):
            threshold = self.tol
        self.checks.append(Check(name, value, threshold, kind))

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def to_json(self):
        return {"suite": self.suite, "passed": self.passed, "checks": [c.to_json() for c in self.checks],
                "info": self.info}


def _timed(report, start):
    report.info["seconds"] = round(time.perf_counter() - start, 3)
    return report


def weyl_relations(seed=0, tol=None):
    """Coxeter relations, the rotation, and g^n for n = 6 and 9 (integer exact)."""
    start = time.perf_counter()
    rep = SuiteReport("weyl-relations", tol=tol)
    for n in (6, 9):
        fails = weyl.verify_relations(n, trials=50, seed=seed)
        rep.add("relation failures n=%d" % n, len(fails), 0, "eq")
        rep.info["failures n=%d" % n] = fails
        rng = random.Random(seed)
        bad = 0
        for _ in range(50):
            tokens = [rng.choice(["s%d" % k for k in range(n)] + ["a(1,2)", "a(3,%d)" % n]) for _ in range(6)]
            w = weyl.word_element(tokens, n)
            if weyl.word_element(weyl.decompose_w0(w), n) != w:
                bad += 1
        rep.add("decomposition mismatches n=%d" % n, bad, 0, "eq")
    return _timed(rep, start)


def _states(count, seed, d=3, **curve_kw):
    out = []
    for k in range(count):
        E = random_curve(seed * 1000 + k, **curve_kw)
        out.append(random_state(E, d, seed=seed * 1000 + k))
    return out


def dynamics_relations(seed=0, count=20, tol=None):
    """Coxeter relations, alpha inverses and lattice commutativity as maps."""
    start = time.perf_counter()
    rep = SuiteReport("dynamics-relations", tol=tol)
    worst_cox = worst_inv = worst_comm = 0.0
    for st in _states(count, seed):
        n = st.n

        def s(k, x):
            return s0_move(x) if k == 0 else apply_swap(k, x)

        for k in (0, 1, n - 1):
            worst_cox = max(worst_cox, st.distance(s(k, s(k, st))))
        for k in (0, n - 1):
            x = st
            for _ in range(3):
                x = s(k, s((k + 1) % n, x))
            worst_cox = max(worst_cox, st.distance(x))
        back, _ = apply_alpha(1, 2, apply_alpha(2, 1, st)[0])
        worst_inv = max(worst_inv, st.distance(back))
        a = apply_alpha(3, 4, apply_alpha(1, 2, st)[0])[0]
        b = apply_alpha(1, 2, apply_alpha(3, 4, st)[0])[0]
        worst_comm = max(worst_comm, a.distance(b))
    rep.add("coxeter relations as maps", worst_cox, 1e-7)
    rep.add("alpha(1,2) alpha(2,1) = id", worst_inv, 1e-6)
    rep.add("lattice commutativity", worst_comm, 1e-6)
    return _timed(rep, start)


def equivariance(seed=0, count=10, orbit_steps=1000, tol=None):
    """P-side of composite moves vs the Weyl action, and the constraint along an orbit."""
    start = time.perf_counter()
    rep = SuiteReport("equivariance", tol=tol)
    rng = random.Random(seed)
    worst = 0.0
    perm_bad = 0
    for st in _states(count, seed + 17):
        n = st.n
        tokens = [rng.choice(["s%d" % k for k in range(n)] + ["a(1,2)", "a(2,5)", "a(7,3)"]) for _ in range(5)]
        w = weyl.word_element(tokens, n)
        worst = max(worst, equivariance_residual(w, st))
        moved = apply_element(weyl.WeylElement(n, w.perm, (0,) * n), st)
        expected = weyl.act_on_params(weyl.WeylElement(n, w.perm, (0,) * n), st.P, st.E)
        perm_bad += sum(a != b for a, b in zip(moved.P, expected))
    rep.add("permutation structure mismatches", perm_bad, 0, "eq")
    rep.add("P-side equivariance", worst, 1e-9)
    st = _states(1, seed + 29)[0]
    traj = orbit(st, "a(1,2)", orbit_steps)
    rep.add("orbit failures", 0 if traj.failure is None else 1, 0, "eq")
    rep.add("constraint residual over orbit", max(r["constraint_residual"] for r in traj.records), 1e-6)
    rep.info["orbit_steps"] = len(traj.records) - 1
    return _timed(rep, start)


def oracle_equivalence(seed=0, count=20, tol=None):
    """Chord fast path vs residual path, and auxiliary degree m vs m + 1."""
    start = time.perf_counter()
    rep = SuiteReport("oracle-equivalence", tol=tol)
    rng = random.Random(seed)
    w1 = w2 = 0.0
    m = auxiliary_degree(3)
    for st in _states(count, seed + 41):
        i, j = rng.sample(range(1, st.n + 1), 2)
        a, _ = apply_alpha(i, j, st, method="chord")
        b, _ = apply_alpha(i, j, st, method="residual", aux_degree=m)
        c, _ = apply_alpha(i, j, st, method="residual", aux_degree=m + 1)
        w1 = max(w1, a.distance(b))
        w2 = max(w2, b.distance(c))
    rep.add("chord vs residual", w1, 1e-6)
    rep.add("aux degree m vs m+1", w2, 1e-6)
    return _timed(rep, start)


def commutative_limit(seed=0, steps=100, tol=None):
    """With t = O the supporting cubic is invariant along an orbit."""
    start = time.perf_counter()
    rep = SuiteReport("commutative-limit", tol=tol)
    st = _states(1, seed + 53, commutative=True)[0]
    C0 = supporting_curve(st)
    traj = orbit(st, "a(1,2) s1 a(3,4)", steps)
    rep.add("orbit failures", 0 if traj.failure is None else 1, 0, "eq")
    rep.add("supporting cubic drift", max(C0.distance(supporting_curve(s)) for s in traj.states), 1e-7)
    return _timed(rep, start)


def torsion_limit(seed=0, steps=100, tol=None):
    """With 3t = O lattice moves fix P and D stays on one cubic."""
    start = time.perf_counter()
    rep = SuiteReport("torsion-limit", tol=tol)
    st = _states(1, seed + 67, torsion=True)[0]
    C0 = supporting_curve(st)
    traj = orbit(st, "a(1,2) a(3,5)", steps)
    rep.add("orbit failures", 0 if traj.failure is None else 1, 0, "eq")
    drift = max(max(proj_distance(a, b) for a, b in zip(s.P, st.P)) for s in traj.states)
    rep.add("P drift under lattice moves", drift, 1e-12)
    resid = max(max(abs(curve_value(C0, p)) for p in s.D) for s in traj.states)
    rep.add("D off the initial cubic", resid, 1e-6)
    return _timed(rep, start)


def sklyanin_calibration(seed=1, samples=20, tol=None):
    """Dimensions, translation calibration, centrality, Theta on E and the syzygy shift."""
    from .sklyanin import SklyaninAlgebra, random_params

    start = time.perf_counter()
    rep = SuiteReport("sklyanin-calibration", tol=tol)
    A = SklyaninAlgebra(*random_params(seed))
    rep.add("dims (1..4)", [A.dim(n) for n in range(1, 5)], [3, 6, 10, 15], "eq")
    data = A.point_scheme()
    rep.add("kernel map translation residual", data.report["translation_residual"], 1e-7)
    rep.add("relations under twisted evaluation",
            data.report["relation_residuals"][data.report["orientation"]], 1e-7)
    theta, kdim = A.central_element()
    rep.add("central kernel dimension", kdim, 1, "eq")
    comm = max((theta * A.gen(i) - A.gen(i) * theta).norm() for i in (1, 2, 3))
    rep.add("central commutators", comm, 1e-9)
    E = A.curve
    rng = np.random.default_rng(seed)
    pts = [random_point(E, int(rng.integers(2**31))) for _ in range(samples)]
    rep.add("Theta on E", max(abs(A.restrict_to_E(theta, p)) for p in pts), 1e-9)
    rep.add("syzygy zero vs tau^-3 p", max(proj_distance(A.syzygy(p)[2], tau_pow(E, p, -3)) for p in pts), 1e-7)
    rep.info["orientation"] = data.report["orientation"]
    return _timed(rep, start)


def _sheaf_setup(seed):
    from .sheaf import random_blowup_params
    from .sklyanin import SklyaninAlgebra, random_params

    A = SklyaninAlgebra(*random_params(seed))
    return A, random_blowup_params(A, seed=seed + 2)


def sheaf_trichotomy(seed=1, tol=None):
    """Kernel dimensions in the three cases, tangent and moduli dimensions, det divisor."""
    from .sheaf import (
        FamilyHandle,
        datum_from_plane_point,
        fiber_case,
        shift_down_at_first,
        tangent_dimension,
        verify_base_vanishing,
    )

    start = time.perf_counter()
    rep = SuiteReport("sheaf-trichotomy", tol=tol)
    A, params = _sheaf_setup(seed)
    E = A.curve
    rng = np.random.default_rng(seed + 101)
    x_generic = ProjPoint(tuple(rng.standard_normal(3) + 1j * rng.standard_normal(3)))
    x_forced = tau_pow(E, random_point(E, int(rng.integers(2**31))), 1)
    x_fiber = tau_pow(E, params.points[0], 1)
    d_gen, r_gen = datum_from_plane_point(x_generic, params)
    _, r_forced = datum_from_plane_point(x_forced, params)
    fam, r_fiber = datum_from_plane_point(x_fiber, params)
    rep.add("generic kernels (det map, constrained)",
            [r_gen["det_map_kernel"], r_gen["constrained_kernel"]], [3, 4], "eq")
    rep.add("forced-zero kernels", [r_forced["det_map_kernel"], r_forced["constrained_kernel"]], [4, 4], "eq")
    rep.add("fiber kernels", [r_fiber["det_map_kernel"], r_fiber["constrained_kernel"]], [4, 5], "eq")
    rep.add("fiber returns a family", isinstance(fam, FamilyHandle), True, "eq")
    member = fam.member(0.3, 1.0)
    rep.add("fiber family base vanishing", verify_base_vanishing(member), 1e-7)
    fc = fiber_case(member)
    rep.add("fiber cubic relation on its divisor", max(fc["expected_divisor_values"]), 1e-7)
    tdim, trep = tangent_dimension(d_gen)
    rep.add("tangent dimension", tdim, 2, "eq")
    rep.add("trivial deformation rank", trep["trivial_rank"], 8, "eq")
    rep.add("moduli dimension (d^2 + 1)", trep["moduli_dimension"], 10, "eq")
    rep.add("generic base vanishing", verify_base_vanishing(d_gen), 1e-7)
    L, _ = shift_down_at_first(d_gen)
    expected = [tau_pow(E, params.points[0], -3)] + list(params.points[1:])
    vals = []
    for q in expected:
        M = L.evaluate(A, q)
        vals.append(abs(np.linalg.det(M)) / np.prod(np.linalg.norm(M, axis=1)))
    rep.add("det divisor at tau^-3 p1, p2..p9", max(vals), 1e-7)
    return _timed(rep, start)


def sheaf_cross_oracle(seed=1, count=10, tol=None):
    """hecke_s0 on sheaf data vs the plane-curve reflection s_0."""
    from .sheaf import datum_from_plane_point, dynamics_state, hecke_s0, plane_point_of

    start = time.perf_counter()
    rep = SuiteReport("sheaf-cross-oracle", tol=tol)
    A, params = _sheaf_setup(seed)
    rng = np.random.default_rng(seed + 5)
    worst = worst_rt = 0.0
    for _ in range(count):
        x = ProjPoint(tuple(rng.standard_normal(3) + 1j * rng.standard_normal(3)))
        datum, _ = datum_from_plane_point(x, params)
        new, _ = hecke_s0(datum)
        moved = s0_move(dynamics_state(datum))
        worst = max(worst, proj_distance(moved.D[0], plane_point_of(new)))
        back, _ = hecke_s0(new)
        worst_rt = max(worst_rt, proj_distance(plane_point_of(back), x))
    rep.add("hecke_s0 vs s0_move", worst, 1e-5)
    rep.add("hecke_s0 twice", worst_rt, 1e-5)
    return _timed(rep, start)


def poisson(seed=1, pairs=10, tol=None):
    """Skewness, slack and splitting independence, invariance, quadrature, symplecticity."""
    from .poisson import (
        CommutativePencil,
        hecke_symplecticity_test,
        isotrivial_basis,
        isotriviality_certificate,
        pairing,
        support,
        transform,
        trivial_space,
    )
    from .sheaf import datum_from_plane_point, shift_down_at_first

    start = time.perf_counter()
    rep = SuiteReport("poisson", tol=tol)
    A, params = _sheaf_setup(seed)
    rng = np.random.default_rng(seed + 11)
    x = ProjPoint(tuple(rng.standard_normal(3) + 1j * rng.standard_normal(3)))
    datum, _ = datum_from_plane_point(x, params)
    L, _ = shift_down_at_first(datum)
    P = CommutativePencil(A, L)
    zeros = support(P)
    iso = isotrivial_basis(P, zeros)
    triv = trivial_space(P)
    rep.add("isotrivial dimension", iso.shape[1], 19, "eq")
    rep.add("trivial dimension", triv.shape[1], 17, "eq")

    def rv(B):
        return B @ (rng.standard_normal(B.shape[1]) + 1j * rng.standard_normal(B.shape[1]))

    skew = 0.0
    refine = 0.0
    scale = 0.0
    first = None
    for _ in range(pairs):
        a, b = P.from_vector(rv(iso)), P.from_vector(rv(iso))
        ab = pairing(P, a, b, zeros=zeros)
        ba = pairing(P, b, a, zeros=zeros)
        skew = max(skew, abs(ab.value + ba.value) / abs(ab.value))
        refine = max(refine, ab.refinement, ba.refinement)
        scale = max(scale, abs(ab.value))
        if first is None:
            first = (a, b, ab)
    rep.add("skew-symmetry (relative)", skew, 1e-6)
    rep.add("quadrature refinement change", refine, 1e-6)
    a, b, ab = first
    slack = pairing(P, a, b, zeros=zeros, slack_seed=5)
    rep.add("local splitting slack", abs(slack.value - ab.value) / abs(ab.value), 1e-8)
    t = P.from_vector(rv(triv))
    cert = isotriviality_certificate(P, t)
    rep.add("certificate residual", cert.residual, 1e-8)
    g = pairing(P, t, b, certificate=cert, zeros=zeros)
    cert_shift = type(cert)(cert.A + 0.7 * np.eye(3), cert.B + 0.7 * np.eye(3), cert.residual, cert.slack)
    g2 = pairing(P, t, b, certificate=cert_shift, zeros=zeros)
    loc = pairing(P, t, b, certificate=cert, zeros=zeros, local_at=(0,))
    rep.add("certificate slack (lambda I, lambda I)", abs(g2.value - g.value) / scale, 1e-8)
    rep.add("global vs local splitting at one point", abs(loc.value - g.value) / scale, 1e-8)
    rep.add("trivial deformation pairs to zero", abs(g.value) / scale, 1e-8)
    Pm = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    Qm = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    P2 = P.conjugate(Pm, Qm)
    gl = pairing(P2, transform(a, Pm, Qm), transform(b, Pm, Qm), zeros=zeros)
    rep.add("GL x GL invariance", abs(gl.value - ab.value) / abs(ab.value), 1e-7)
    sym = hecke_symplecticity_test(datum, step=1e-5)
    rep.add("hecke symplecticity discrepancy", sym["discrepancy"], 1e-3)
    ident = hecke_symplecticity_test(datum, step=1e-5, identity=True)
    rep.add("identity map discrepancy", ident["discrepancy"], 1e-8)
    neg = hecke_symplecticity_test(datum, step=1e-5, mismatch=True)
    rep.add("mismatched control flagged", neg["discrepancy"], 1e-2, "min")
    rep.info["pairing_example"] = [ab.value.real, ab.value.imag]
    return _timed(rep, start)


def ore_lemma(seed=0, count=25, tol=None):
    """Exact root shift s -> s - hbar on seeded instances."""
    from fractions import Fraction

    from .ore import OrePoly, hecke_verify, multiply, random_instance

    start = time.perf_counter()
    rep = SuiteReport("ore-lemma", tol=tol)
    bad = []
    for k in range(count):
        f, s, _ = random_instance(seed * 1000 + k)
        _, r = hecke_verify(f, s)
        if not r["ok"]:
            bad.append(k)
    rep.add("instances with wrong root multiset", len(bad), 0, "eq")
    h = Fraction(1, 3)
    X = OrePoly.x(h)
    _, r = hecke_verify(multiply(X - 1, X - 2), 1)
    rep.add("(x-1)(x-2), s=1, hbar=1/3", r["roots_after"], [["2", 1], ["2/3", 1]], "eq")
    _, r = hecke_verify(multiply(X - 1, X - 2), 1, chain=[Fraction(2, 3)])
    rep.add("chain s, s - hbar", r["roots_after"], [["1/3", 1], ["2", 1]], "eq")
    rep.add("under 5 seconds", time.perf_counter() - start < 5.0, True, "eq")
    return _timed(rep, start)


SUITES = {
    "weyl-relations": weyl_relations,
    "dynamics-relations": dynamics_relations,
    "equivariance": equivariance,
    "oracle-equivalence": oracle_equivalence,
    "commutative-limit": commutative_limit,
    "torsion-limit": torsion_limit,
    "sklyanin-calibration": sklyanin_calibration,
    "sheaf-trichotomy": sheaf_trichotomy,
    "sheaf-cross-oracle": sheaf_cross_oracle,
    "poisson": poisson,
    "ore-lemma": ore_lemma,
}


def run_suite(name, seed=None, tol=None):
    """Run one suite by name with its default seed unless one is given.

    Raises:
        KeyError: unknown suite.
    """
    fn = SUITES[name]
    kw = {"tol": tol}
    if seed is not None:
        kw["seed"] = seed
    return fn(**kw)
