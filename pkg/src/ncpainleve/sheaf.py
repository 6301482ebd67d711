"""Sheaf presentations on the blowup of the plane at nine points of E.

A datum is a module with generators F (degree 1) and G (degree 0) and two
relations v_k F + w_k G = 0, where v_k are linear and w_k quadratic elements
of the Sklyanin algebra. With the calibrated translation, the section of the
relations at a point p of E is

    det(p) = w_1(p) v_2(tau p) - w_2(p) v_1(tau p),

where w(p) is the twisted evaluation of a quadratic element (first letter at
tau p, second at p). Its nine zeros sum to -6t and a valid datum has them at
the base points p_1..p_9.

The reflection s_0 is realized in two steps: pass to the kernel of the map
onto the point module at p_1, then to the extension at p_9. Both steps are
constant row and column operations on a 3 x 3 matrix of linear elements.
"""

from dataclasses import dataclass, field

import numpy as np

from .elliptic import (
    ProjPoint,
    add,
    as_point,
    check_constraint,
    multiple_of_t,
    pic_sum,
    sub,
    proj_distance,
    random_point,
    solve_last_point,
    tau_pow,
)
from .sklyanin import GradedElement, SklyaninError, null_space

V_OFFSET = 1
SAMPLE_COUNT = 12


class SheafError(ValueError):
    """Base class for sheaf-track failures."""


class UnexpectedKernelDim(SheafError):
    """A kernel dimension outside the expected case analysis."""


class RankDrop(SheafError):
    """The matrix evaluated at the ninth point does not have a simple corank."""


class DegenerateColumn(SheafError):
    """The new syzygy column is degenerate (the determinant factors)."""


class FiberCase(SheafError):
    """The plane point lies on the fiber over p_1."""


@dataclass
class BlowupParams:
    """Nine base points on the point-scheme curve with sum -6t."""

    algebra: object = field(repr=False)
    points: tuple

    @property
    def E(self):
        return self.algebra.curve

    def constraint_residual(self):
        return check_constraint(self.E, self.points, 3, 1)

    def samples(self, seed=12345):
        """Fixed seeded sample points on E."""
        rng = np.random.default_rng(seed)
        return [random_point(self.E, int(rng.integers(2**31))) for _ in range(SAMPLE_COUNT)]


def random_blowup_params(algebra, seed=0, chi=1):
    """Seeded parameters: eight random points and the ninth from the constraint."""
    rng = np.random.default_rng(seed)
    E = algebra.curve
    P = [random_point(E, int(rng.integers(2**31))) for _ in range(8)]
    P.append(solve_last_point(E, P, 3, chi))
    return BlowupParams(algebra, tuple(P))


def genericity_check(params, K=4, tol=1e-7):
    """List violated genericity conditions.

    Checks tau^{3k} p_i != p_j for |k| <= K and i < j (and i = j, k != 0), and
    that no triple sums to the class of L_{3l+1} for |l| <= 2, where the
    sections of L_m are linear forms read at tau^m p, so the class has abel
    sum -3 m t.
    """
    E = params.E
    P = params.points
    out = []
    for i in range(9):
        for k in range(-K, K + 1):
            shifted = tau_pow(E, P[i], 3 * k)
            for j in range(i, 9):
                if j == i and k == 0:
                    continue
                if proj_distance(shifted, P[j]) < tol:
                    out.append("tau^%d p%d = p%d" % (3 * k, i + 1, j + 1))
    targets = {l: multiple_of_t(E, -3 * (3 * l + 1)) for l in range(-2, 3)}
    for i in range(9):
        for j in range(i + 1, 9):
            pij = add(E, P[i], P[j])
            for k in range(j + 1, 9):
                s = add(E, pij, P[k])
                for l, target in targets.items():
                    if proj_distance(s, target) < tol:
                        out.append("p%d + p%d + p%d represents L_%d" % (i + 1, j + 1, k + 1, 3 * l + 1))
    return out


@dataclass
class SheafDatum:
    """Relations v_k F + w_k G = 0 for k = 1, 2."""

    v: tuple
    w: tuple
    params: BlowupParams = field(repr=False)

    @property
    def algebra(self):
        return self.params.algebra

    def vector(self):
        """The 18 coordinates (v1, v2, w1, w2)."""
        return np.concatenate([self.v[0].coeffs, self.v[1].coeffs, self.w[0].coeffs, self.w[1].coeffs])

    @classmethod
    def from_vector(cls, vec, params):
        A = params.algebra
        vec = np.asarray(vec, dtype=complex)
        return cls((A.linear(vec[0:3]), A.linear(vec[3:6])),
                   (A.element(2, vec[6:12]), A.element(2, vec[12:18])), params)

    def to_json(self):
        return {"v": [x.to_json() for x in self.v], "w": [x.to_json() for x in self.w]}


@dataclass
class FamilyHandle:
    """Projective line of data sharing the plane point over a base point."""

    v: tuple
    w_basis: list
    params: BlowupParams = field(repr=False)
    base_index: int = 0

    def member(self, s, t=1.0):
        """Datum at the point [s : t] of the line."""
        (a1, a2), (b1, b2) = self.w_basis
        return SheafDatum(self.v, (s * a1 + t * b1, s * a2 + t * b2), self.params)


def lifts(params, p, n):
    """Canonical coordinates of tau^j p for j = 0..n-1."""
    return params.algebra.shifted_points(p, n)


def _wvals(A, w, pts):
    return A.restrict_coords(w, pts)


def det_section(datum, p, pts=None):
    """The section w1(p) v2(tau p) - w2(p) v1(tau p)."""
    A = datum.algebra
    if pts is None:
        pts = lifts(datum.params, p, 2)
    v1 = A.restrict_coords(datum.v[0], pts[V_OFFSET:V_OFFSET + 1])
    v2 = A.restrict_coords(datum.v[1], pts[V_OFFSET:V_OFFSET + 1])
    return _wvals(A, datum.w[0], pts) * v2 - _wvals(A, datum.w[1], pts) * v1


def verify_base_vanishing(datum):
    """Largest |det| over the base points, relative to the datum scale."""
    scale = datum.vector()
    scale = np.linalg.norm(scale[:6]) * np.linalg.norm(scale[6:])
    return max(abs(det_section(datum, p)) for p in datum.params.points) / scale


def _det_rows(A, v, pts):
    # coefficients of the linear map (w1, w2) -> det at a point
    basis_vals = np.array([A.restrict_coords(A.element(2, e), pts) for e in np.eye(6)])
    v1 = A.restrict_coords(v[0], pts[V_OFFSET:V_OFFSET + 1])
    v2 = A.restrict_coords(v[1], pts[V_OFFSET:V_OFFSET + 1])
    return np.concatenate([basis_vals * v2, -basis_vals * v1])


def trivial_pairs(A, v):
    """The pairs (v1 y, v2 y) for y = x1, x2, x3, as 12-vectors."""
    out = []
    for i in (1, 2, 3):
        y = A.gen(i)
        out.append(np.concatenate([(v[0] * y).coeffs, (v[1] * y).coeffs]))
    return np.array(out).T


def _complement(space, sub):
    # orthonormal basis of the part of span(space) orthogonal to span(sub)
    Q, _ = np.linalg.qr(sub)
    rest = space - Q @ (Q.conj().T @ space)
    U, s, _ = np.linalg.svd(rest, full_matrices=False)
    return U[:, s > 1e-6 * max(s.max(), 1e-300)]


def classify_plane_point(x, params, tol=1e-7):
    """Case of a plane point: 'generic', 'forced_zero' or ('fiber', i)."""
    E = params.E
    x = as_point(x)
    if E.residual(x) > tol:
        return "generic", None
    q = tau_pow(E, E.refine(x), -V_OFFSET)
    for i, p in enumerate(params.points):
        if proj_distance(q, p) < 1e-6:
            return "fiber", i
    return "forced_zero", None


def datum_from_plane_point(x, params):
    """Datum (or family of data) whose plane point is x.

    Returns:
        (SheafDatum or FamilyHandle, report) where report holds the case, the
        kernel dimension of the unconstrained determinant map (3 generic, 4
        otherwise) and of the nine vanishing conditions (4, 4, 5).

    Raises:
        UnexpectedKernelDim: dimensions outside the case analysis.
    """
    A = params.algebra
    v = A.forms_vanishing_at(x)
    case, idx = classify_plane_point(x, params)
    base_rows = np.array([_det_rows(A, v, lifts(params, p, 2)) for p in params.points])
    sample_rows = np.array([_det_rows(A, v, lifts(params, p, 2)) for p in params.samples()])
    base_ker = null_space(base_rows, tol=1e-9)
    det_ker = null_space(sample_rows, tol=1e-9)
    report = {"case": case, "det_map_kernel": det_ker.shape[1], "constrained_kernel": base_ker.shape[1]}
    expected = {"generic": (3, 4), "forced_zero": (4, 4), "fiber": (4, 5)}[case]
    if (report["det_map_kernel"], report["constrained_kernel"]) != expected:
        raise UnexpectedKernelDim("kernel dimensions %s for case %s" % (report, case))
    T = trivial_pairs(A, v)
    extra = _complement(base_ker, T)
    if case == "fiber":
        basis = [(A.element(2, e[:6]), A.element(2, e[6:])) for e in extra.T]
        report["base_index"] = idx + 1
        return FamilyHandle(v, basis, params, idx), report
    w = extra[:, 0]
    w = w / w[np.argmax(np.abs(w))] * np.abs(w).max()
    datum = SheafDatum(v, (A.element(2, w[:6]), A.element(2, w[6:])), params)
    return datum, report


def plane_point_of(datum):
    """The plane point annihilated by the span of v1, v2.

    Raises:
        SheafError: v1, v2 are dependent.
    """
    c = np.cross(datum.v[0].coeffs, datum.v[1].coeffs)
    if np.linalg.norm(c) < 1e-12 * datum.v[0].norm() * datum.v[1].norm():
        raise SheafError("v1 and v2 are dependent")
    return ProjPoint(tuple(c))


def is_stable(datum, tol=1e-8):
    """No y in A_1 with v_k y = w_k for both k."""
    A = datum.algebra
    T = trivial_pairs(A, datum.v)
    target = np.concatenate([datum.w[0].coeffs, datum.w[1].coeffs])
    y, *_ = np.linalg.lstsq(T, target, rcond=None)
    return np.linalg.norm(T @ y - target) > tol * np.linalg.norm(target)


def linearized_constraint(datum):
    """9 x 18 matrix of the first-order vanishing conditions at the base points."""
    A = datum.algebra
    rows = []
    for p in datum.params.points:
        pts = lifts(datum.params, p, 2)
        lin = np.array([A.restrict_coords(A.linear(e), pts[V_OFFSET:V_OFFSET + 1]) for e in np.eye(3)])
        quad = np.array([A.restrict_coords(A.element(2, e), pts) for e in np.eye(6)])
        w1 = A.restrict_coords(datum.w[0], pts)
        w2 = A.restrict_coords(datum.w[1], pts)
        v1 = A.restrict_coords(datum.v[0], pts[V_OFFSET:V_OFFSET + 1])
        v2 = A.restrict_coords(datum.v[1], pts[V_OFFSET:V_OFFSET + 1])
        rows.append(np.concatenate([-w2 * lin, w1 * lin, quad * v2, -quad * v1]))
    return np.array(rows)


def trivial_deformations(datum):
    """18 x 9 matrix spanning the deformations induced by changes of presentation."""
    A = datum.algebra
    v, w = datum.v, datum.w
    cols = []
    zero1, zero2 = np.zeros(3), np.zeros(6)
    for k in range(2):
        for l in range(2):
            dv = [zero1, zero1]
            dw = [zero2, zero2]
            dv[k] = v[l].coeffs
            dw[k] = w[l].coeffs
            cols.append(np.concatenate(dv + dw))
    cols.append(np.concatenate([v[0].coeffs, v[1].coeffs, zero2, zero2]))
    cols.append(np.concatenate([zero1, zero1, w[0].coeffs, w[1].coeffs]))
    for i in (1, 2, 3):
        y = A.gen(i)
        cols.append(np.concatenate([zero1, zero1, (v[0] * y).coeffs, (v[1] * y).coeffs]))
    return np.array(cols).T


def tangent_dimension(datum, tol=1e-8):
    """Dimension of the tangent space: 18 - 8 - rank of the linearized constraint.

    Returns:
        (dimension, report) with the constraint rank, the rank of the trivial
        subspace, and the moduli dimension 18 - trivial rank.

    Raises:
        SheafError: ranks outside the expected band.
    """
    J = linearized_constraint(datum)
    T = trivial_deformations(datum)
    s = np.linalg.svd(J, compute_uv=False)
    rank = int(np.sum(s > tol * s[0]))
    st = np.linalg.svd(T, compute_uv=False)
    trank = int(np.sum(st > tol * st[0]))
    report = {
        "constraint_rank": rank,
        "trivial_rank": trank,
        "moduli_dimension": 18 - trank,
        "trivial_in_kernel": float(np.linalg.norm(J @ T) / (np.linalg.norm(J) * np.linalg.norm(T))),
    }
    if trank != 8 or rank != 8:
        raise SheafError("unexpected ranks %s" % report)
    return 18 - trank - rank, report


def base_values(datum):
    """det at the nine base points (the constraint map)."""
    return np.array([det_section(datum, p) for p in datum.params.points])


def project_to_constraint(datum, steps=5, tol=1e-15):
    """Minimum-norm Newton correction onto the base-vanishing locus."""
    vec = datum.vector()
    params = datum.params
    for _ in range(steps):
        cur = SheafDatum.from_vector(vec, params)
        r = base_values(cur)
        if np.abs(r).max() < tol * np.linalg.norm(vec) ** 2:
            break
        J = linearized_constraint(cur)
        vec = vec - np.linalg.lstsq(J, r, rcond=None)[0]
    return SheafDatum.from_vector(vec, params)


def tangent_basis(datum, tol=1e-8):
    """Orthonormal basis (18 x 10) of first-order deformations preserving the base vanishing."""
    return null_space(linearized_constraint(datum), tol=tol)


@dataclass
class TwistedMatrix:
    """Matrix of linear elements; row i is evaluated at tau^{offset_i} p."""

    entries: list
    row_offsets: tuple

    def evaluate(self, params_or_alg, p=None, pts=None):
        alg = getattr(params_or_alg, "algebra", params_or_alg)
        if pts is None:
            pts = alg.shifted_points(p, max(self.row_offsets) + 2)
        n, m = len(self.entries), len(self.entries[0])
        out = np.zeros((n, m), dtype=complex)
        for i in range(n):
            o = self.row_offsets[i]
            for j in range(m):
                e = self.entries[i][j]
                out[i, j] = alg.restrict_coords(e, pts[o:o + e.degree])
        return out


def _normalize_to(vec, ref):
    # fix the scale of a kernel vector against a reference
    if ref is None:
        k = int(np.argmax(np.abs(vec)))
        return vec / vec[k] * np.abs(vec[k]) / np.linalg.norm(vec)
    return vec / np.vdot(ref, vec)


def _right_null(M):
    _, _, Vh = np.linalg.svd(M)
    return Vh[-1].conj()


def _right_syzygy(A, u1, u2):
    # (l1, l2) with u1 l1 + u2 l2 = 0 in A_2
    cols = []
    for u in (u1, u2):
        for i in (1, 2, 3):
            cols.append((u * A.gen(i)).coeffs)
    M = np.array(cols).T
    ker = null_space(M, tol=1e-8)
    if ker.shape[1] != 1:
        raise DegenerateColumn("right syzygy has dimension %d" % ker.shape[1])
    return ker[:, 0]


def shift_down_at_first(datum):
    """Step one: presentation of the kernel of the map onto the point module at p_1.

    Returns:
        (TwistedMatrix L, report). Rows of L are the generators l1 G, l2 G, F'
        (all of degree one); columns are the syzygy and the two relations.

    Raises:
        FiberCase: the map kills G (the plane point is over p_1).
    """
    A = datum.algebra
    params = datum.params
    p1 = params.points[0]
    pts = lifts(params, p1, 2)
    H = np.array([[A.restrict_coords(datum.v[k], pts[1:2]), A.restrict_coords(datum.w[k], pts)] for k in range(2)])
    cF, cG = _right_null(H)
    if abs(cG) < 1e-8 * np.hypot(abs(cF), abs(cG)):
        raise FiberCase("G maps to zero in the point module at p1")
    a0 = pts[0]
    x = A.linear((cF / cG) * a0.conj() / np.vdot(a0, a0))
    wt = [datum.w[k] + datum.v[k] * x for k in range(2)]
    l1, l2 = A.forms_vanishing_at(p1)
    cols = []
    for l in (l1, l2):
        for i in (1, 2, 3):
            cols.append((A.gen(i) * l).coeffs)
    M = np.array(cols).T
    r = []
    resid = 0.0
    for k in range(2):
        sol, *_ = np.linalg.lstsq(M, wt[k].coeffs, rcond=None)
        resid = max(resid, np.linalg.norm(M @ sol - wt[k].coeffs) / max(wt[k].norm(), 1e-300))
        r.append((A.linear(sol[:3]), A.linear(sol[3:])))
    if resid > 1e-8:
        raise SheafError("relations do not vanish at p1 after the generator change (%.3g)" % resid)
    u1, u2 = A.left_syzygy(l1, l2)
    z = A.zero(1)
    entries = [[u1, r[0][0], r[1][0]], [u2, r[0][1], r[1][1]], [z, datum.v[0], datum.v[1]]]
    L = TwistedMatrix(entries, (1, 1, 1))
    return L, {"hom": (complex(cF), complex(cG)), "split_residual": float(resid)}


def _complete_rows(r3, ref=None):
    # two rows completing r3 to an invertible matrix
    if ref is not None:
        return ref
    Q = null_space(r3.conj()[None, :])
    return Q.T.conj()


def hecke_s0(datum, gauge=None, rank_tol=1e-8):
    """The reflection s_0 on a datum: shift down at p_1, then up at p_9.

    Args:
        datum: a datum not over the fiber of p_1.
        gauge: reference choices from a previous call; reusing them makes the
            output depend smoothly on the input.
        rank_tol: relative threshold for the corank test at p_9.

    Returns:
        (new datum with parameters (tau^3 p_9, p_2, ..., p_8, tau^-3 p_1), report)

    Raises:
        FiberCase, RankDrop, DegenerateColumn.
    """
    A = datum.algebra
    params = datum.params
    E = params.E
    P = params.points
    gauge = dict(gauge or {})
    L, report = shift_down_at_first(datum)
    p1_down = tau_pow(E, P[0], -3)
    new_points = (tau_pow(E, P[8], 3),) + tuple(P[1:8]) + (p1_down,)
    report["det_at_expected"] = float(max(
        abs(np.linalg.det(L.evaluate(A, q))) for q in (p1_down,) + tuple(P[1:])))
    if proj_distance(P[8], p1_down) < 1e-6:
        raise RankDrop("p9 coincides with tau^-3 p1, so the determinant has a double zero there")
    K = L.evaluate(A, P[8])
    s = np.linalg.svd(K, compute_uv=False)
    report["singular_values_at_p9"] = [float(x) for x in s]
    if s[1] < rank_tol * s[0]:
        raise RankDrop("rank below 2 at p9")
    b = _normalize_to(_right_null(K), gauge.get("b"))
    gauge["b"] = b
    # the column L b as a 3 x 3 coefficient matrix (row i: linear form)
    Lb = np.array([sum(b[j] * L.entries[i][j].coeffs for j in range(3)) for i in range(3)])
    _, _, Vh = np.linalg.svd(Lb.T)
    r3 = _normalize_to(Vh[-1].conj(), gauge.get("r3"))
    gauge["r3"] = r3
    R12 = _complete_rows(r3, gauge.get("R12"))
    gauge["R12"] = R12
    R = np.vstack([R12, r3[None, :]])
    C23 = gauge.get("C23")
    if C23 is None:
        C23 = null_space(b.conj()[None, :])
    gauge["C23"] = C23
    C = np.hstack([b[:, None], C23])
    new = [[GradedElement(A, 1, sum(R[i, a] * C[bb, j] * L.entries[a][bb].coeffs
                                    for a in range(3) for bb in range(3)))
            for j in range(3)] for i in range(3)]
    report["zero_entry"] = float(new[2][0].norm())
    u1p, u2p = new[0][0], new[1][0]
    sv = np.linalg.svd(np.array([u1p.coeffs, u2p.coeffs]), compute_uv=False)
    if sv[1] < 1e-8 * sv[0]:
        raise DegenerateColumn("new syzygy column is degenerate")
    lp = _normalize_to(_right_syzygy(A, u1p, u2p), gauge.get("lp"))
    gauge["lp"] = lp
    l1p, l2p = A.linear(lp[:3]), A.linear(lp[3:])
    v_new = (new[2][1], new[2][2])
    w_new = tuple(new[0][k] * l1p + new[1][k] * l2p for k in (1, 2))
    new_params = BlowupParams(params.algebra, new_points)
    out = SheafDatum(v_new, w_new, new_params)
    report["new_generator_point_residual"] = float(proj_distance(
        ProjPoint(tuple(np.cross(l1p.coeffs, l2p.coeffs))), new_points[0]))
    report["new_base_residual"] = float(verify_base_vanishing(out))
    report["gauge"] = gauge
    report["matrix"] = L
    return out, report


def fiber_case(datum, tol=1e-6):
    """Cyclic presentation of the kernel when G maps to zero at p_1.

    Returns:
        dict with the cubic relation h = u1 w1 + u2 w2 annihilating G, the
        values of h on the expected divisor tau^-3 p_1, p_2..p_9, and the
        solution report of Theta through the point tau p_1.

    Raises:
        SheafError: the datum is not over the fiber of p_1.
    """
    A = datum.algebra
    params = datum.params
    E = params.E
    x = plane_point_of(datum)
    case, idx = classify_plane_point(x, params)
    if case != "fiber" or idx != 0:
        raise SheafError("datum is not over the fiber of p1")
    u1, u2 = A.left_syzygy(datum.v[0], datum.v[1])
    h = u1 * datum.w[0] + u2 * datum.w[1]
    expected = (tau_pow(E, params.points[0], -3),) + tuple(params.points[1:])
    scale = h.norm()
    values = [abs(A.restrict_to_E(h, q)) / scale for q in expected]
    sample_vals = [abs(A.restrict_to_E(h, q)) / scale for q in params.samples()[:3]]
    f1, f2, resid, amb = A.express_central_through_point(tau_pow(E, params.points[0], V_OFFSET))
    return {
        "relation": h,
        "expected_divisor_values": values,
        "generic_values": sample_vals,
        "central_residual": resid,
        "central_ambiguity": amb,
    }


def dynamics_state(datum):
    """The (D, P) state of the plane-curve dynamics matching a datum.

    D is the plane point of the datum and P the base points shifted once by
    tau; the shift moves the level from chi = 1 to the reference level 4.
    """
    from .dynamics import new_state

    E = datum.params.E
    P = [tau_pow(E, p, V_OFFSET) for p in datum.params.points]
    return new_state(E, 3, 4, [plane_point_of(datum)], P)


def degenerate_column_example(algebra, i=2, j=3, seed=0, lam=0.4 - 0.2j):
    """Parameters and a plane point at which the s_0 step hits DegenerateColumn.

    The triple p_i, p_j, p_9 sums to -3t and the plane point lies on the line
    through tau p_i and tau p_j; p_1 absorbs the global constraint.

    Returns:
        (BlowupParams, ProjPoint)
    """
    if not (2 <= i < j <= 8):
        raise SheafError("need 2 <= i < j <= 8")
    E = algebra.curve
    rng = np.random.default_rng(seed)
    P = [random_point(E, int(rng.integers(2**31))) for _ in range(9)]
    P[8] = sub(E, multiple_of_t(E, -3), add(E, P[i - 1], P[j - 1]))
    P[0] = solve_last_point(E, P[1:], 3, 1)
    params = BlowupParams(algebra, tuple(P))
    a = tau_pow(E, P[i - 1], V_OFFSET).as_array()
    b = tau_pow(E, P[j - 1], V_OFFSET).as_array()
    return params, ProjPoint(tuple(a + lam * b))


def rank_drop_example(algebra, seed=0):
    """Parameters with p_9 = tau^-3 p_1, where the s_0 step raises RankDrop."""
    E = algebra.curve
    rng = np.random.default_rng(seed)
    P = [random_point(E, int(rng.integers(2**31))) for _ in range(9)]
    P[8] = tau_pow(E, P[0], -3)
    P[7] = solve_last_point(E, P[:7] + [P[8]], 3, 1)
    return BlowupParams(algebra, tuple(P))
