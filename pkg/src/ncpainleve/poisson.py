"""Skew pairing on deformations of a matrix pencil restricted to E.

A pencil is a matrix L of algebra elements with twisted evaluation on E. A
deformation L' is isotrivial when it keeps the zeros of det L fixed; near each
zero x it then splits as L' = B' L - L A' with holomorphic A', B'. The pairing
of two isotrivial deformations is

    <L', L''> = sigma * sum_x Res_x Tr(L'' L^{-1} B'_x) omega,

summed over the zeros of det L, with omega the standard differential of the
plane cubic and sigma = -1. Residues are computed by contour quadrature in a
local parameter of E.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _forms
from .elliptic import ProjPoint, as_point, proj_distance, random_point, tau_pow
from .plane_curves import PlaneCurve, intersect
from .sheaf import (
    TwistedMatrix,
    hecke_s0,
    linearized_constraint,
    tangent_basis,
)
from .sklyanin import GradedElement, null_space

SIGN = -1
RADIUS = 1e-2
SAMPLES = 32
ORDER = 4
ISOTRIVIAL_TOL = 1e-8
SUPPORT_TOL = 1e-8


class PairingError(ValueError):
    """Base class for pairing failures."""


class NotIsotrivial(PairingError):
    """The deformation has no splitting of the required kind."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class SupportError(PairingError):
    """Wrong number of zeros of det, or det vanishes identically."""


class QuadratureError(PairingError):
    """Contour quadrature did not converge."""


class LocalChart:
    """Holomorphic local parameter of E at x.

    The point at parameter z is x + z u + y(z) e_b with y solved by Newton,
    where b maximizes |dF/dX_b| at x. The differential is the chart form of
    (X_c dX_a - X_a dX_c) / F_b with (a, b, c) cyclic.
    """

    def __init__(self, E, x):
        self.E = E
        self.x = as_point(x).as_array()
        F = E.cubic
        g = np.array(_forms.gradient(F, 3, self.x), dtype=complex)
        self.b = int(np.argmax(np.abs(g)))
        self.a = (self.b + 2) % 3
        self.c = (self.b + 1) % 3
        u = np.zeros(3, dtype=complex)
        u[self.a] = np.conj(self.x[self.c])
        u[self.c] = -np.conj(self.x[self.a])
        self.u = u / np.linalg.norm(u)
        self._fixed = {}
        self._points = {}
        self._lifts = {}

    def point(self, z):
        key = complex(z)
        if key not in self._points:
            self._points[key] = self._solve(key)
        return self._points[key]

    def _solve(self, z):
        F = self.E.cubic
        e = np.zeros(3, dtype=complex)
        e[self.b] = 1
        base = self.x + z * self.u
        g0 = _forms.gradient(F, 3, self.x)
        y = -z * sum(g0[i] * self.u[i] for i in range(3)) / g0[self.b]
        for _ in range(30):
            q = base + y * e
            f = _forms.evaluate(F, 3, q)
            fb = _forms.gradient(F, 3, q)[self.b]
            step = f / fb
            y = y - step
            if abs(step) < 1e-17:
                break
        return base + y * e

    def omega(self, q):
        """omega / dz at the chart point q."""
        fb = _forms.gradient(self.E.cubic, 3, q)[self.b]
        return (q[self.c] * self.u[self.a] - q[self.a] * self.u[self.c]) / fb

    def lifts(self, q, n):
        """Holomorphic lifts of tau^k q for k = 0..n-1 (fixed normalizing index)."""
        key = (tuple(np.asarray(q, dtype=complex)), n)
        if key not in self._lifts:
            self._lifts[key] = self._compute_lifts(q, n)
        return self._lifts[key]

    def _compute_lifts(self, q, n):
        out = []
        for k in range(n):
            if k not in self._fixed:
                self._fixed[k] = int(np.argmax(np.abs(tau_pow(self.E, ProjPoint(tuple(self.x)), k).as_array())))
            arr = q if k == 0 else tau_pow(self.E, ProjPoint(tuple(q)), k).as_array()
            out.append(arr / arr[self._fixed[k]])
        return out


@dataclass
class CommutativePencil:
    """Matrix of algebra elements restricted to E by twisted evaluation.

    Args:
        algebra: the Sklyanin algebra.
        matrix: TwistedMatrix with row offsets.
        seeds: known zeros of det, used to seed the support search.
    """

    algebra: object = field(repr=False)
    matrix: TwistedMatrix
    seeds: list = None
    _charts: dict = field(default_factory=dict, repr=False, compare=False)

    def chart(self, x):
        """Cached local chart at a point of E."""
        key = as_point(x).coords
        if key not in self._charts:
            self._charts[key] = LocalChart(self.E, x)
        return self._charts[key]

    @property
    def E(self):
        return self.algebra.curve

    @property
    def shape(self):
        return len(self.matrix.entries), len(self.matrix.entries[0])

    @property
    def span(self):
        # number of lifts needed for twisted evaluation
        return max(o + e.degree for o, row in zip(self.matrix.row_offsets, self.matrix.entries) for e in row)

    def evaluate(self, pts, deformation=None):
        M = self.matrix if deformation is None else deformation
        return M.evaluate(self.algebra, pts=pts)

    def at(self, p, deformation=None):
        return self.evaluate(self.algebra.shifted_points(p, self.span), deformation)

    def vector(self, deformation=None):
        M = self.matrix if deformation is None else deformation
        return np.concatenate([e.coeffs for row in M.entries for e in row])

    def from_vector(self, vec):
        """Deformation with the same shape and degrees as the pencil."""
        out, k = [], 0
        for row in self.matrix.entries:
            new = []
            for e in row:
                m = len(e.coeffs)
                new.append(GradedElement(self.algebra, e.degree, np.asarray(vec[k:k + m], dtype=complex)))
                k += m
            out.append(new)
        return TwistedMatrix(out, self.matrix.row_offsets)

    def conjugate(self, P, Q):
        """The pencil P L Q for constant invertible P, Q (rows must share offsets)."""
        return CommutativePencil(self.algebra, transform(self.matrix, P, Q), self.seeds)


def transform(M, P, Q):
    """P M Q for a TwistedMatrix with uniform row structure."""
    n, m = len(M.entries), len(M.entries[0])
    out = [[_combine([(P[i, a] * Q[b, j], M.entries[a][b]) for a in range(n) for b in range(m)])
            for j in range(m)] for i in range(n)]
    return TwistedMatrix(out, M.row_offsets)


def _combine(terms):
    # linear combination of elements of equal degree
    total = None
    for c, e in terms:
        if c == 0:
            continue
        total = c * e if total is None else total + c * e
    if total is None:
        e = terms[0][1]
        total = e.algebra.zero(e.degree)
    return total


def _scaled_det(Mx):
    # det divided by the product of row norms (Hadamard bound)
    norms = np.linalg.norm(Mx, axis=1)
    return np.linalg.det(Mx) / np.prod(norms)


def _det_in_chart(pencil, chart, z):
    q = chart.point(z)
    return np.linalg.det(pencil.evaluate(chart.lifts(q, pencil.span)))


def refine_zero(pencil, x, steps=30):
    """Newton on det along E starting at x."""
    E = pencil.E
    x = E.refine(as_point(x))
    for _ in range(steps):
        chart = LocalChart(E, x)
        h = 1e-5
        f0 = _det_in_chart(pencil, chart, 0.0)
        df = (_det_in_chart(pencil, chart, h) - _det_in_chart(pencil, chart, -h)) / (2 * h)
        if df == 0:
            break
        dz = -f0 / df
        if abs(dz) > 0.2:
            dz *= 0.2 / abs(dz)
        x = E.refine(ProjPoint(tuple(chart.point(dz))))
        if abs(dz) < 1e-14:
            break
    return x


def _uniform_linear(pencil):
    M = pencil.matrix
    return len(set(M.row_offsets)) == 1 and all(e.degree == 1 for row in M.entries for e in row)


def support(pencil, expected=None, seed=0):
    """Zeros of the twisted determinant on E.

    Uses the seeds when present, else intersects E with the determinant curve
    (uniform linear pencils) or runs seeded multistart Newton.

    Returns:
        list of ProjPoint.

    Raises:
        SupportError: det vanishes identically, or the zero count is wrong.
    """
    E = pencil.E
    rng = np.random.default_rng(seed)
    probes = [random_point(E, int(rng.integers(2**31))) for _ in range(6)]
    if max(abs(_scaled_det(pencil.at(p))) for p in probes) < 1e-10:
        raise SupportError("det vanishes identically on E")
    n = pencil.shape[0]
    if expected is None:
        # det is a section of degree 3 per letter in each row
        expected = 3 * sum(row[0].degree for row in pencil.matrix.entries)
    if pencil.seeds is not None:
        zeros = [refine_zero(pencil, s) for s in pencil.seeds]
    elif _uniform_linear(pencil):
        o = pencil.matrix.row_offsets[0]
        coeffs = np.array([[e.coeffs for e in row] for row in pencil.matrix.entries])
        G, _ = _forms.fit_form(lambda y: np.linalg.det(coeffs @ np.asarray(y)), n)
        pts = intersect(PlaneCurve(3, [complex(c) for c in E.cubic]), PlaneCurve(n, G), seed=seed)
        zeros = [refine_zero(pencil, tau_pow(E, ProjPoint(tuple(y)), -o)) for y in pts]
    else:
        zeros = []
        for _ in range(40 * expected):
            z = refine_zero(pencil, random_point(E, int(rng.integers(2**31))))
            if abs(_scaled_det(pencil.at(z))) < SUPPORT_TOL and all(proj_distance(z, w) > 1e-6 for w in zeros):
                zeros.append(z)
            if len(zeros) == expected:
                break
    resid = max(abs(_scaled_det(pencil.at(z))) for z in zeros) if zeros else np.inf
    if len(zeros) != expected or resid > SUPPORT_TOL:
        raise SupportError("found %d zeros (expected %d), residual %.3g" % (len(zeros), expected, resid))
    return zeros


@dataclass
class IsotrivialityCertificate:
    """Constant A, B with L' = B L - L A."""

    A: np.ndarray
    B: np.ndarray
    residual: float
    slack: np.ndarray


def _structure_masks(pencil):
    M = pencil.matrix
    n, m = pencil.shape
    rows = [(M.row_offsets[i], tuple(e.degree for e in M.entries[i])) for i in range(n)]
    cols = [tuple(M.entries[i][j].degree for i in range(n)) for j in range(m)]
    maskB = np.array([[rows[i] == rows[k] for k in range(n)] for i in range(n)])
    maskA = np.array([[cols[k] == cols[j] for j in range(m)] for k in range(m)])
    return maskA, maskB


def _certificate_system(pencil):
    # columns: map from (A entries, B entries) to coefficients of B L - L A
    n, m = pencil.shape
    maskA, maskB = _structure_masks(pencil)
    cols, labels = [], []
    for k in range(m):
        for j in range(m):
            if maskA[k, j]:
                A = np.zeros((m, m))
                A[k, j] = 1
                cols.append(-pencil.vector(transform(pencil.matrix, np.eye(n), A)))
                labels.append(("A", k, j))
    for i in range(n):
        for k in range(n):
            if maskB[i, k]:
                B = np.zeros((n, n))
                B[i, k] = 1
                cols.append(pencil.vector(transform(pencil.matrix, B, np.eye(m))))
                labels.append(("B", i, k))
    return np.array(cols).T, labels


def isotriviality_certificate(pencil, deformation, tol=ISOTRIVIAL_TOL):
    """Constant (A, B) with deformation = B L - L A.

    Raises:
        NotIsotrivial: relative residual above tol.
    """
    n, m = pencil.shape
    S, labels = _certificate_system(pencil)
    target = pencil.vector(deformation)
    sol, *_ = np.linalg.lstsq(S, target, rcond=None)
    resid = float(np.linalg.norm(S @ sol - target) / max(np.linalg.norm(target), 1e-300))
    if resid > tol:
        raise NotIsotrivial("no constant splitting: residual %.3g (threshold %.1g)" % (resid, tol), resid)
    A = np.zeros((m, m), dtype=complex)
    B = np.zeros((n, n), dtype=complex)
    for val, (kind, i, j) in zip(sol, labels):
        (A if kind == "A" else B)[i, j] = val
    return IsotrivialityCertificate(A, B, resid, null_space(S))


def trivial_space(pencil):
    """Orthonormal basis of the deformations B L - L A."""
    S, _ = _certificate_system(pencil)
    U, s, _ = np.linalg.svd(S, full_matrices=False)
    return U[:, s > 1e-9 * s[0]]


def _kernel_vectors(Mx):
    U, s, Vh = np.linalg.svd(Mx)
    return U[:, -1].conj(), Vh[-1].conj()


def isotriviality_conditions(pencil, zeros):
    """Rows l_x^T L'(x) k_x, one per zero x, as functionals on deformation vectors."""
    rows = []
    dim = len(pencil.vector())
    basis = np.eye(dim)
    for x in zeros:
        pts = pencil.algebra.shifted_points(x, pencil.span)
        l, k = _kernel_vectors(pencil.evaluate(pts))
        rows.append([l @ pencil.evaluate(pts, pencil.from_vector(e)) @ k for e in basis])
    return np.array(rows)


def isotrivial_basis(pencil, zeros=None):
    """Orthonormal basis of the deformations that keep the zeros of det fixed."""
    zeros = support(pencil) if zeros is None else zeros
    return null_space(isotriviality_conditions(pencil, zeros), tol=1e-9)


def _contour(chart, pencil, radius, samples):
    zs = radius * np.exp(2j * np.pi * np.arange(samples) / samples)
    qs = [chart.point(z) for z in zs]
    pts = [chart.lifts(q, pencil.span) for q in qs]
    om = np.array([chart.omega(q) for q in qs])
    return zs, pts, om


def _taylor(values, zs, radius, order):
    # Taylor coefficients 0..order-1 from samples on a circle
    N = len(zs)
    vals = np.asarray(values)
    coeffs = np.fft.fft(vals, axis=0) / N
    return [coeffs[n] / radius ** n for n in range(order)]


@dataclass
class LocalSplitting:
    """Truncated series A'(z), B'(z) at a zero x with L' = B' L - L A'."""

    x: ProjPoint
    A: list
    B: list
    residual: float

    def B_at(self, z):
        return sum(Bn * z ** n for n, Bn in enumerate(self.B))


def local_splitting(pencil, deformation, x, order=ORDER, radius=RADIUS, samples=SAMPLES, slack_seed=None):
    """Series solution of L' = B' L - L A' at x, truncated at the given order.

    The minimum-norm solution is returned; with slack_seed a random element of
    the solution set's slack is added instead (to test independence).

    Raises:
        NotIsotrivial: the truncated identity cannot be met.
    """
    chart = pencil.chart(x)
    zs, pts, _ = _contour(chart, pencil, radius, samples)
    Ls = _taylor([pencil.evaluate(p) for p in pts], zs, radius, order)
    Lp = _taylor([pencil.evaluate(p, deformation) for p in pts], zs, radius, order)
    n, m = pencil.shape
    nA, nB = m * m, n * n
    rows, rhs = [], []
    # unknowns: A_0..A_{K-1}, B_0..B_{K-1}, flattened row-major
    for o in range(order):
        block = np.zeros((n * m, order * (nA + nB)), dtype=complex)
        for i in range(o + 1):
            j = o - i
            # B_i L_j -> kron(I_n... ) row-major: vec(B L) = kron(I, L^T) vec(B)
            block[:, order * nA + i * nB: order * nA + (i + 1) * nB] += np.kron(np.eye(n), Ls[j].T)
            block[:, i * nA:(i + 1) * nA] -= np.kron(Ls[j], np.eye(m))
        rows.append(block)
        rhs.append(Lp[o].reshape(-1))
    S = np.vstack(rows)
    r = np.concatenate(rhs)
    sol, *_ = np.linalg.lstsq(S, r, rcond=None)
    if slack_seed is not None:
        ker = null_space(S, tol=1e-8)
        rng = np.random.default_rng(slack_seed)
        sol = sol + ker @ (rng.normal(size=ker.shape[1]) + 1j * rng.normal(size=ker.shape[1]))
    resid = float(np.linalg.norm(S @ sol - r) / max(np.linalg.norm(r), 1e-300))
    if resid > 1e-6:
        raise NotIsotrivial("no local splitting at the given order: residual %.3g" % resid, resid)
    A = [sol[i * nA:(i + 1) * nA].reshape(m, m) for i in range(order)]
    B = [sol[order * nA + i * nB: order * nA + (i + 1) * nB].reshape(n, n) for i in range(order)]
    return LocalSplitting(as_point(x), A, B, resid)


def residue_at(chart, func, radius=RADIUS, samples=SAMPLES, check=True, rel_tol=1e-6):
    """Residue of func(z, q) * omega at the chart center by contour quadrature.

    func receives the parameter z and the chart point q. With check, the
    radius is halved and the sample count doubled; the estimates must agree.

    Returns:
        (residue, relative change under refinement)

    Raises:
        QuadratureError: refinement changes the result by more than rel_tol
            after three radius reductions.
    """

    def quad(r, N):
        zs = r * np.exp(2j * np.pi * np.arange(N) / N)
        tot = 0
        for z in zs:
            q = chart.point(z)
            tot += func(z, q) * chart.omega(q) * z
        return tot / N

    r = radius
    for _ in range(4):
        val = quad(r, samples)
        if not check:
            return val, 0.0
        fine = quad(r / 2, 2 * samples)
        change = abs(fine - val) / max(abs(fine), abs(val), 1e-300)
        if change < rel_tol or abs(fine - val) < 1e-13:
            return fine, float(change)
        r /= 4
    raise QuadratureError("residue quadrature did not converge (change %.3g)" % change)


@dataclass
class PairingResult:
    value: complex
    residues: list
    refinement: float
    support: list = field(repr=False, default=None)

    def to_json(self):
        return {
            "value": [self.value.real, self.value.imag],
            "residues": [[r.real, r.imag] for r in self.residues],
            "refinement": self.refinement,
        }


def pairing(pencil, first, second, certificate=None, zeros=None, order=ORDER,
            radius=RADIUS, samples=SAMPLES, slack_seed=None, check=True, local_at=()):
    """The pairing <first, second> of two deformations.

    Args:
        pencil: the base pencil.
        first: deformation providing the splitting (isotrivial).
        second: the other deformation (isotrivial for a well-defined value).
        certificate: global constant splitting of first; when given it is
            used at every zero except those listed in local_at.
        zeros: support of the pencil (computed when omitted).
        slack_seed: add random slack to the local splittings.

    Returns:
        PairingResult.
    """
    zeros = support(pencil) if zeros is None else zeros
    residues = []
    worst = 0.0
    for idx, x in enumerate(zeros):
        chart = pencil.chart(x)
        if certificate is not None and idx not in local_at:
            B = certificate.B

            def Bz(z):
                return B
        else:
            split = local_splitting(pencil, first, x, order, radius, samples, slack_seed)
            Bz = split.B_at

        def f(z, q, Bz=Bz, chart=chart):
            pts = chart.lifts(q, pencil.span)
            Lz = pencil.evaluate(pts)
            L2 = pencil.evaluate(pts, second)
            return np.trace(L2 @ np.linalg.solve(Lz, Bz(z)))

        res, change = residue_at(chart, f, radius, samples, check=check)
        residues.append(complex(res))
        worst = max(worst, change)
    value = SIGN * sum(residues)
    return PairingResult(complex(value), residues, worst, zeros)


# pencils attached to sheaf data


def datum_pencil(datum):
    """The 2 x 2 pencil [[v1, v2], [w1, w2]] with row offsets (1, 0)."""
    M = TwistedMatrix([[datum.v[0], datum.v[1]], [datum.w[0], datum.w[1]]], (1, 0))
    return CommutativePencil(datum.algebra, M, list(datum.params.points))


def deformation_from_tangent(pencil, vec):
    """Deformation of the datum pencil from an 18-vector (dv1, dv2, dw1, dw2)."""
    return pencil.from_vector(np.asarray(vec, dtype=complex))


def datum_pairing(datum, a, b, **kw):
    """Pairing of two tangent vectors (18-vectors) at a datum."""
    P = datum_pencil(datum)
    return pairing(P, deformation_from_tangent(P, a), deformation_from_tangent(P, b),
                   zeros=list(datum.params.points), **kw)


def _hecke_move(datum, gauge):
    new, rep = hecke_s0(datum, gauge=gauge)
    return new, rep["gauge"]


def _identity_move(datum, gauge):
    return datum, gauge or {}


def transport(datum, vec, step=1e-5, gauge=None, move=None):
    """Differential of a move applied to a tangent vector (central differences).

    Perturbed data are projected back onto the base-vanishing locus before
    the move; the move defaults to hecke_s0 with a fixed gauge.

    Returns:
        (image 18-vector, moved datum, gauge)
    """
    from .sheaf import SheafDatum, project_to_constraint

    move = move or _hecke_move
    new, gauge = move(datum, gauge)
    base = datum.vector()
    plus, _ = move(project_to_constraint(SheafDatum.from_vector(base + step * vec, datum.params)), gauge)
    minus, _ = move(project_to_constraint(SheafDatum.from_vector(base - step * vec, datum.params)), gauge)
    return (plus.vector() - minus.vector()) / (2 * step), new, gauge


def hecke_symplecticity_test(datum, a=None, b=None, step=1e-5, mismatch=False, identity=False):
    """Relative discrepancy between the pairing before and after hecke_s0.

    With mismatch, the second transported vector is replaced by the transport
    of a different tangent vector (negative control). With identity, the move
    is the identity map.

    Returns:
        dict with before, after and the relative discrepancy.
    """
    T = tangent_basis(datum)
    rng = np.random.default_rng(7)
    if a is None:
        a = T @ (rng.normal(size=T.shape[1]) + 1j * rng.normal(size=T.shape[1]))
    if b is None:
        b = T @ (rng.normal(size=T.shape[1]) + 1j * rng.normal(size=T.shape[1]))
    move = _identity_move if identity else _hecke_move
    ta, new, gauge = transport(datum, a, step, move=move)
    c = b
    if mismatch:
        c = T @ (rng.normal(size=T.shape[1]) + 1j * rng.normal(size=T.shape[1]))
    tb, _, _ = transport(datum, c, step, gauge, move=move)
    before = datum_pairing(datum, a, b).value
    after = datum_pairing(new, ta, tb).value
    disc = abs(after - before) / max(abs(before), 1e-300)
    # residual of the transported vectors against the new constraint
    J = linearized_constraint(new)
    lin = max(np.linalg.norm(J @ ta) / np.linalg.norm(ta), np.linalg.norm(J @ tb) / np.linalg.norm(tb))
    return {"before": complex(before), "after": complex(after), "discrepancy": float(disc),
            "transport_constraint_residual": float(lin)}
