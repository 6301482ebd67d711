"""Plane curves: interpolation, intersection and residual linear equivalence.

Curves are coefficient vectors in graded-lex monomial order. Intersections are
computed in double precision with a bivariate resultant in a random
projective frame, followed by Newton polish in the original coordinates.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import unitary_group

from . import _forms
from .elliptic import ProjPoint, as_point, proj_distance

CLUSTER_RADIUS = 1e-6
MAX_RETRIES = 5
EMPTY_TOL = 1e-7
GAP_TOL = 1e3 * np.finfo(float).eps


class CurveError(ValueError):
    """Base class for plane-curve failures."""


class AmbiguousKernel(CurveError):
    """More than one curve passes through the points."""


class EmptyKernel(CurveError):
    """No curve of the requested degree passes through the points."""


class CommonComponent(CurveError):
    """The two curves share a component."""


class ConditioningFailure(CurveError):
    """Intersection did not converge after the allowed frame changes."""


class UnmatchedPoint(CurveError):
    """A point to subtract has no partner in the larger divisor."""

    def __init__(self, message, worst):
        super().__init__(message)
        self.worst = worst


class NonUniqueSecondCurve(CurveError):
    """The second auxiliary curve of a residual construction is not unique."""


class PlaneCurve:
    """Plane curve of degree d given by its coefficient vector.

    The coefficients are scaled so that the largest one (first among ties)
    equals 1.
    """

    def __init__(self, degree, coeffs):
        c = np.asarray(coeffs, dtype=complex).ravel()
        if degree < 0 or len(c) != _forms.num_monomials(degree):
            raise ValueError("coefficient count does not match degree %d" % degree)
        mods = np.abs(c)
        top = mods.max()
        if top == 0:
            raise ValueError("zero polynomial")
        k = int(np.argmax(mods >= (1 - 1e-9) * top))
        self.degree = degree
        self.coeffs = c / c[k]

    def __call__(self, p):
        return evaluate(self, p)

    def gradient(self, p):
        return np.array(_forms.gradient(self.coeffs, self.degree, list(p)))

    def distance(self, other):
        """Projective distance between coefficient vectors."""
        if self.degree != other.degree:
            return np.inf
        a, b = self.coeffs, other.coeffs
        lam = np.vdot(b, a) / np.vdot(b, b)
        return float(np.max(np.abs(a - lam * b)))

    def to_json(self):
        return {"degree": self.degree, "coeffs": [[c.real, c.imag] for c in self.coeffs]}

    @classmethod
    def from_json(cls, data):
        return cls(data["degree"], [complex(*c) for c in data["coeffs"]])


@dataclass
class PlaneDivisor:
    """Multiset of plane points, optionally carried by a curve."""

    points: list
    curve: PlaneCurve = field(default=None, repr=False)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def to_json(self):
        return [p.to_json() for p in self.points]


@dataclass
class InterpolationDiagnostics:
    s_min: float
    s_second: float
    s_max: float
    nullity: int


def evaluate(C, p):
    """Value of the normalized form at the normalized point."""
    return complex(_forms.evaluate(C.coeffs, C.degree, [complex(c) for c in as_point(p).coords]))


def _multiples_of(C, m):
    # Span of C times monomials of degree m - d, as rows in degree-m coefficients.
    if C is None or m < C.degree:
        return np.zeros((0, _forms.num_monomials(m)), dtype=complex)
    rows = []
    for i in range(_forms.num_monomials(m - C.degree)):
        e = np.zeros(_forms.num_monomials(m - C.degree), dtype=complex)
        e[i] = 1
        rows.append(_forms.multiply(C.coeffs, C.degree, e, m - C.degree))
    return np.array(rows)


def kernel_basis(points, d, modulo=None, tol=EMPTY_TOL):
    """Orthonormal basis of degree-d forms through the points.

    When modulo is a curve, multiples of it are quotiented out by requiring
    orthogonality to them.

    Returns:
        (basis, singular values) where basis has one column per kernel vector.
    """
    V = _forms.evaluation_matrix([as_point(p).as_array() for p in points], d)
    S = _multiples_of(modulo, d)
    if len(S):
        Q, _ = np.linalg.qr(S.T)
        V = np.vstack([V, Q.conj().T])
    n = _forms.num_monomials(d)
    if V.shape[0] == 0:
        return np.eye(n, dtype=complex), np.zeros(n)
    _, s, Vh = np.linalg.svd(V)
    s_full = np.zeros(n)
    s_full[: len(s)] = s
    scale = max(s_full[0], 1e-300)
    null = [i for i in range(n) if s_full[i] <= tol * scale]
    return Vh.conj().T[:, null] if null else np.zeros((n, 0), dtype=complex), s_full


def interpolate_curve(points, d, modulo=None, tol=EMPTY_TOL, gap=GAP_TOL):
    """Unique degree-d curve through the points.

    Args:
        points: list of plane points.
        d: degree.
        modulo: optional curve whose multiples are ignored.
        tol: relative bound on the smallest singular value.
        gap: relative bound below which the second singular value signals a
            second independent solution.

    Returns:
        (PlaneCurve, InterpolationDiagnostics)

    Raises:
        EmptyKernel: the smallest singular value exceeds tol.
        AmbiguousKernel: the second singular value falls below gap.
    """
    V = _forms.evaluation_matrix([as_point(p).as_array() for p in points], d)
    S = _multiples_of(modulo, d)
    if len(S):
        Q, _ = np.linalg.qr(S.T)
        V = np.vstack([V, Q.conj().T])
    n = _forms.num_monomials(d)
    if V.shape[0] == 0:
        raise AmbiguousKernel("no conditions imposed")
    _, sv, Vh = np.linalg.svd(V)
    s_full = np.zeros(n)
    s_full[: len(sv)] = sv
    scale = max(s_full[0], 1e-300)
    diag = InterpolationDiagnostics(
        float(s_full[-1] / scale), float(s_full[-2] / scale) if n > 1 else np.inf, float(scale),
        int(np.sum(s_full <= tol * scale)))
    if s_full[-1] > tol * scale:
        raise EmptyKernel("smallest singular value %.3g above tolerance" % diag.s_min)
    if n > 1 and s_full[-2] <= gap * scale:
        raise AmbiguousKernel("second singular value %.3g below gap" % diag.s_second)
    return PlaneCurve(d, Vh[-1].conj()), diag


def _affine_coeffs(coeffs, d):
    # coefficient array c[a][b] of x^a y^b for the dehomogenization z = 1
    arr = np.zeros((d + 1, d + 1), dtype=complex)
    for c, (a, b, _) in zip(coeffs, _forms.monomials(d)):
        arr[a, b] = c
    return arr


def _poly_in_y(arr, x):
    # coefficients in y (ascending) of sum_a arr[a, b] x^a
    powers = x ** np.arange(arr.shape[0])
    return powers @ arr


def _sylvester_det(f, g):
    # f, g ascending coefficient vectors in y
    m, n = len(f) - 1, len(g) - 1
    size = m + n
    S = np.zeros((size, size), dtype=complex)
    for i in range(n):
        S[i, i:i + m + 1] = f[::-1]
    for i in range(m):
        S[n + i, i:i + n + 1] = g[::-1]
    return np.linalg.det(S)


def _newton_polish(F1, d1, F2, d2, p, steps=50):
    # projective Newton on F1 = F2 = 0 with the largest coordinate fixed
    P = np.array(p, dtype=complex)
    P = P / P[np.argmax(np.abs(P))]
    k = int(np.argmax(np.abs(P)))
    free = [i for i in range(3) if i != k]
    for _ in range(steps):
        f = np.array([_forms.evaluate(F1, d1, P), _forms.evaluate(F2, d2, P)])
        if np.max(np.abs(f)) < 1e-15:
            break
        J = np.array([_forms.gradient(F1, d1, P), _forms.gradient(F2, d2, P)])[:, free]
        step, *_ = np.linalg.lstsq(J, -f, rcond=1e-14)
        P[free] += step
        j = int(np.argmax(np.abs(P)))
        if j != k:
            P = P / P[j]
            k = j
            free = [i for i in range(3) if i != k]
        if np.max(np.abs(step)) < 1e-16:
            break
    return P


def _intersect_once(C1, C2, rng):
    d1, d2 = C1.degree, C2.degree
    M = unitary_group.rvs(3, random_state=rng)
    G1 = _forms.compose_linear(C1.coeffs, d1, M)
    G2 = _forms.compose_linear(C2.coeffs, d2, M)
    a1, a2 = _affine_coeffs(G1, d1), _affine_coeffs(G2, d2)
    total = d1 * d2
    nodes = 1
    while nodes <= total:
        nodes *= 2
    nodes *= 2
    xs = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    vals = np.array([_sylvester_det(_poly_in_y(a1, x), _poly_in_y(a2, x)) for x in xs])
    res = np.fft.fft(vals) / nodes
    scale = np.max(np.abs(res))
    norm_scale = np.linalg.norm(G1) ** d2 * np.linalg.norm(G2) ** d1
    if scale <= 1e-11 * norm_scale:
        raise CommonComponent("resultant vanishes identically")
    if np.max(np.abs(res[total + 1:])) > 1e-8 * scale:
        return None
    res = res[: total + 1]
    if abs(res[total]) < 1e-9 * scale:
        return None
    xroots = np.roots(res[::-1])
    pts = []
    for x in xroots:
        if d1 <= d2:
            fy, other = _poly_in_y(a1, x), a2
        else:
            fy, other = _poly_in_y(a2, x), a1
        if abs(fy[-1]) < 1e-12 * np.max(np.abs(fy)):
            return None
        ys = np.roots(fy[::-1])
        gy = lambda y: abs(np.polyval(_poly_in_y(other, x)[::-1], y))
        y = min(ys, key=gy)
        P = M @ np.array([x, y, 1.0])
        pts.append(_newton_polish(C1.coeffs, d1, C2.coeffs, d2, P))
    return pts


def _cluster(points, radius):
    reps, members = [], []
    for p in points:
        q = ProjPoint(tuple(p))
        for i, r in enumerate(reps):
            if proj_distance(q, r) < radius:
                members[i].append(q)
                break
        else:
            reps.append(q)
            members.append([q])
    out = []
    for r, ms in zip(reps, members):
        out.extend([r] * len(ms))
    return out


def intersect(C1, C2, seed=0, cluster_radius=CLUSTER_RADIUS, retries=MAX_RETRIES):
    """Intersection of two plane curves as a multiset of d1 d2 points.

    Raises:
        CommonComponent: the resultant vanishes identically.
        ConditioningFailure: no frame gave a verified answer.
    """
    rng = np.random.default_rng(seed)
    for _ in range(retries):
        pts = _intersect_once(C1, C2, rng)
        if pts is None:
            continue
        resid = max(max(abs(_forms.evaluate(C1.coeffs, C1.degree, p)),
                        abs(_forms.evaluate(C2.coeffs, C2.degree, p))) for p in pts)
        if resid > 1e-8:
            continue
        return PlaneDivisor(_cluster(pts, cluster_radius))
    raise ConditioningFailure("intersection failed after %d frames" % retries)


def divisor_subtract(big, known, tol=1e-6):
    """Multiset difference big - known with greedy nearest matching.

    Raises:
        UnmatchedPoint: some point of known has no partner within tol.
    """
    remaining = list(big.points if isinstance(big, PlaneDivisor) else big)
    worst = 0.0
    for p in (known.points if isinstance(known, PlaneDivisor) else known):
        if not remaining:
            raise UnmatchedPoint("nothing left to match", np.inf)
        dists = [proj_distance(p, q) for q in remaining]
        i = int(np.argmin(dists))
        worst = max(worst, dists[i])
        if dists[i] > tol:
            raise UnmatchedPoint("point unmatched at distance %.3g" % dists[i], dists[i])
        remaining.pop(i)
    return PlaneDivisor(remaining, getattr(big, "curve", None))


def genus(d):
    return (d - 1) * (d - 2) // 2


def auxiliary_degree(d):
    """Smallest m with (m + 1)(m + 2)/2 >= g + 2."""
    g = genus(d)
    m = 1
    while (m + 1) * (m + 2) // 2 < g + 2:
        m += 1
    return m


def residual_linear_equiv(C, D_plus, p_out, m=None, seed=0, tol=1e-6):
    """Effective divisor D' with D_plus ~ D' + p_out on the smooth curve C.

    Args:
        C: smooth plane curve of degree d.
        D_plus: g + 1 points of C.
        p_out: a point of C.
        m: auxiliary degree, minimal by default.
        seed: seed for the generic auxiliary curve.
        tol: matching tolerance for divisor subtraction.

    Returns:
        PlaneDivisor with g points.

    Raises:
        NonUniqueSecondCurve: the second auxiliary curve is not unique.
    """
    rng = np.random.default_rng(seed)
    D_plus = list(D_plus.points if isinstance(D_plus, PlaneDivisor) else D_plus)
    d = C.degree
    if m is None:
        m = auxiliary_degree(d)
    modulo = C if m >= d else None
    basis, _ = kernel_basis(D_plus, m, modulo=modulo)
    if basis.shape[1] == 0:
        raise EmptyKernel("no auxiliary curve through the divisor")
    w = rng.standard_normal(basis.shape[1]) + 1j * rng.standard_normal(basis.shape[1])
    A = PlaneCurve(m, basis @ w)
    R = divisor_subtract(intersect(C, A, seed=int(rng.integers(2**31))), D_plus, tol)
    second = R.points + [as_point(p_out)]
    try:
        A2, _ = interpolate_curve(second, m, modulo=modulo)
    except AmbiguousKernel as exc:
        raise NonUniqueSecondCurve(str(exc)) from exc
    Dp = divisor_subtract(intersect(C, A2, seed=int(rng.integers(2**31))), second, tol)
    return PlaneDivisor(Dp.points, C)


def smoothness_probe(C, seed=0):
    """Smallest residual of the singular-point system over candidate points.

    Candidates are the pairwise intersections of the partial derivatives. The
    residual is the larger of |F| and the remaining partial, relative to the
    coefficient scale. Returns 0.0 when no valid pair exists.
    """
    d = C.degree
    if d <= 1:
        return np.inf
    partials = [np.array(_forms.derivative(C.coeffs, d, i), dtype=complex) for i in range(3)]
    best = np.inf
    tried = False
    for i, j, k in ((0, 1, 2), (0, 2, 1), (1, 2, 0)):
        if np.max(np.abs(partials[i])) < 1e-12 or np.max(np.abs(partials[j])) < 1e-12:
            continue
        try:
            pts = intersect(PlaneCurve(d - 1, partials[i]), PlaneCurve(d - 1, partials[j]), seed=seed)
        except CurveError:
            continue
        tried = True
        for p in pts:
            q = p.as_array()
            r = max(abs(_forms.evaluate(C.coeffs, d, q)), abs(_forms.evaluate(partials[k], d - 1, q)))
            best = min(best, r)
        break
    if not tried:
        return 0.0
    return float(best)
