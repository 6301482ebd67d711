"""Arithmetic on a smooth plane cubic with a flex base point.

Points are homogeneous triples. The group law is the chord and tangent
construction with a flex O as identity, so every line section of the cubic
sums to O. A stored point t on the curve represents the translation
automorphism tau(p) = p + t.

All scalar work is written with plain arithmetic so the same code runs in
double precision (Python complex) and in extended precision (mpmath).
"""

from dataclasses import dataclass, field

import mpmath
import numpy as np

from . import _forms

DEFAULT_TOL = 1e-8
EXTENDED_DPS = 40

_MP = mpmath.MPContext()
_MP.dps = EXTENDED_DPS


class EllipticError(ValueError):
    """Base class for failures in curve arithmetic."""


class DegenerateLine(EllipticError):
    """The line through the two points lies in the cubic."""


class RefinementFailure(EllipticError):
    """Newton refinement did not reach the curve."""


class NoFlexFound(EllipticError):
    """No flex could be certified; the cubic is probably singular."""


class NotOnCurve(EllipticError):
    """A point that should lie on the curve does not."""


def to_scalar(value, precision="double"):
    """Convert a number (or [re, im] pair) to the scalar type of a precision mode."""
    if isinstance(value, (list, tuple)):
        value = complex(float(value[0]), float(value[1]))
    if precision == "extended":
        return _MP.mpc(value)
    return complex(value)


def _normalize(coords):
    mods = [abs(c) for c in coords]
    top = max(mods)
    if top == 0:
        raise ValueError("all homogeneous coordinates vanish")
    k = next(i for i, m in enumerate(mods) if m >= (1 - 1e-9) * top)
    pivot = coords[k]
    out = [c / pivot for c in coords]
    out[k] = out[k] * 0 + 1
    return tuple(out)


@dataclass(frozen=True)
class ProjPoint:
    """Point of the projective plane, stored with a canonical scaling.

    The first coordinate whose modulus is (up to 1e-9) maximal is scaled to 1.
    """

    coords: tuple

    def __post_init__(self):
        if len(self.coords) != 3:
            raise ValueError("a plane point needs three coordinates")
        object.__setattr__(self, "coords", _normalize(tuple(self.coords)))

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def as_array(self):
        return np.array([complex(c) for c in self.coords])

    def to_precision(self, precision):
        return ProjPoint(tuple(to_scalar(c, precision) for c in self.coords))

    def to_json(self):
        return [[float(complex(c).real), float(complex(c).imag)] for c in self.coords]

    @classmethod
    def from_json(cls, data, precision="double"):
        return cls(tuple(to_scalar(c, precision) for c in data))

    def close_to(self, other, tol=DEFAULT_TOL):
        return proj_distance(self, other) <= tol


def as_point(p):
    """Accept a ProjPoint, CurvePoint or coordinate triple."""
    if isinstance(p, ProjPoint):
        return p
    if isinstance(p, CurvePoint):
        return p.point
    return ProjPoint(tuple(p))


def proj_distance(P, Q):
    """Max-norm distance between canonical representatives, minimized over scalings.

    The minimization runs over the least-squares scaling and the coordinate
    ratio scalings, which bounds the true minimum within a factor of two.
    """
    P = as_point(P).coords
    Q = as_point(Q).coords
    qq = sum(abs(q) ** 2 for q in Q)
    cands = [sum(q.conjugate() * p for p, q in zip(P, Q)) / qq]
    for p, q in zip(P, Q):
        if abs(q) > 1e-3:
            cands.append(p / q)
    return min(max(abs(p - lam * q) for p, q in zip(P, Q)) for lam in cands)


def _dot(u, v):
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def _cross(u, v):
    return (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])


class EllipticCurve:
    """Smooth plane cubic with flex base point O and translation amount t.

    Args:
        cubic: ten coefficients in graded-lex order.
        O: flex used as the identity. Found with find_flex when omitted.
        t: point representing the translation tau. Defaults to O.
        tol: tolerance for on-curve and equality checks.
        precision: "double" or "extended".
        check: validate smoothness and the base point.

    Raises:
        NotOnCurve: O or t is off the curve, or O is not a flex.
        EllipticError: the cubic is singular.
    """

    def __init__(self, cubic, O=None, t=None, tol=DEFAULT_TOL, precision="double", check=True):
        if precision not in ("double", "extended"):
            raise ValueError("precision must be 'double' or 'extended'")
        coeffs = [to_scalar(c, precision) for c in cubic]
        if len(coeffs) != 10:
            raise ValueError("a plane cubic has ten coefficients")
        top = max(coeffs, key=abs)
        if abs(top) == 0:
            raise ValueError("zero cubic")
        self.cubic = tuple(c / top for c in coeffs)
        self.tol = tol
        self.precision = precision
        self._multiples = {}
        if check:
            from .plane_curves import smoothness_probe, PlaneCurve

            if smoothness_probe(PlaneCurve(3, [complex(c) for c in self.cubic])) < 1e-7:
                raise EllipticError("cubic is singular")
        if O is None:
            O = find_flex(self.cubic, precision=precision)
        self.O = as_point(O).to_precision(precision)
        self.t = self.O if t is None else as_point(t).to_precision(precision)
        if check:
            if self.residual(self.O) > tol or self.residual(self.t) > tol:
                raise NotOnCurve("base point or translation point is off the curve")
            if proj_distance(third_intersection(self, self.O, self.O), self.O) > 1e3 * tol:
                raise NotOnCurve("base point is not a flex")

    def with_translation(self, t):
        """Same curve and base point with a new translation amount."""
        return EllipticCurve(self.cubic, self.O, t, self.tol, self.precision, check=False)

    def to_precision(self, precision):
        return EllipticCurve(self.cubic, self.O, self.t, self.tol, precision, check=False)

    def residual(self, p):
        """Normalized cubic evaluated at the normalized point."""
        return abs(_forms.evaluate(self.cubic, 3, as_point(p).coords))

    def contains(self, p, tol=None):
        return self.residual(p) <= (self.tol if tol is None else tol)

    def point(self, coords):
        return ProjPoint(tuple(to_scalar(c, self.precision) for c in coords))

    def refine(self, p, steps=20):
        """Newton projection of a nearby point onto the curve."""
        P = list(as_point(p).to_precision(self.precision).coords)
        k = max(range(3), key=lambda i: abs(P[i]))
        for _ in range(steps):
            f = _forms.evaluate(self.cubic, 3, P)
            if abs(f) < self._eps():
                break
            g = _forms.gradient(self.cubic, 3, P)
            g[k] = g[k] * 0
            nrm = sum(abs(c) ** 2 for c in g)
            if nrm == 0:
                break
            P = [P[i] - f * g[i].conjugate() / nrm for i in range(3)]
        return ProjPoint(tuple(P))

    def _eps(self):
        return 1e-15 if self.precision == "double" else _MP.mpf(10) ** (-(EXTENDED_DPS - 4))

    def to_json(self):
        return {
            "cubic": [[float(complex(c).real), float(complex(c).imag)] for c in self.cubic],
            "O": self.O.to_json(),
            "t": self.t.to_json(),
        }

    @classmethod
    def from_json(cls, data, tol=DEFAULT_TOL, precision="double"):
        return cls(
            [complex(*c) for c in data["cubic"]],
            O=ProjPoint.from_json(data["O"]) if data.get("O") is not None else None,
            t=ProjPoint.from_json(data["t"]) if data.get("t") is not None else None,
            tol=tol,
            precision=precision,
        )


@dataclass(frozen=True)
class CurvePoint:
    """A point together with the curve it lies on."""

    point: ProjPoint
    curve: EllipticCurve = field(compare=False)

    def __post_init__(self):
        object.__setattr__(self, "point", as_point(self.point))
        if not self.curve.contains(self.point):
            raise NotOnCurve("residual %.3g above tolerance" % self.curve.residual(self.point))


@dataclass(frozen=True)
class PicClass:
    """Divisor class on the curve: degree and the sum of any representing divisor."""

    degree: int
    abel: ProjPoint

    def same_as(self, other, tol=DEFAULT_TOL):
        return self.degree == other.degree and proj_distance(self.abel, other.abel) <= tol


def _refine_on_line(F, R, D, eps, steps=40):
    # Newton in the parameter s for F(R + s D) = 0.
    s = 0
    for _ in range(steps):
        X = [R[i] + s * D[i] for i in range(3)]
        f = _forms.evaluate(F, 3, X)
        if abs(f) <= eps:
            break
        df = _dot(_forms.gradient(F, 3, X), D)
        if abs(df) <= eps * 1e-3:
            break
        step = f / df
        s = s - step
        if abs(step) <= eps:
            break
    return [R[i] + s * D[i] for i in range(3)]


def third_on_cubic(F, P, Q, eps=1e-15, tangent_tol=1e-9):
    """Third intersection of the line PQ with the cubic form F.

    Uses the tangent line at P when P and Q agree within tangent_tol.

    Raises:
        DegenerateLine: the line lies in the cubic.
        RefinementFailure: the refined point is not on the cubic.
    """
    P = as_point(P).coords
    Q = as_point(Q).coords
    gP = _forms.gradient(F, 3, P)
    if proj_distance(ProjPoint(P), ProjPoint(Q)) < tangent_tol:
        # second point on the tangent line, as far from P as the basis allows
        Pn = ProjPoint(P)
        best = None
        for k in range(3):
            e = [0 * P[0], 0 * P[0], 0 * P[0]]
            e[k] = e[k] + 1
            cand = _cross(gP, e)
            if max(abs(c) for c in cand) == 0:
                continue
            dist = proj_distance(ProjPoint(tuple(cand)), Pn)
            if best is None or dist > best[0]:
                best = (dist, cand)
        other = best[1]
        c2 = _dot(_forms.gradient(F, 3, other), P)
        c3 = _forms.evaluate(F, 3, other)
        R = [c3 * P[i] - c2 * other[i] for i in range(3)]
        scale = abs(c2) + abs(c3)
        line = (P, other)
    else:
        c1 = _dot(gP, Q)
        c2 = _dot(_forms.gradient(F, 3, Q), P)
        R = [c2 * P[i] - c1 * Q[i] for i in range(3)]
        scale = sum(abs(c) for c in gP) + sum(abs(c) for c in _forms.gradient(F, 3, Q))
        line = (P, Q)
    if max(abs(c) for c in R) <= 1e-13 * scale:
        raise DegenerateLine("line meets the cubic in a whole component")
    R = ProjPoint(tuple(R)).coords
    # refine along the line, moving in the basis direction least parallel to R
    D = min(line, key=lambda v: abs(_dot([c.conjugate() for c in R], v)) / max(abs(c) for c in v))
    D = ProjPoint(tuple(D)).coords
    X = ProjPoint(tuple(_refine_on_line(F, R, D, eps))).coords
    if abs(_forms.evaluate(F, 3, X)) > 1e-6:
        raise RefinementFailure("refinement left residual %.3g" % abs(_forms.evaluate(F, 3, X)))
    return ProjPoint(X)


def third_intersection(E, P, Q):
    """Third point of E on the line through P and Q (tangent line when P = Q)."""
    return third_on_cubic(E.cubic, P, Q, eps=E._eps())


def add(E, P, Q):
    """Group sum with the flex O as identity."""
    return third_intersection(E, E.O, third_intersection(E, P, Q))


def neg(E, P):
    return third_intersection(E, P, E.O)


def sub(E, P, Q):
    return add(E, P, neg(E, Q))


def scalar_mul(E, n, P):
    """n-fold sum of P by double and add."""
    if n < 0:
        return neg(E, scalar_mul(E, -n, P))
    result = E.O
    base = as_point(P)
    while n:
        if n & 1:
            result = add(E, result, base)
        n >>= 1
        if n:
            base = add(E, base, base)
    return result


def multiple_of_t(E, k):
    """k times the translation point, cached per curve."""
    if k not in E._multiples:
        E._multiples[k] = scalar_mul(E, k, E.t)
    return E._multiples[k]


TORSION_SNAP = 1e-13


def tau_pow(E, p, k):
    """Apply the translation k times: p + k t.

    When k t is the base point (up to TORSION_SNAP) p is returned unchanged,
    so torsion translations act exactly.
    """
    if k == 0:
        return as_point(p)
    m = multiple_of_t(E, k)
    if proj_distance(m, E.O) < TORSION_SNAP:
        return as_point(p)
    return add(E, p, m)


def pic_sum(E, points):
    """Degree and abel sum of a list of points."""
    total = E.O
    for p in points:
        total = add(E, total, p)
    return PicClass(len(points), total)


def check_constraint(E, points, d, chi):
    """Distance between the sum of the points and the target 3(chi - d) t."""
    target = multiple_of_t(E, 3 * (chi - d))
    return proj_distance(pic_sum(E, points).abel, target)


def solve_last_point(E, points, d, chi):
    """The point that completes a list to satisfy the sum constraint."""
    target = multiple_of_t(E, 3 * (chi - d))
    return sub(E, target, pic_sum(E, points).abel)


def find_flex(cubic, precision="double", seed=0):
    """Deterministically chosen flex of a smooth cubic.

    The nine intersections with the Hessian are computed, certified as flexes,
    and the one with the smallest sort key (rounded moduli, then real parts,
    then imaginary parts of the canonical coordinates) is returned.

    Raises:
        NoFlexFound: no candidate passes the flex test.
    """
    from .plane_curves import PlaneCurve, intersect

    F = [complex(c) for c in cubic]
    top = max(F, key=abs)
    F = [c / top for c in F]
    H = _forms.hessian_form(F, 3)
    try:
        pts = intersect(PlaneCurve(3, F), PlaneCurve(3, H), seed=seed).points
    except ValueError as exc:
        raise NoFlexFound(str(exc)) from exc
    flexes = []
    for p in pts:
        if abs(_forms.evaluate(F, 3, p.coords)) > 1e-7:
            continue
        try:
            if proj_distance(third_on_cubic(F, p, p), p) < 1e-5:
                flexes.append(p)
        except EllipticError:
            continue
    if not flexes:
        raise NoFlexFound("no candidate passed the flex test")

    def key(p):
        c = [complex(x) for x in p.coords]
        return (
            tuple(round(abs(x), 6) for x in c)
            + tuple(round(x.real, 6) for x in c)
            + tuple(round(x.imag, 6) for x in c)
        )

    best = min(flexes, key=key)
    if precision == "extended":
        best = _polish_flex(cubic, best)
    return best


def _polish_flex(cubic, p):
    # Newton on (F, H) = 0 in extended precision, with H evaluated exactly.
    F = [to_scalar(c, "extended") for c in cubic]
    second = [[_forms.derivative(_forms.derivative(F, 3, i), 2, j) for j in range(3)] for i in range(3)]
    c = [to_scalar(x, "extended") for x in p.coords]
    k = max(range(3), key=lambda i: abs(c[i]))
    free = [i for i in range(3) if i != k]

    def system(a, b):
        X = list(c)
        X[free[0]], X[free[1]] = a, b
        m = _MP.matrix([[_forms.evaluate(second[i][j], 1, X) for j in range(3)] for i in range(3)])
        return [_forms.evaluate(F, 3, X), _MP.det(m)]

    sol = _MP.findroot(system, (c[free[0]], c[free[1]]))
    out = list(c)
    out[free[0]], out[free[1]] = sol[0], sol[1]
    return ProjPoint(tuple(out))


def random_point(E, seed):
    """Seeded point of E, found by solving the cubic along a random line.

    Raises:
        RefinementFailure: repeated root solves failed.
    """
    rng = np.random.default_rng(seed)
    F = [complex(c) for c in E.cubic]
    for _ in range(8):
        A = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        B = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        nodes = np.exp(2j * np.pi * np.arange(4) / 4)
        vals = np.array([_forms.evaluate(F, 3, A + s * B) for s in nodes])
        coeffs = np.fft.fft(vals) / 4
        # fft with e^{-2 pi i jk/4} recovers coefficients of s^j
        roots = np.roots(coeffs[::-1])
        if len(roots) != 3:
            continue
        s = roots[rng.integers(3)]
        X = ProjPoint(tuple(A + s * B))
        X = E.refine(X.to_precision(E.precision))
        if E.residual(X) <= 1e-3 * E.tol:
            return X
    raise RefinementFailure("could not place a random point on the curve")
