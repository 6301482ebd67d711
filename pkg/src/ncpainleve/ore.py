"""Exact model of the algebra R = <x, y> / (xy - yx = hbar y).

Elements are stored in normal order sum c_ab y^a x^b with rational
coefficients. Moving x past powers of y uses x^b y^c = y^c (x + c hbar)^b.

The module computations use the right module M = R / fR. Its submodule
generated by the images of y and x - s is cyclic, generated by
c = (x - s) + t y for generic t, and the annihilator of c is a principal right
ideal f'R. The y-free part of f' has the roots of the y-free part of f with s
replaced by s - hbar.
"""

import random
from collections import Counter
from fractions import Fraction
from math import comb

import sympy
from sympy.polys.matrices import DomainMatrix

QQ = sympy.QQ


class OreError(ValueError):
    """Base class for errors in the toy model."""


class NoCyclicGenerator(OreError):
    """No element of the seeded family generates the submodule."""


class NotPrincipal(OreError):
    """The annihilator is not generated by one element up to the bound."""


def _frac(c):
    return c if isinstance(c, Fraction) else Fraction(c)


class OrePoly:
    """Element sum c_ab y^a x^b of R.

    Args:
        hbar: rational deformation parameter.
        terms: mapping (a, b) -> coefficient.
    """

    __slots__ = ("hbar", "terms")

    def __init__(self, hbar, terms=None):
        self.hbar = _frac(hbar)
        clean = {}
        for k, v in (terms or {}).items():
            v = _frac(v)
            if v:
                clean[(int(k[0]), int(k[1]))] = v
        self.terms = clean

    @classmethod
    def x(cls, hbar):
        return cls(hbar, {(0, 1): 1})

    @classmethod
    def y(cls, hbar):
        return cls(hbar, {(1, 0): 1})

    @classmethod
    def const(cls, c, hbar):
        return cls(hbar, {(0, 0): c})

    @classmethod
    def from_nested(cls, coeffs, hbar):
        """coeffs[a][b] is the coefficient of y^a x^b."""
        terms = {}
        for a, row in enumerate(coeffs):
            for b, c in enumerate(row):
                terms[(a, b)] = Fraction(c)
        return cls(hbar, terms)

    @classmethod
    def from_f0(cls, poly_coeffs, hbar):
        """Polynomial in x from coefficients in increasing degree."""
        return cls(hbar, {(0, b): c for b, c in enumerate(poly_coeffs)})

    def _check(self, other):
        if self.hbar != other.hbar:
            raise OreError("hbar mismatch")

    def __add__(self, other):
        if not isinstance(other, OrePoly):
            other = OrePoly.const(other, self.hbar)
        self._check(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return OrePoly(self.hbar, out)

    __radd__ = __add__

    def __neg__(self):
        return OrePoly(self.hbar, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, OrePoly):
            c = _frac(other)
            return OrePoly(self.hbar, {k: v * c for k, v in self.terms.items()})
        return multiply(self, other)

    def __rmul__(self, other):
        return self * other

    def __eq__(self, other):
        if not isinstance(other, OrePoly):
            other = OrePoly.const(other, self.hbar)
        return self.hbar == other.hbar and self.terms == other.terms

    def __hash__(self):
        return hash((self.hbar, tuple(sorted(self.terms.items()))))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for (a, b), c in sorted(self.terms.items()):
            mono = "".join(s for s in (("y^%d" % a if a > 1 else "y") if a else "",
                                       ("x^%d" % b if b > 1 else "x") if b else ""))
            parts.append("%s%s" % (c, "*" + mono if mono else ""))
        return " + ".join(parts)

    @property
    def degree(self):
        """Total degree (-1 for zero)."""
        return max((a + b for a, b in self.terms), default=-1)

    def f0(self):
        """Coefficients of the y-free part, in increasing degree of x."""
        n = max((b for a, b in self.terms if a == 0), default=-1)
        return [self.terms.get((0, b), Fraction(0)) for b in range(n + 1)]

    def specialize(self, hbar):
        """Same coefficients with another hbar."""
        return OrePoly(hbar, self.terms)

    def to_nested(self):
        if not self.terms:
            return [[]]
        na = max(a for a, _ in self.terms) + 1
        nb = max(b for _, b in self.terms) + 1
        return [[str(self.terms.get((a, b), Fraction(0))) for b in range(nb)] for a in range(na)]


def multiply(f, g):
    """Product f g in normal order.

    Raises:
        OreError: the factors have different hbar.
    """
    f._check(g)
    h = f.hbar
    out = {}
    for (a, b), c1 in f.terms.items():
        for (c, d), c2 in g.terms.items():
            # y^a x^b y^c x^d = y^{a+c} (x + c h)^b x^d
            shift = c * h
            for k in range(b + 1):
                coef = c1 * c2 * comb(b, k) * shift ** (b - k)
                if coef:
                    key = (a + c, k + d)
                    out[key] = out.get(key, 0) + coef
    return OrePoly(h, out)


def normal_form(expression, hbar):
    """Normal form of a word in x, y or a list of (coefficient, word) pairs.

    Examples:
        normal_form("xy", h) == yx + h y.
    """
    if isinstance(expression, str):
        expression = [(1, expression)]
    total = OrePoly(hbar)
    for coef, word in expression:
        term = OrePoly.const(coef, hbar)
        for ch in word.replace("*", "").replace(" ", ""):
            if ch == "x":
                term = multiply(term, OrePoly.x(hbar))
            elif ch == "y":
                term = multiply(term, OrePoly.y(hbar))
            else:
                raise OreError("unknown letter %r" % ch)
        total = total + term
    return total


def _xsym():
    return sympy.Symbol("x")


def _as_sympy_poly(coeffs):
    x = _xsym()
    return sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(coeffs)], x, domain=QQ)


def point_maps(f):
    """Roots of the y-free part of f with multiplicity.

    Returns:
        Counter mapping exact roots (sympy numbers) to multiplicities.

    Raises:
        OreError: the y-free part vanishes.
    """
    c = f.f0()
    if not any(c):
        raise OreError("the y-free part is zero")
    roots = sympy.roots(_as_sympy_poly(c))
    if sum(roots.values()) != len(c) - 1:
        # fall back on exact algebraic roots
        roots = Counter(sympy.Poly(_as_sympy_poly(c)).all_roots())
    return Counter(roots)


def monomials_upto(N):
    return [(a, d - a) for d in range(N + 1) for a in range(d, -1, -1)]


def _vec(p, index):
    out = [QQ(0)] * len(index)
    for k, v in p.terms.items():
        if k not in index:
            raise OreError("element exceeds the degree bound")
        out[index[k]] = QQ(v.numerator, v.denominator)
    return out


def _matrix(columns, index):
    rows = [_vec(c, index) for c in columns]
    if not rows:
        return DomainMatrix.zeros((len(index), 0), QQ)
    return DomainMatrix(rows, (len(rows), len(index)), QQ).transpose()


def _mono(a, b, hbar):
    return OrePoly(hbar, {(a, b): 1})


def _rank(columns, index):
    if not columns:
        return 0
    return _matrix(columns, index).rank()


def annihilator_space(c, f, K, side="right"):
    """Elements r of degree <= K with c r in fR (right) or r c in Rf (left).

    Returns:
        list of OrePoly spanning the space.
    """
    h = f.hbar
    n, dc = f.degree, c.degree
    top = K + dc
    index = {m: i for i, m in enumerate(monomials_upto(top))}
    rs = [_mono(a, b, h) for a, b in monomials_upto(K)]
    gs = [_mono(a, b, h) for a, b in monomials_upto(top - n)] if top >= n else []
    if side == "right":
        cols = [multiply(c, r) for r in rs] + [-multiply(f, g) for g in gs]
    else:
        cols = [multiply(r, c) for r in rs] + [-multiply(g, f) for g in gs]
    M = _matrix(cols, index)
    ker = M.nullspace().to_Matrix()
    mons = monomials_upto(K)
    out = []
    for row in range(ker.rows):
        vec = ker.row(row)
        r = OrePoly(h, {mons[i]: Fraction(int(vec[i].p), int(vec[i].q)) for i in range(len(mons)) if vec[i] != 0})
        if r.terms:
            out.append(r)
    # reduce to a basis of the r-projection
    basis = []
    idx_r = {m: i for i, m in enumerate(monomials_upto(K))}
    for r in out:
        if _rank(basis + [r], idx_r) > len(basis):
            basis.append(r)
    return basis


def minimal_annihilator(c, f, N, side="right"):
    """Generator of the annihilator of c in R/fR and its principality check.

    Returns:
        (f', report) with the degree profile of the annihilator.

    Raises:
        NotPrincipal: the annihilator is not generated by one element up to N.
    """
    gen = None
    report = {}
    for K in range(0, N + 1):
        space = annihilator_space(c, f, K, side)
        report[K] = len(space)
        if gen is None and space:
            if len(space) != 1:
                raise NotPrincipal("annihilator has %d generators in degree %d" % (len(space), K))
            gen = space[0]
            gdeg = K
        elif gen is not None:
            expected = len(monomials_upto(K - gdeg))
            if len(space) != expected:
                raise NotPrincipal("annihilator dimension %d at degree %d, expected %d" % (len(space), K, expected))
    if gen is None:
        raise NotPrincipal("no annihilator up to degree %d" % N)
    return _monic(gen), report


def _monic(p):
    top = max(p.terms, key=lambda k: (k[0] + k[1], -k[0]))
    return p * (1 / p.terms[top])


def _generates(c, f, s, N, side="right"):
    # the truncated spans of c and of (y, x - s), each together with f, agree
    h = f.hbar
    n = f.degree
    index = {m: i for i, m in enumerate(monomials_upto(N))}
    low = [_mono(a, b, h) for a, b in monomials_upto(N - 1)]
    clow = [_mono(a, b, h) for a, b in monomials_upto(N - c.degree)]
    fs = [_mono(a, b, h) for a, b in monomials_upto(N - n)]
    xs = OrePoly.x(h) - s
    y = OrePoly.y(h)
    if side == "right":
        fpart = [multiply(f, g) for g in fs]
        cspan = [multiply(c, r) for r in clow] + fpart
        mspan = [multiply(y, r) for r in low] + [multiply(xs, r) for r in low] + fpart
    else:
        fpart = [multiply(g, f) for g in fs]
        cspan = [multiply(r, c) for r in clow] + fpart
        mspan = [multiply(r, y) for r in low] + [multiply(r, xs) for r in low] + fpart
    rc, rm = _rank(cspan, index), _rank(mspan, index)
    return rc == rm == _rank(cspan + mspan, index), rc, rm


def maximal_ideal(s, hbar):
    """Generators y and x - s of the two-sided ideal of the point s."""
    return [OrePoly.y(hbar), OrePoly.x(hbar) - s]


def ideal_product(*gen_lists):
    """Right-ideal generators of a product of two-sided ideals."""
    out = [gen_lists[0][0] * 0 + 1]
    for gens in gen_lists:
        out = [multiply(a, b) for a in out for b in gens]
    return out


def _span(gens, N, index, right=None):
    h = gens[0].hbar
    cols = []
    for g in gens:
        for a, b in monomials_upto(N - g.degree):
            cols.append(multiply(g, _mono(a, b, h)))
    return cols


def _column_basis(cols, index):
    if not cols:
        return []
    _, pivots = _matrix(cols, index).rref()
    return [cols[i] for i in pivots]


def fiber_action(f, ideal, N):
    """Right action of x on (I + fR) / (I y + fR) at degree bound N.

    Returns:
        (action matrix as a sympy Matrix, dimension of the quotient), or None
        when the bound is too small for the quotient to be spanned from
        degree N - 1.
    """
    h = f.hbar
    index = {m: i for i, m in enumerate(monomials_upto(N))}
    y = OrePoly.y(h)
    top = _column_basis(_span(ideal + [f], N, index), index)
    low = _span(ideal + [f], N - 1, index)
    U = _column_basis(_span([multiply(g, y) for g in ideal] + [f], N, index), index)
    reps = []
    rank = len(U)
    for c in low:
        if _rank(U + reps + [c], index) > rank:
            reps.append(c)
            rank += 1
    if rank != _rank(U + top, index):
        return None
    A = _matrix(U + reps, index)
    AtA = A.transpose() * A
    cols = []
    for r in reps:
        b = _matrix([multiply(r, OrePoly.x(h))], index)
        z = AtA.lu_solve(A.transpose() * b).to_Matrix()
        cols.append(list(z[len(U):, 0]))
    return sympy.Matrix(cols).T if cols else sympy.zeros(0, 0), len(reps)


def fiber_roots(f, ideal, N=None, max_extra=4):
    """Eigenvalues with multiplicity of x on the fiber of (I + fR)/fR over y = 0."""
    N0 = f.degree + max(g.degree for g in ideal) + 1 if N is None else N
    for N in range(N0, N0 + max_extra + 1):
        res = fiber_action(f, ideal, N)
        if res is not None:
            M, dim = res
            x = _xsym()
            poly = M.charpoly(x) if dim else sympy.Poly(1, x)
            return Counter(sympy.roots(sympy.Poly(poly.as_expr(), x))), sympy.Poly(poly.as_expr(), x), N
    raise OreError("quotient not stable up to degree %d" % (N0 + max_extra))


def cyclic_presentation(f, s, N=None, seed=0, attempts=8):
    """Generator c = (x - s) + t y of the submodule at s and the generator of its annihilator.

    Returns:
        (c, f', report)

    Raises:
        NoCyclicGenerator: no generator found in the seeded family.
        NotPrincipal: the annihilator of the generator is not principal.
    """
    s = _frac(s)
    h = f.hbar
    N = f.degree + 2 if N is None else N
    rng = random.Random(seed)
    ts = [Fraction(1)] + [Fraction(rng.randint(-9, 9) or 1, rng.randint(1, 5)) for _ in range(attempts - 1)]
    for t in ts:
        c = OrePoly.x(h) - s + OrePoly.y(h) * t
        ok, rc, rm = _generates(c, f, s, N)
        if ok:
            break
    else:
        raise NoCyclicGenerator("no cyclic generator among %d candidates" % len(ts))
    fp, profile = minimal_annihilator(c, f, N)
    return c, fp, {"generator_t": str(t), "span_ranks": (rc, rm), "annihilator_profile": profile}


def expected_roots(roots, s, hbar, shift_sign=-1):
    """Multiset with one copy of s replaced by s + shift_sign * hbar."""
    s_sym = sympy.Rational(s.numerator, s.denominator) if isinstance(s, Fraction) else sympy.sympify(s)
    hs = sympy.Rational(hbar.numerator, hbar.denominator)
    out = Counter(roots)
    if out.get(s_sym, 0) == 0:
        raise OreError("s is not a root of the y-free part")
    out[s_sym] -= 1
    if out[s_sym] == 0:
        del out[s_sym]
    out[s_sym + shift_sign * hs] += 1
    return out


def hecke_verify(f, s, N=None, seed=0, chain=()):
    """Root multiset of the submodule M m_s of M = R/fR, verified exactly.

    The roots are the eigenvalues of right multiplication by x on the fiber
    (M m_s) / (M m_s y). When the submodule is cyclic with a principal
    annihilator f'R, the roots of the y-free part of f' are compared as well.

    Args:
        f: element whose y-free part vanishes at s.
        s: rational root.
        N: degree bound (at least deg f + 2); raised automatically when the
            quotient is not yet stable.
        chain: further points s_2, s_3, ... for the submodule M m_s m_{s_2} ...

    Returns:
        (f', report). f' is the annihilator generator when principal, else
        the y-free characteristic polynomial as an element of R.

    Raises:
        OreError: s is not a root, or the bound is below deg f + 2.
    """
    s = _frac(s)
    h = f.hbar
    n = f.degree
    if N is not None and N < n + 2:
        raise OreError("N must be at least deg f + 2")
    roots = point_maps(f)
    expected = expected_roots(roots, s, h)
    ideals = [maximal_ideal(s, h)]
    for s2 in chain:
        s2 = _frac(s2)
        expected = expected_roots(expected, s2, h)
        ideals.append(maximal_ideal(s2, h))
    ideal = ideal_product(*ideals)
    got, poly, used = fiber_roots(f, ideal, N)
    report = {
        "roots_before": _roots_json(roots),
        "roots_after": _roots_json(got),
        "expected": _roots_json(expected),
        "degree_bound": used,
        "ok": got == expected,
    }
    fp = None
    if not chain:
        try:
            c, fp, info = cyclic_presentation(f, s, max(n + 2, N or 0), seed)
            report.update(info)
            report["cyclic"] = True
            report["annihilator_roots"] = _roots_json(point_maps(fp))
            report["ok"] = report["ok"] and Counter(point_maps(fp)) == expected
        except (NoCyclicGenerator, NotPrincipal) as exc:
            report["cyclic"] = False
            report["cyclic_failure"] = str(exc)
    if fp is None:
        coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(poly.all_coeffs())]
        fp = OrePoly.from_f0(coeffs, h)
    return fp, report


def _roots_json(counter):
    return sorted([[str(k), int(v)] for k, v in counter.items()])


def random_instance(seed, max_degree=4):
    """Seeded (f, s) with rational roots and a random y-part."""
    rng = random.Random(seed)
    h = Fraction(rng.choice([-1, 1]) * rng.randint(1, 5), rng.randint(1, 4))
    n = rng.randint(1, max_degree)
    roots = [Fraction(rng.randint(-6, 6), rng.randint(1, 3)) for _ in range(n)]
    f0 = OrePoly.const(1, h)
    for r in roots:
        f0 = multiply(f0, OrePoly.x(h) - r)
    f1 = OrePoly(h, {(a, b): Fraction(rng.randint(-3, 3), rng.randint(1, 3))
                     for a, b in monomials_upto(n - 1)})
    f = f0 + multiply(f1, OrePoly.y(h))
    return f, roots[0], h
