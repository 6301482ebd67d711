"""Three-generator Sklyanin algebra truncated at degree 4.

The relations are the cyclic derivatives of the superpotential
W = a x1x2x3 + b x3x2x1 + (c/3)(x1^3 + x2^3 + x3^3). Elements of degree n are
coordinate vectors in a normal-form basis of words chosen greedily in lex
order against the degree-n part of the relation ideal.

The point scheme is the cubic E = {det N(p) = 0}, where N(p) contracts the
relations with p in the left slot. The kernel of N(p) is a translate of p,
and the translation t used for twisted evaluation is fixed by requiring the
relations to vanish on words evaluated along tau-orbits: the first letter of
a degree-n word is read at tau^{n-1} p and the last letter at p.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import _forms
from .elliptic import (
    EllipticCurve,
    ProjPoint,
    as_point,
    find_flex,
    proj_distance,
    random_point,
    sub,
    neg,
    tau_pow,
)

MAX_DEGREE = 4
RANK_TOL = 1e-9


class SklyaninError(ValueError):
    """Base class for algebra failures."""


class DegenerateParams(SklyaninError):
    """The relations do not give the expected Hilbert dimensions."""


class IdenticallyZeroDet(SklyaninError):
    """The relation pencil is degenerate everywhere (the point scheme is the plane)."""


class NonTranslation(SklyaninError):
    """The kernel map of the relation pencil is not a translation."""


class KernelDimensionError(SklyaninError):
    """A kernel had an unexpected dimension."""


def _word_index(word):
    idx = 0
    for i in word:
        idx = 3 * idx + i
    return idx


def superpotential_relations(a, b, c):
    """Relations as a 3 x 9 array: row k holds coefficients of x_i x_j at 3i + j."""
    W = {(0, 1, 2): a, (2, 1, 0): b, (0, 0, 0): c / 3, (1, 1, 1): c / 3, (2, 2, 2): c / 3}
    R = np.zeros((3, 9), dtype=complex)
    for word, coeff in W.items():
        for pos, letter in enumerate(word):
            rest = word[pos + 1:] + word[:pos]
            R[letter, _word_index(rest)] += coeff
    return R


def _orthonormal_span(M, tol=RANK_TOL):
    if M.shape[1] == 0:
        return np.zeros((M.shape[0], 0), dtype=complex)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    if len(s) == 0 or s[0] == 0:
        return np.zeros((M.shape[0], 0), dtype=complex)
    return U[:, s > tol * s[0]]


def null_space(M, tol=RANK_TOL, floor=0.0):
    """Orthonormal basis (columns) of the right kernel.

    The threshold is tol times the largest singular value, or times floor
    when that is larger (so a matrix of pure roundoff counts as zero).
    """
    M = np.atleast_2d(M)
    _, s, Vh = np.linalg.svd(M, full_matrices=True)
    scale = max(s[0] if len(s) else 0.0, floor) or 1.0
    rank = int(np.sum(s > tol * scale))
    return Vh[rank:].conj().T


@dataclass(frozen=True, eq=False)
class GradedElement:
    """Homogeneous element of the algebra in normal-form coordinates."""

    algebra: "SklyaninAlgebra" = field(repr=False)
    degree: int
    coeffs: np.ndarray

    def __add__(self, other):
        _same(self, other)
        return GradedElement(self.algebra, self.degree, self.coeffs + other.coeffs)

    def __sub__(self, other):
        _same(self, other)
        return GradedElement(self.algebra, self.degree, self.coeffs - other.coeffs)

    def __neg__(self):
        return GradedElement(self.algebra, self.degree, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, GradedElement):
            return self.algebra.multiply(self, other)
        return GradedElement(self.algebra, self.degree, self.coeffs * other)

    def __rmul__(self, other):
        return GradedElement(self.algebra, self.degree, self.coeffs * other)

    def norm(self):
        return float(np.linalg.norm(self.coeffs))

    def to_json(self):
        return [[c.real, c.imag] for c in self.coeffs]


def _same(u, v):
    if u.degree != v.degree:
        raise SklyaninError("degree mismatch")


class SklyaninAlgebra:
    """Graded Sklyanin algebra up to degree 4 with precomputed normal forms.

    Args:
        a, b, c: superpotential parameters.
        curve_seed: seed for sample points used by the point-scheme fit.

    Raises:
        DegenerateParams: the Hilbert dimensions are not 1, 3, 6, 10, 15.
    """

    def __init__(self, a, b, c, curve_seed=0):
        self.params = (complex(a), complex(b), complex(c))
        self.relations = superpotential_relations(*self.params)
        if np.linalg.matrix_rank(self.relations, tol=RANK_TOL * max(np.abs(self.relations).max(), 1e-300)) != 3 \
                or np.abs(self.relations).max() == 0:
            raise DegenerateParams("relation space does not have dimension 3")
        self.curve_seed = curve_seed
        self._idx_cache = {}
        self.words = {0: [()]}
        self.basis = {0: np.ones((1, 1), dtype=complex)}
        self.reduce = {0: np.ones((1, 1), dtype=complex)}
        for n in range(1, MAX_DEGREE + 1):
            self._build_degree(n)
        self._scheme = None

    def _build_degree(self, n):
        size = 3 ** n
        if n < 2:
            ideal = np.zeros((size, 0), dtype=complex)
        else:
            R = self.relations.T
            blocks = [np.kron(np.eye(3 ** k), np.kron(R, np.eye(3 ** (n - 2 - k)))) for k in range(n - 1)]
            ideal = _orthonormal_span(np.hstack(blocks))
        expected = (n + 1) * (n + 2) // 2
        if size - ideal.shape[1] != expected:
            raise DegenerateParams("dim A_%d = %d, expected %d" % (n, size - ideal.shape[1], expected))
        Q = ideal.copy()
        chosen = []
        for word in itertools.product(range(3), repeat=n):
            e = np.zeros(size, dtype=complex)
            e[_word_index(word)] = 1
            r = e - Q @ (Q.conj().T @ e) if Q.shape[1] else e
            nr = np.linalg.norm(r)
            if nr > 1e-6:
                chosen.append(word)
                Q = np.hstack([Q, (r / nr)[:, None]])
            if len(chosen) == expected:
                break
        B = np.zeros((size, expected), dtype=complex)
        for k, word in enumerate(chosen):
            B[_word_index(word), k] = 1
        full = np.hstack([B, ideal])
        self.words[n] = chosen
        self.basis[n] = B
        self.reduce[n] = np.linalg.inv(full)[:expected]

    def dim(self, n):
        return len(self.words[n])

    def element(self, degree, coeffs):
        c = np.asarray(coeffs, dtype=complex).ravel()
        if len(c) != self.dim(degree):
            raise SklyaninError("expected %d coefficients" % self.dim(degree))
        return GradedElement(self, degree, c)

    def zero(self, degree):
        return self.element(degree, np.zeros(self.dim(degree)))

    def gen(self, i):
        """Generator x_i for i in 1, 2, 3."""
        c = np.zeros(3, dtype=complex)
        c[i - 1] = 1
        return self.element(1, c)

    def linear(self, coeffs):
        """Degree-1 element sum c_i x_i."""
        return self.element(1, coeffs)

    def from_tensor(self, n, tensor):
        """Normal form of a tensor in the free algebra of degree n."""
        return self.element(n, self.reduce[n] @ np.asarray(tensor, dtype=complex))

    def tensor(self, u):
        """Lift to the free algebra through the basis words."""
        return self.basis[u.degree] @ u.coeffs

    def multiply(self, u, v):
        n = u.degree + v.degree
        if n > MAX_DEGREE:
            raise SklyaninError("degree overflow: %d > %d" % (n, MAX_DEGREE))
        return self.from_tensor(n, np.kron(self.tensor(u), self.tensor(v)))

    def relation_elements(self):
        """The three relations as free-algebra tensors of degree 2."""
        return [self.relations[k] for k in range(3)]

    def is_commutative(self):
        u, v = self.gen(1), self.gen(2)
        return np.linalg.norm((u * v - v * u).coeffs) < 1e-12

    # point scheme

    def pencil(self, p):
        """N(p): relations contracted with p in the left slot (rows = relations)."""
        p = np.asarray(p, dtype=complex)
        return np.einsum("kij,i->kj", self.relations.reshape(3, 3, 3), p)

    def point_scheme(self):
        """Cubic E, kernel translation and the calibrated translation t.

        Raises:
            IdenticallyZeroDet: the determinant of the pencil vanishes identically.
            NonTranslation: the kernel map is not a translation on samples.
        """
        if self._scheme is None:
            self._scheme = _point_scheme(self)
        return self._scheme

    @property
    def curve(self):
        return self.point_scheme().E

    def kernel_point(self, p):
        """Kernel direction of N(p)."""
        _, _, Vh = np.linalg.svd(self.pencil(as_point(p).as_array()))
        return ProjPoint(tuple(Vh[-1].conj()))

    # twisted evaluation

    def shifted_points(self, p, n, E=None):
        """Canonical lifts of tau^j p for j = 0..n-1."""
        E = E or self.curve
        return [tau_pow(E, p, j).as_array() for j in range(n)]

    def restrict_coords(self, u, pts):
        """Twisted evaluation with explicit lifts pts[j] of tau^j p."""
        n = u.degree
        if n == 0:
            return complex(u.coeffs[0])
        vec = np.asarray(pts[n - 1], dtype=complex)
        for j in range(n - 2, -1, -1):
            vec = np.outer(vec, pts[j]).ravel()
        return complex(vec[self._word_indices(n)] @ u.coeffs)

    def _word_indices(self, n):
        if n not in self._idx_cache:
            self._idx_cache[n] = np.array([_word_index(w) for w in self.words[n]])
        return self._idx_cache[n]

    def restrict_to_E(self, u, p, E=None, check=True):
        """Twisted evaluation: letter k of a word is read at tau^{n-k} p.

        Raises:
            SklyaninError: p is off the curve.
        """
        E = E or self.curve
        p = as_point(p)
        if check and not E.contains(p, 1e-6):
            raise SklyaninError("point is not on the point-scheme curve")
        return self.restrict_coords(u, self.shifted_points(p, u.degree, E))

    # central element and point ideals

    def central_element(self):
        """Unit-norm degree-3 element commuting with the generators.

        Returns:
            (element, kernel dimension). Dimension 10 signals commutative
            parameters.

        Raises:
            KernelDimensionError: the commutator map is injective.
        """
        cols = []
        for k in range(self.dim(3)):
            e = np.zeros(self.dim(3), dtype=complex)
            e[k] = 1
            th = self.element(3, e)
            cols.append(np.concatenate([(th * self.gen(i) - self.gen(i) * th).coeffs for i in (1, 2, 3)]))
        M = np.array(cols).T
        ker = null_space(M, tol=1e-9, floor=1.0)
        if ker.shape[1] == 0:
            raise KernelDimensionError("no central element in degree 3")
        v = ker[:, 0]
        v = v / v[np.argmax(np.abs(v))] * np.abs(v).max()
        return self.element(3, v / np.linalg.norm(v)), ker.shape[1]

    def forms_vanishing_at(self, point):
        """Two orthonormal linear forms vanishing at a plane point."""
        a = as_point(point).as_array()
        ker = null_space(a[None, :])
        return self.linear(ker[:, 0]), self.linear(ker[:, 1])

    def point_ideal(self, p):
        """Degree-one generators of the right ideal of the point module at p.

        The point module of p has e_j at tau^j p, so the annihilator of its
        generator in degree one is cut out at p itself. These forms are the
        ones whose left syzygy has common zero tau^-2 p; shifting the module
        by one degree (generator at tau^-1 p) gives the syzygy zero tau^-3 p,
        see syzygy.
        """
        return self.forms_vanishing_at(p)

    def left_syzygy(self, l1, l2):
        """(u1, u2) spanning the kernel of (u1, u2) -> u1 l1 + u2 l2 in A_2.

        Raises:
            KernelDimensionError: the kernel is not one-dimensional.
        """
        cols = []
        for l in (l1, l2):
            for i in (1, 2, 3):
                cols.append((self.gen(i) * l).coeffs)
        ker = null_space(np.array(cols).T, tol=1e-8)
        if ker.shape[1] != 1:
            raise KernelDimensionError("syzygy kernel has dimension %d" % ker.shape[1])
        v = ker[:, 0]
        return self.linear(v[:3]), self.linear(v[3:])

    def syzygy(self, p):
        """Syzygy of the point module generated in degree -1 at tau^-1 p.

        Returns:
            (u1, u2, q) with u1 l1 + u2 l2 = 0 for the forms l vanishing at
            tau^-1 p, and q the common zero of u1, u2; q = tau^-3 p.
        """
        E = self.curve
        l1, l2 = self.forms_vanishing_at(tau_pow(E, p, -1))
        u1, u2 = self.left_syzygy(l1, l2)
        q = ProjPoint(tuple(np.cross(u1.coeffs, u2.coeffs)))
        return u1, u2, q

    def express_central_through_point(self, p, theta=None):
        """Solve Theta = l1 f1 + l2 f2 for the forms l vanishing at p.

        Returns:
            (f1, f2, residual, ambiguity dimension)

        Raises:
            SklyaninError: no solution within tolerance.
        """
        if theta is None:
            theta, _ = self.central_element()
        l1, l2 = self.forms_vanishing_at(p)
        cols = []
        for l in (l1, l2):
            for k in range(self.dim(2)):
                e = np.zeros(self.dim(2), dtype=complex)
                e[k] = 1
                cols.append((l * self.element(2, e)).coeffs)
        M = np.array(cols).T
        sol, *_ = np.linalg.lstsq(M, theta.coeffs, rcond=None)
        resid = float(np.linalg.norm(M @ sol - theta.coeffs))
        amb = null_space(M, tol=1e-9).shape[1]
        if resid > 1e-8:
            raise SklyaninError("central element not in the ideal (residual %.3g)" % resid)
        return self.element(2, sol[:6]), self.element(2, sol[6:]), resid, amb


@dataclass
class PointSchemeData:
    """Point-scheme curve with calibrated translation.

    kernel_shift is the translation realized by the kernel map p -> ker N(p);
    the calibrated t is the one for which the relations vanish under twisted
    evaluation, and report records the residuals for both orientations.
    """

    E: EllipticCurve
    kernel_shift: ProjPoint
    report: dict

    @property
    def t(self):
        return self.E.t


def _point_scheme(alg):
    scale = np.abs(alg.relations).max() ** 3
    coeffs, fit_resid = _forms.fit_form(lambda p: np.linalg.det(alg.pencil(p)), 3)
    if np.abs(coeffs).max() < 1e-10 * scale:
        raise IdenticallyZeroDet("the relation pencil is singular everywhere")
    E0 = EllipticCurve(coeffs)
    rng = np.random.default_rng(alg.curve_seed)
    samples = [random_point(E0, int(rng.integers(2**31))) for _ in range(21)]
    q0 = samples[0]
    shift = sub(E0, alg.kernel_point(q0), q0)
    worst = 0.0
    for p in samples[1:]:
        worst = max(worst, proj_distance(alg.kernel_point(p), E0.refine(tau_pow(E0.with_translation(shift), p, 1))))
    if worst > 1e-7:
        raise NonTranslation("kernel map deviates from a translation by %.3g" % worst)
    residuals = {}
    for label, cand in (("kernel_shift", shift), ("inverse_kernel_shift", neg(E0, shift))):
        Ec = E0.with_translation(cand)
        r = 0.0
        for p in samples[1:6]:
            tp = tau_pow(Ec, p, 1).as_array()
            pa = p.as_array()
            for k in range(3):
                r = max(r, abs(np.kron(tp, pa) @ alg.relations[k]))
        residuals[label] = r
    label = min(residuals, key=residuals.get)
    t = shift if label == "kernel_shift" else neg(E0, shift)
    E = E0.with_translation(t)
    report = {
        "det_fit_residual": float(fit_resid),
        "translation_residual": float(worst),
        "relation_residuals": {k: float(v) for k, v in residuals.items()},
        "orientation": label,
    }
    return PointSchemeData(E, shift, report)


def random_params(seed):
    """Seeded generic parameters."""
    rng = np.random.default_rng(seed)
    a, b, c = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    return a, b, c
