"""Homogeneous forms in three variables.

Coefficient vectors use graded-lex order: the exponent of x descends first,
then the exponent of y. For degree 3 this is
x^3, x^2y, x^2z, xy^2, xyz, xz^2, y^3, y^2z, yz^2, z^3.

Evaluation helpers are written with plain scalar arithmetic so that they work
for Python complex numbers and for mpmath.mpc alike.
"""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def monomials(d):
    """Exponent triples of degree d in graded-lex order."""
    return tuple((a, b, d - a - b) for a in range(d, -1, -1) for b in range(d - a, -1, -1))


def num_monomials(d):
    return (d + 1) * (d + 2) // 2


@lru_cache(maxsize=None)
def monomial_index(d):
    return {e: i for i, e in enumerate(monomials(d))}


@lru_cache(maxsize=None)
def _derivative_table(d, var):
    # (source index, factor, target index in degree d-1)
    target = monomial_index(d - 1)
    table = []
    for i, e in enumerate(monomials(d)):
        if e[var] == 0:
            continue
        f = list(e)
        f[var] -= 1
        table.append((i, e[var], target[tuple(f)]))
    return tuple(table)


def derivative(coeffs, d, var):
    """Coefficients of the partial derivative in variable var (0, 1 or 2)."""
    out = [0] * num_monomials(d - 1)
    for i, k, j in _derivative_table(d, var):
        out[j] = out[j] + k * coeffs[i]
    return out


def _powers(p, d):
    pw = []
    for c in p:
        row = [1]
        for _ in range(d):
            row.append(row[-1] * c)
        pw.append(row)
    return pw


def evaluate(coeffs, d, p):
    """Value of the form at the coordinate triple p."""
    pw = _powers(p, d)
    total = 0
    for c, (a, b, e) in zip(coeffs, monomials(d)):
        if c != 0:
            total = total + c * pw[0][a] * pw[1][b] * pw[2][e]
    return total


def gradient(coeffs, d, p):
    """Gradient of the form at p as a list of three scalars."""
    if d == 0:
        return [0, 0, 0]
    pw = _powers(p, d)
    g = [0, 0, 0]
    for c, (a, b, e) in zip(coeffs, monomials(d)):
        if c == 0:
            continue
        if a:
            g[0] = g[0] + c * a * pw[0][a - 1] * pw[1][b] * pw[2][e]
        if b:
            g[1] = g[1] + c * b * pw[0][a] * pw[1][b - 1] * pw[2][e]
        if e:
            g[2] = g[2] + c * e * pw[0][a] * pw[1][b] * pw[2][e - 1]
    return g


def monomial_vector(p, d):
    """Row of monomial values at p (numpy, complex)."""
    p = np.asarray(p, dtype=complex)
    return np.array([p[0] ** a * p[1] ** b * p[2] ** e for a, b, e in monomials(d)])


def evaluation_matrix(points, d):
    """Rows of monomial values, one row per point."""
    if len(points) == 0:
        return np.zeros((0, num_monomials(d)), dtype=complex)
    pts = np.asarray(points, dtype=complex)
    ex = np.array(monomials(d))
    return np.prod(pts[:, None, :] ** ex[None, :, :], axis=2)


def multiply(c1, d1, c2, d2):
    """Coefficients of the product of two forms."""
    idx = monomial_index(d1 + d2)
    out = np.zeros(num_monomials(d1 + d2), dtype=complex)
    for a, e1 in zip(c1, monomials(d1)):
        if a == 0:
            continue
        for b, e2 in zip(c2, monomials(d2)):
            if b == 0:
                continue
            out[idx[(e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2])]] += a * b
    return out


_SAMPLE_RNG_SEED = 91173


@lru_cache(maxsize=None)
def _fit_points(d):
    # Oversampled fixed points on the unit sphere for fitting forms.
    rng = np.random.default_rng(_SAMPLE_RNG_SEED + d)
    n = 3 * num_monomials(d)
    pts = rng.standard_normal((n, 3)) + 1j * rng.standard_normal((n, 3))
    pts /= np.linalg.norm(pts, axis=1)[:, None]
    return pts


def fit_form(func, d):
    """Coefficients of a degree-d form from a callable on coordinate arrays.

    Returns the coefficients and the relative least-squares residual, which is
    at rounding level when func really is a form of degree d.
    """
    pts = _fit_points(d)
    vals = np.array([func(p) for p in pts], dtype=complex)
    V = evaluation_matrix(pts, d)
    coeffs, *_ = np.linalg.lstsq(V, vals, rcond=None)
    resid = np.linalg.norm(V @ coeffs - vals) / max(np.linalg.norm(vals), 1e-300)
    return coeffs, resid


def compose_linear(coeffs, d, M):
    """Coefficients of q -> F(M q)."""
    F = np.asarray(coeffs, dtype=complex)
    M = np.asarray(M, dtype=complex)
    pts = _fit_points(d)
    vals = evaluation_matrix(pts @ M.T, d) @ F
    V = evaluation_matrix(pts, d)
    out, *_ = np.linalg.lstsq(V, vals, rcond=None)
    return out


def hessian_form(coeffs, d):
    """Coefficients of the Hessian determinant, a form of degree 3(d-2)."""
    second = [[derivative(derivative(coeffs, d, i), d - 1, j) for j in range(3)] for i in range(3)]

    def h(p):
        m = np.array([[evaluate(second[i][j], d - 2, p) for j in range(3)] for i in range(3)])
        return np.linalg.det(m)

    out, _ = fit_form(h, 3 * (d - 2))
    return out
