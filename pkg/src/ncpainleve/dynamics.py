"""Birational action of the level-preserving Weyl group on (D, P) states.

A state is a divisor D of g = (d-1)(d-2)/2 plane points together with 3d
points P of the cubic E. Moves are slot swaps and the root moves alpha(i, j):
interpolate the degree-d curve C through D and P with p_j replaced by
tau^{-3} p_j, then move D along C so that D + p_i ~ D' + tau^{-3} p_j.
Every other element is applied through a decomposition into these moves.

The construction needs the 3d points used for C to lie on a degree-d curve
section of E, which fixes the level chi = d + 1 (sum of P equal to 3t).
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import _forms
from .elliptic import (
    _MP,
    EllipticCurve,
    ProjPoint,
    as_point,
    check_constraint,
    proj_distance,
    random_point,
    solve_last_point,
    tau_pow,
    third_on_cubic,
    to_scalar,
)
from .plane_curves import (
    PlaneCurve,
    genus,
    interpolate_curve,
    residual_linear_equiv,
)
from .weyl import (
    NotInW0,
    WeylElement,
    act_on_params,
    chi,
    decompose_w0,
    from_generator,
    parse_word,
    root_pairs,
    word_element,
)

STATE_TOL = 1e-7


class DynamicsError(ValueError):
    """Failure of a move."""


class ConstraintViolated(DynamicsError):
    """The parameter points do not satisfy the sum constraint."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class PainleveState:
    """Divisor D in the plane and parameter points P on E at a fixed level."""

    E: EllipticCurve = field(compare=False)
    d: int
    chi_level: int
    D: tuple
    P: tuple

    @property
    def n(self):
        return 3 * self.d

    def distance(self, other):
        """Largest projective distance: P slot by slot, D as a multiset."""
        dists = [float(proj_distance(a, b)) for a, b in zip(self.P, other.P)]
        return max(dists + [divisor_distance(self.D, other.D)])

    def to_json(self):
        return {
            "curve": self.E.to_json(),
            "d": self.d,
            "chi": self.chi_level,
            "D": [p.to_json() for p in self.D],
            "P": [p.to_json() for p in self.P],
        }


@dataclass
class Trajectory:
    """Per-step records of an orbit; failure holds the error that stopped it."""

    records: list
    failure: str = None

    @property
    def states(self):
        return [r["state"] for r in self.records]

    def jsonl(self):
        import json

        lines = []
        for r in self.records:
            rec = {k: v for k, v in r.items() if k != "state"}
            rec.update(r["state"].to_json())
            del rec["curve"]
            lines.append(json.dumps(rec))
        if self.failure:
            lines.append(json.dumps({"failure": self.failure}))
        return "\n".join(lines)


def divisor_distance(A, B):
    """Largest distance under the best one-to-one matching of two point lists."""
    if not A and not B:
        return 0.0
    if len(A) != len(B):
        return np.inf
    cost = np.array([[float(proj_distance(a, b)) for b in B] for a in A])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def _sort_key(p):
    c = [complex(x) for x in p.coords]
    return tuple(round(abs(x), 6) for x in c) + tuple(round(x.real, 6) for x in c)


def new_state(E, d, chi_level, D, P, tol=STATE_TOL):
    """Validated state.

    Raises:
        ValueError: wrong sizes or points off the curve.
        ConstraintViolated: the sum of P misses 3(chi - d) t by more than tol.
    """
    D = tuple(as_point(p).to_precision(E.precision) for p in D)
    P = tuple(as_point(p).to_precision(E.precision) for p in P)
    if d < 2 or len(D) != genus(d) or len(P) != 3 * d:
        raise ValueError("state needs %d plane points and %d curve points" % (genus(d), 3 * d))
    for p in P:
        if not E.contains(p, max(tol, E.tol)):
            raise ValueError("parameter point off the curve (residual %.3g)" % E.residual(p))
    r = check_constraint(E, P, d, chi_level)
    if r > tol:
        raise ConstraintViolated("sum constraint residual %.3g" % r, r)
    return PainleveState(E, d, chi_level, D, P)


def random_curve(seed, precision="double", torsion=False, commutative=False):
    """Seeded smooth cubic with a flex base point and a random translation.

    torsion picks t among the other flexes (so 3t = O); commutative sets t = O.
    """
    rng = np.random.default_rng(seed)
    while True:
        cubic = rng.standard_normal(10) + 1j * rng.standard_normal(10)
        try:
            E = EllipticCurve(cubic, precision=precision)
        except ValueError:
            continue
        if commutative:
            return E
        if torsion:
            from .plane_curves import intersect

            H = _forms.hessian_form([complex(c) for c in E.cubic], 3)
            flexes = intersect(PlaneCurve(3, [complex(c) for c in E.cubic]), PlaneCurve(3, H)).points
            others = [p for p in flexes if proj_distance(p, E.O) > 1e-6]
            return E.with_translation(E.refine(others[0]))
        return E.with_translation(random_point(E, int(rng.integers(2**31))))


def random_state(E, d=3, seed=0, chi_level=None):
    """Seeded valid state: 3d - 1 random points, the last solved from the constraint."""
    rng = np.random.default_rng(seed)
    if chi_level is None:
        chi_level = d + 1
    P = [random_point(E, int(rng.integers(2**31))) for _ in range(3 * d - 1)]
    P.append(solve_last_point(E, P, d, chi_level))
    D = []
    for _ in range(genus(d)):
        v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        D.append(ProjPoint(tuple(to_scalar(c, E.precision) for c in v)))
    return new_state(E, d, chi_level, D, P)


def apply_swap(k, state):
    """Exchange slots k and k + 1 of P."""
    if not 1 <= k <= state.n - 1:
        raise DynamicsError("swap index out of range")
    P = list(state.P)
    P[k - 1], P[k] = P[k], P[k - 1]
    return replace(state, P=tuple(P))


def apply_permutation(perm, state):
    """Move the entry in slot i to slot perm(i)."""
    P = [None] * state.n
    for i, p in enumerate(perm):
        P[p - 1] = state.P[i]
    return replace(state, P=tuple(P))


def _interpolate_extended(points, d):
    # cubic through the points in extended precision, seeded by a double solve
    C0, diag = interpolate_curve(points, d)
    k = int(np.argmax(np.abs(C0.coeffs)))
    rows = [[to_scalar(c, "extended") for c in _row(p, d)] for p in points]
    n = _forms.num_monomials(d)
    free = [i for i in range(n) if i != k]
    A = _MP.matrix([[r[i] for i in free] for r in rows])
    b = _MP.matrix([-r[k] for r in rows])
    AH = A.H
    x = _MP.lu_solve(AH * A, AH * b)
    coeffs = [None] * n
    coeffs[k] = _MP.mpc(1)
    for idx, i in enumerate(free):
        coeffs[i] = x[idx]
    return coeffs, diag


def _row(p, d):
    c = as_point(p).coords
    return [c[0] ** a * c[1] ** b * c[2] ** e for a, b, e in _forms.monomials(d)]


def apply_alpha(i, j, state, method="auto", aux_degree=None, seed=0):
    """Root move alpha(i, j): p_i -> tau^3 p_i, p_j -> tau^-3 p_j, D -> D'.

    Args:
        i, j: distinct slots, 1-based.
        state: a valid state at level d + 1.
        method: "chord" (cubics only), "residual" (general) or "auto".
        aux_degree: auxiliary degree for the residual construction.
        seed: seed for generic auxiliary choices.

    Returns:
        (new state, diagnostics dict)

    Raises:
        DynamicsError: i = j or the state is not at the reference level.
        CurveError: interpolation or intersection failed (non-generic state).
    """
    if i == j:
        raise DynamicsError("alpha needs distinct slots")
    if state.chi_level != state.d + 1:
        raise DynamicsError("moves are defined at level chi = d + 1")
    E = state.E
    d = state.d
    pj_new = tau_pow(E, state.P[j - 1], -3)
    support = list(state.D) + [pj_new if k == j - 1 else p for k, p in enumerate(state.P)]
    if method == "auto":
        method = "chord" if d == 3 else "residual"
    if method == "chord":
        if d != 3:
            raise DynamicsError("chord construction needs d = 3")
        if E.precision == "extended":
            C, diag = _interpolate_extended(support, 3)
        else:
            curve, diag = interpolate_curve(support, 3)
            C = list(curve.coeffs)
        eps = E._eps()
        r = third_on_cubic(C, state.D[0], state.P[i - 1], eps=eps)
        D_new = (third_on_cubic(C, r, pj_new, eps=eps),)
    else:
        curve, diag = interpolate_curve(support, d)
        Dp = residual_linear_equiv(curve, list(state.D) + [state.P[i - 1]], pj_new,
                                   m=aux_degree, seed=seed)
        D_new = tuple(sorted(Dp.points, key=_sort_key))
    P = list(state.P)
    P[i - 1] = tau_pow(E, P[i - 1], 3)
    P[j - 1] = pj_new
    new = PainleveState(E, d, state.chi_level, D_new, tuple(P))
    info = {
        "s_min": diag.s_min,
        "s_second": diag.s_second,
        "constraint_residual": float(check_constraint(E, new.P, d, new.chi_level)),
    }
    return new, info


def apply_element(w, state, route="direct", method="auto"):
    """Act by an element of W0.

    route "direct" splits the translation into root moves alpha(i, j) and then
    permutes; route "word" runs the adjacent-generator word of decompose_w0,
    rightmost token first.

    Raises:
        NotInW0: chi(w) is not zero.
    """
    if chi(w) != 0:
        raise NotInW0("chi(w) = %d" % chi(w))
    if route == "word":
        return apply_tokens(decompose_w0(w), state, method=method)
    for i, j, m in root_pairs(w.trans):
        for _ in range(m):
            state, _ = apply_alpha(i, j, state, method=method)
    return apply_permutation(w.perm, state)


def apply_tokens(tokens, state, method="auto"):
    """Apply a word of primitive tokens (s_k with k >= 1, a(i,j)), rightmost first."""
    for tok in reversed(parse_word(tokens)):
        w = from_generator(tok, state.n)
        if tok.startswith("a("):
            i, j = [k + 1 for k, v in enumerate(w.trans) if v == 1][0], \
                [k + 1 for k, v in enumerate(w.trans) if v == -1][0]
            state, _ = apply_alpha(i, j, state, method=method)
        elif tok.startswith("s") and w.trans == (0,) * state.n:
            k = int(tok.lstrip("s_"))
            if k == 0:
                state = apply_element(w, state, method=method)
            else:
                state = apply_swap(k, state)
        else:
            raise NotInW0("token %s is not a primitive move" % tok)
    return state


def apply_word(word, state, method="auto"):
    """Act by a word; primitive words run token by token, others via their product."""
    tokens = parse_word(word)
    if all(t.startswith("a(") or (t.startswith("s") and t.lstrip("s_") != "0") for t in tokens):
        return apply_tokens(tokens, state, method=method)
    return apply_element(word_element(tokens, state.n), state, method=method)


def s0_element(n):
    return from_generator("s0", n)


def s0_move(state, method="auto"):
    """The reflection s_0: P -> (tau^3 p_n, p_2, ..., p_{n-1}, tau^-3 p_1)."""
    return apply_element(s0_element(state.n), state, method=method)


def renormalize(state):
    """Project P back onto E and recanonicalize every point."""
    P = tuple(state.E.refine(p) for p in state.P)
    return replace(state, P=P)


def orbit(state, word, N, renormalize_steps=True, method="auto"):
    """Iterate a W0 word N times.

    Returns:
        Trajectory; on failure the records stop at the last good state and
        failure describes the error.
    """
    tokens = parse_word(word)
    w = word_element(tokens, state.n)
    if chi(w) != 0:
        raise NotInW0("word changes the level")
    records = [_record(0, state)]
    for step in range(1, N + 1):
        try:
            state = apply_word(tokens, state, method=method)
            if renormalize_steps:
                state = renormalize(state)
        except ValueError as exc:
            return Trajectory(records, "step %d: %s" % (step, exc))
        records.append(_record(step, state))
    return Trajectory(records)


def _record(step, state):
    return {
        "step": step,
        "state": state,
        "constraint_residual": float(check_constraint(state.E, state.P, state.d, state.chi_level)),
    }


def supporting_curve(state):
    """Degree-d curve through D and P with the last point shifted by tau^-3.

    This is the curve used by the move alpha(i, n) for any i.
    """
    pn = tau_pow(state.E, state.P[-1], -3)
    curve, _ = interpolate_curve(list(state.D) + list(state.P[:-1]) + [pn], state.d)
    return curve


def equivariance_residual(w, state, route="direct"):
    """Distance between the P-side of a move and the Weyl action on P."""
    moved = apply_element(w, state, route=route)
    expected = act_on_params(w, state.P, state.E)
    return max(proj_distance(a, b) for a, b in zip(moved.P, expected))
