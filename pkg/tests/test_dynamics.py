import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ncpainleve.dynamics import (
    ConstraintViolated,
    DynamicsError,
    apply_alpha,
    apply_element,
    apply_swap,
    divisor_distance,
    equivariance_residual,
    new_state,
    orbit,
    random_curve,
    random_state,
    s0_move,
    supporting_curve,
)
from ncpainleve.elliptic import check_constraint, proj_distance, random_point, tau_pow
from ncpainleve.plane_curves import evaluate
from ncpainleve.weyl import NotInW0, act_on_params, alpha, from_generator, rotation, word_element


@pytest.fixture(scope="module")
def curve():
    return random_curve(3)


@pytest.fixture(scope="module")
def state(curve):
    return random_state(curve, 3, seed=4)


def test_new_state_validation(curve, state):
    assert len(state.D) == 1 and len(state.P) == 9
    assert check_constraint(curve, state.P, 3, 4) < 1e-9
    P = list(state.P)
    P[0] = random_point(curve, 999)
    with pytest.raises(ConstraintViolated) as info:
        new_state(curve, 3, 4, state.D, P)
    assert info.value.residual > 1e-7
    with pytest.raises(ValueError):
        new_state(curve, 3, 4, [], state.P)


def test_swap(state):
    assert apply_swap(2, apply_swap(2, state)).P == state.P
    sw = apply_swap(3, state)
    assert sw.P[2] == state.P[3] and sw.P[3] == state.P[2] and sw.D == state.D
    assert apply_element(from_generator("s3", 9), state).P == sw.P
    with pytest.raises(DynamicsError):
        apply_swap(9, state)


def test_alpha_inverse_and_constraint(state):
    moved, info = apply_alpha(1, 2, state)
    assert info["constraint_residual"] < 1e-9
    back, _ = apply_alpha(2, 1, moved)
    assert state.distance(back) < 1e-6
    with pytest.raises(DynamicsError):
        apply_alpha(3, 3, state)


def test_alpha_parameter_side(curve, state):
    moved, _ = apply_alpha(4, 7, state)
    assert proj_distance(moved.P[3], tau_pow(curve, state.P[3], 3)) < 1e-12
    assert proj_distance(moved.P[6], tau_pow(curve, state.P[6], -3)) < 1e-12


def test_chord_equals_residual(state):
    a, _ = apply_alpha(2, 5, state, method="chord")
    b, _ = apply_alpha(2, 5, state, method="residual")
    c, _ = apply_alpha(2, 5, state, method="residual", aux_degree=2)
    assert a.distance(b) < 1e-6 and b.distance(c) < 1e-6


def test_root_sum_two_ways(state):
    direct = apply_element(alpha(9, 1, 3), state)
    via = apply_element(word_element("a(1,2) a(2,3)", 9), state, route="word")
    assert direct.distance(via) < 1e-6


def test_lattice_commutes(state):
    a = apply_element(word_element("a(1,2) a(3,4)", 9), state)
    b = apply_alpha(1, 2, apply_alpha(3, 4, state)[0])[0]
    c = apply_alpha(3, 4, apply_alpha(1, 2, state)[0])[0]
    assert b.distance(c) < 1e-6 and a.distance(b) < 1e-6


def test_not_in_w0(state):
    with pytest.raises(NotInW0):
        apply_element(rotation(9), state)


def test_wrong_level_rejected(curve):
    st_ = random_state(curve, 3, seed=5, chi_level=1)
    with pytest.raises(DynamicsError):
        apply_alpha(1, 2, st_)


def test_s0_involution_and_parameters(curve, state):
    once = s0_move(state)
    assert state.distance(s0_move(once)) < 1e-6
    assert proj_distance(once.P[0], tau_pow(curve, state.P[8], 3)) < 1e-9
    assert proj_distance(once.P[8], tau_pow(curve, state.P[0], -3)) < 1e-9
    assert once.P[1:8] == state.P[1:8]


def test_equivariance(state):
    for word in ("a(1,2) s4 a(6,3)", "s0 s2 a(9,1)", "s1 s2 s3"):
        assert equivariance_residual(word_element(word, 9), state) < 1e-9


def test_orbit_zero_and_inverse(state):
    t0 = orbit(state, "a(1,2) s1", 0)
    assert len(t0.records) == 1 and t0.states[0] is state
    fwd = orbit(state, "a(1,2) s1", 10)
    back = orbit(fwd.states[-1], "s1 a(2,1)", 10)
    assert fwd.failure is None and back.failure is None
    assert state.distance(back.states[-1]) < 1e-5
    assert all("constraint_residual" in r for r in fwd.records)


def test_orbit_rejects_level_change(state):
    with pytest.raises(NotInW0):
        orbit(state, "g", 3)


def test_commutative_curve_invariant():
    E = random_curve(8, commutative=True)
    st_ = random_state(E, 3, seed=2)
    C0 = supporting_curve(st_)
    moved, _ = apply_alpha(1, 2, st_)
    assert C0.distance(supporting_curve(moved)) < 1e-7
    assert abs(evaluate(C0, moved.D[0])) < 1e-7


def test_torsion_lattice_moves_fix_parameters():
    E = random_curve(9, torsion=True)
    st_ = random_state(E, 3, seed=1)
    moved, _ = apply_alpha(2, 6, st_)
    assert max(proj_distance(a, b) for a, b in zip(moved.P, st_.P)) < 1e-12


def test_extended_precision_move():
    E = random_curve(3, precision="extended")
    st_ = random_state(E, 3, seed=4)
    moved, info = apply_alpha(1, 2, st_)
    assert info["constraint_residual"] < 1e-25
    back, _ = apply_alpha(2, 1, moved)
    assert st_.distance(back) < 1e-20


def test_quartic_moves():
    E = random_curve(12)
    st_ = random_state(E, 4, seed=3)
    assert len(st_.D) == 3 and len(st_.P) == 12
    moved, info = apply_alpha(1, 5, st_)
    assert len(moved.D) == 3 and info["constraint_residual"] < 1e-8
    back, _ = apply_alpha(5, 1, moved)
    assert divisor_distance(back.D, st_.D) < 1e-6
    w = word_element("a(2,3) s5", 12)
    assert equivariance_residual(w, st_) < 1e-9


def test_divisor_distance_matching(state):
    assert divisor_distance(list(state.P), list(state.P[::-1])) == 0.0
    assert divisor_distance([], []) == 0.0
    assert divisor_distance(list(state.P[:2]), list(state.P[:3])) == np.inf


@settings(max_examples=10, deadline=None)
@given(st.lists(st.sampled_from(["s1", "s4", "s8", "a(1,2)", "a(5,9)", "a(3,7)"]), min_size=1, max_size=4))
def test_word_then_inverse_word(word):
    E = random_curve(3)
    st_ = random_state(E, 3, seed=4)
    w = word_element(word, 9)
    from ncpainleve.weyl import inverse

    there = apply_element(w, st_)
    back = apply_element(inverse(w), there)
    assert st_.distance(back) < 1e-6
    assert max(proj_distance(a, b) for a, b in zip(there.P, act_on_params(w, st_.P, E))) < 1e-9
