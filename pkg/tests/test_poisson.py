import numpy as np
import pytest

from ncpainleve.elliptic import ProjPoint, proj_distance, tau_pow
from ncpainleve.poisson import (
    SIGN,
    CommutativePencil,
    NotIsotrivial,
    SupportError,
    datum_pencil,
    hecke_symplecticity_test,
    isotrivial_basis,
    isotriviality_certificate,
    local_splitting,
    pairing,
    residue_at,
    support,
    transform,
    trivial_space,
)
from ncpainleve.sheaf import (
    TwistedMatrix,
    datum_from_plane_point,
    random_blowup_params,
    shift_down_at_first,
    tangent_basis,
)
from ncpainleve.sklyanin import SklyaninAlgebra, random_params


@pytest.fixture(scope="module")
def setup():
    A = SklyaninAlgebra(*random_params(1))
    params = random_blowup_params(A, seed=3)
    rng = np.random.default_rng(11)
    x = ProjPoint(tuple(rng.standard_normal(3) + 1j * rng.standard_normal(3)))
    datum, _ = datum_from_plane_point(x, params)
    L, _ = shift_down_at_first(datum)
    P = CommutativePencil(A, L)
    zeros = support(P)
    return A, params, datum, P, zeros


def rvec(B, rng):
    return B @ (rng.standard_normal(B.shape[1]) + 1j * rng.standard_normal(B.shape[1]))


def matches(found, want, tol):
    return all(min(proj_distance(w, f) for f in found) < tol for w in want)


def test_support_is_shifted_boundary(setup):
    A, params, _, P, zeros = setup
    E = A.curve
    want = [tau_pow(E, params.points[0], -3)] + list(params.points[1:])
    assert len(zeros) == 9
    assert matches(zeros, want, 1e-8)


def test_support_of_perturbed_pencil(setup):
    A, _, _, P, zeros = setup
    rng = np.random.default_rng(1)
    v = P.vector()
    Q = CommutativePencil(A, P.from_vector(v + 1e-6 * (rng.standard_normal(len(v)) + 1j * rng.standard_normal(len(v)))))
    moved = support(Q)
    assert len(moved) == 9 and matches(moved, zeros, 1e-3)


def test_singular_pencil_rejected(setup):
    A, _, _, P, _ = setup
    rows = P.matrix.entries
    bad = CommutativePencil(A, TwistedMatrix([rows[0], rows[0], rows[2]], P.matrix.row_offsets))
    with pytest.raises(SupportError):
        support(bad)


def test_datum_pencil_support(setup):
    _, params, datum, _, _ = setup
    Pd = datum_pencil(datum)
    zeros = support(Pd)
    assert matches(zeros, params.points, 1e-8)


def test_certificate_recovers_constant_splitting(setup):
    _, _, _, P, _ = setup
    rng = np.random.default_rng(2)
    A0 = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    B0 = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    BL = transform(P.matrix, B0, np.eye(3))
    LA = transform(P.matrix, np.eye(3), A0)
    Lp = P.from_vector(P.vector(BL) - P.vector(LA))
    cert = isotriviality_certificate(P, Lp)
    assert cert.residual < 1e-10
    rebuilt = P.vector(transform(P.matrix, cert.B, np.eye(3))) - P.vector(transform(P.matrix, np.eye(3), cert.A))
    assert np.linalg.norm(rebuilt - P.vector(Lp)) < 1e-9 * np.linalg.norm(P.vector(Lp))


def test_certificate_of_pencil_itself(setup):
    _, _, _, P, _ = setup
    cert = isotriviality_certificate(P, P.matrix)
    # (A, B) = (0, I) up to the scalar slack (lambda I, lambda I)
    lam = cert.A[0, 0]
    assert np.allclose(cert.A, lam * np.eye(3), atol=1e-8)
    assert np.allclose(cert.B, (1 + lam) * np.eye(3), atol=1e-8)


def test_random_deformation_not_isotrivial(setup):
    _, _, _, P, _ = setup
    rng = np.random.default_rng(3)
    v = rng.standard_normal(27) + 1j * rng.standard_normal(27)
    with pytest.raises(NotIsotrivial) as info:
        isotriviality_certificate(P, P.from_vector(v))
    assert info.value.residual > 1e-3


def test_deformation_space_dimensions(setup):
    A, _, datum, P, zeros = setup
    assert len(P.vector()) == 27
    assert trivial_space(P).shape[1] == 17
    assert isotrivial_basis(P, zeros).shape[1] == 19
    Pd = datum_pencil(datum)
    assert isotrivial_basis(Pd).shape[1] == 10 == tangent_basis(datum).shape[1]


def test_residue_quadrature(setup):
    _, _, _, P, zeros = setup
    chart = P.chart(zeros[0])
    val, _ = residue_at(chart, lambda z, q: 1 / (z * chart.omega(q)))
    assert abs(val - 1) < 1e-8
    val, _ = residue_at(chart, lambda z, q: np.exp(z) * (2 + z))
    assert abs(val) < 1e-9
    # double pole: g(z) / z^2 has residue g'(0); with g = exp(3z) that is 3
    val, _ = residue_at(chart, lambda z, q: np.exp(3 * z) / (z ** 2 * chart.omega(q)))
    assert abs(val - 3) < 1e-8


def test_local_splitting_truncation(setup):
    _, _, _, P, zeros = setup
    rng = np.random.default_rng(4)
    a = P.from_vector(rvec(isotrivial_basis(P, zeros), rng))
    split = local_splitting(P, a, zeros[2])
    assert split.residual < 1e-8 and len(split.B) == 4


def test_pairing_skew_bilinear(setup):
    _, _, _, P, zeros = setup
    rng = np.random.default_rng(5)
    iso = isotrivial_basis(P, zeros)
    va, vb, vc = rvec(iso, rng), rvec(iso, rng), rvec(iso, rng)
    a, b, c = (P.from_vector(v) for v in (va, vb, vc))
    ab = pairing(P, a, b, zeros=zeros).value
    ba = pairing(P, b, a, zeros=zeros).value
    assert abs(ab + ba) < 1e-6 * abs(ab)
    ac = pairing(P, a, c, zeros=zeros).value
    mix = pairing(P, a, P.from_vector(2 * vb - 1j * vc), zeros=zeros).value
    assert abs(mix - (2 * ab - 1j * ac)) < 1e-9 * abs(mix)
    assert SIGN == -1


def test_trivial_deformation_pairs_to_zero(setup):
    _, _, _, P, zeros = setup
    rng = np.random.default_rng(6)
    t = P.from_vector(rvec(trivial_space(P), rng))
    b = P.from_vector(rvec(isotrivial_basis(P, zeros), rng))
    cert = isotriviality_certificate(P, t)
    ref = abs(pairing(P, b, P.from_vector(rvec(isotrivial_basis(P, zeros), rng)), zeros=zeros).value)
    assert abs(pairing(P, t, b, certificate=cert, zeros=zeros).value) < 1e-8 * ref


def test_symplecticity_controls(setup):
    _, _, datum, _, _ = setup
    ident = hecke_symplecticity_test(datum, identity=True)
    assert ident["discrepancy"] < 1e-8
    res = hecke_symplecticity_test(datum)
    assert res["discrepancy"] < 1e-3
    bad = hecke_symplecticity_test(datum, mismatch=True)
    assert bad["discrepancy"] > 1e-2
