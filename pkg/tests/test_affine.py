import json

import numpy as np
import pytest

from dirac_rmatrix.affine import (
    AffineElement,
    AffineKappa,
    AffineRMatrix,
    ad_kappa_block,
    affine_bracket,
    affine_form,
    affine_R_block,
    automorphism,
    build_twisted_grading,
    domain_check,
    grade_pairs,
    grade_zero_algebra,
    grading_from_catalog,
    grading_to_dict,
    homogeneous,
    operator_cdybe_affine,
    random_homogeneous,
    verify_prop2,
)
from dirac_rmatrix.catalog import e_selfdual, kappa0, sl, sl_conjugation
from dirac_rmatrix.errors import (
    BadGrade,
    BadParams,
    GradeMismatch,
    InadmissibleSpectrum,
    NoFixedPoints,
    NotAutomorphism,
    NotIsometry,
    WrongOrder,
)
from dirac_rmatrix.lie import build_algebra


def F_oracle(z):
    return 0.5 / np.tanh(z / 2)


@pytest.fixture(scope="module")
def g_id():
    return grading_from_catalog(sl(2), "identity")


@pytest.fixture(scope="module")
def g_cox():
    return grading_from_catalog(sl(2), "coxeter")


def span_contains(Q, vecs):
    # columns of vecs lie in span(Q)
    P = Q @ np.linalg.pinv(Q)
    return np.allclose(P @ vecs, vecs, atol=1e-12)


# ---------------------------------------------------------------- gradings


def test_identity_grading(g_id):
    assert g_id.N == 1
    assert list(g_id.eigenspaces) == [0]
    assert g_id.eigenspaces[0].shape == (3, 3)


def test_sl2_coxeter_grading(g_cox):
    G = g_cox.G
    assert g_cox.N == 2
    assert span_contains(g_cox.eigenspaces[0], G.element("H")[:, None])
    assert g_cox.eigenspaces[0].shape[1] == 1
    E, F = G.element("E"), G.element("F")
    assert span_contains(g_cox.eigenspaces[1], np.stack([E, F], axis=1))


def test_sl3_coxeter_dims():
    g = grading_from_catalog(sl(3), "coxeter")
    assert g.N == 3
    assert {a: Q.shape[1] for a, Q in g.eigenspaces.items()} == {0: 2, 1: 3, 2: 3}


def test_not_isometry(osc):
    # a -> 2a, ad -> 2ad, c -> 4c keeps every bracket but rescales <c, N>
    mu = np.diag([2.0, 2.0, 4.0, 1.0])
    with pytest.raises(NotIsometry):
        build_twisted_grading(osc, mu)


def test_scaling_is_not_automorphism(sl2):
    with pytest.raises(NotAutomorphism):
        build_twisted_grading(sl2, np.diag([1.0, 2.0, 2.0]))
    with pytest.raises(NotAutomorphism):
        build_twisted_grading(sl2, 2 * np.eye(3))


def test_not_automorphism(sl2, rng):
    with pytest.raises(NotAutomorphism):
        build_twisted_grading(sl2, rng.normal(size=(3, 3)))


def test_wrong_order(sl2):
    t = np.exp(1j * np.sqrt(2))
    with pytest.raises(WrongOrder):
        build_twisted_grading(sl2, sl_conjugation(2, np.diag([t, 1 / t])))
    with pytest.raises(WrongOrder):
        build_twisted_grading(sl2, automorphism(sl2, "coxeter"), N=3)


def test_no_fixed_points():
    A = build_algebra(np.zeros((1, 1, 1)), np.eye(1), ["x"], name="u1")
    with pytest.raises(NoFixedPoints):
        build_twisted_grading(A, -np.eye(1))


def test_automorphism_catalog_errors(e4):
    with pytest.raises(BadParams):
        automorphism(e4, "coxeter")
    with pytest.raises(BadParams):
        automorphism(sl(2), "diag")
    with pytest.raises(BadParams):
        automorphism(sl(2), "bogus")


def test_grading_export(g_cox):
    d = json.loads(json.dumps(grading_to_dict(g_cox)))
    assert d["N"] == 2 and d["eigenspace_dims"] == {"0": 1, "1": 2}


def test_grades(g_cox):
    assert g_cox.grades(2) == [-2, -1, 0, 1, 2]
    g = grading_from_catalog(sl(2), "diag", h=[1j, -1j])
    assert g.N == 2


# ---------------------------------------------------------------- bracket and form


def test_d_bracket(g_id, rng):
    xi = rng.normal(size=3)
    out = affine_bracket(g_id, AffineElement({}, 1.0, 0.0), homogeneous(g_id, 3, xi))
    assert np.allclose(out.terms[3], 3 * xi)
    assert out.c == 0


def test_central_term(g_id):
    G = g_id.G
    for n in (1, 2, -3):
        x = AffineElement({n: G.element("E")})
        y = AffineElement({-n: G.element("F")})
        out = affine_bracket(g_id, x, y)
        assert np.allclose(out.terms[0], G.element("H"))
        assert np.isclose(out.c, n)


def test_grade_mismatch(g_cox):
    with pytest.raises(GradeMismatch):
        affine_bracket(g_cox, AffineElement({1: g_cox.G.element("H")}), AffineElement({}, 1.0))
    with pytest.raises(GradeMismatch):
        g_cox.element({0: g_cox.G.element("E")})


def _triples(g, rng, count=20):
    gr = g.grades(2)
    for _ in range(count):
        m, n = rng.choice(gr, 2)
        p = rng.choice([q for q in gr if abs(m + n + q) <= 3])
        yield (random_homogeneous(g, int(m), rng), random_homogeneous(g, int(n), rng), random_homogeneous(g, int(p), rng))


@pytest.mark.parametrize("which", ["identity", "coxeter"])
def test_jacobi_and_invariance(which, rng):
    g = grading_from_catalog(sl(2), which)
    br = lambda u, v: affine_bracket(g, u, v)
    for x, y, z in _triples(g, rng):
        jac = br(x, br(y, z)) + br(y, br(z, x)) + br(z, br(x, y))
        assert jac.norm() <= 1e-10 * max(1, x.norm() * y.norm() * z.norm())
        inv = affine_form(g, br(x, y), z) + affine_form(g, y, br(x, z))
        assert abs(inv) <= 1e-10 * max(1, x.norm() * y.norm() * z.norm())


def test_form_examples(g_id, rng):
    c = AffineElement({}, 0.0, 1.0)
    d = AffineElement({}, 1.0, 0.0)
    assert affine_form(g_id, c, c) == 0 and affine_form(g_id, d, d) == 0
    assert affine_form(g_id, c, d) == 1
    xi, eta = rng.normal(size=3), rng.normal(size=3)
    val = affine_form(g_id, AffineElement({2: xi}), AffineElement({-2: eta}))
    assert np.isclose(val, xi @ g_id.G.B @ eta)
    assert affine_form(g_id, AffineElement({2: xi}), AffineElement({2: eta})) == 0


# ---------------------------------------------------------------- blocks


def test_block_omega_zero(g_id):
    kap = AffineKappa(np.zeros(3), -1.3, 0.4)
    for n in (1, -2, 3):
        assert np.allclose(ad_kappa_block(g_id, kap, n), -1.3 * n * np.eye(3))
        assert np.allclose(affine_R_block(g_id, kap, n), F_oracle(-1.3 * n) * np.eye(3))


def test_block_zero_grade(g_id):
    G = g_id.G
    kap = AffineKappa(0.3 * G.element("H"), -1.0, 0.2)
    M = ad_kappa_block(g_id, kap, 0)
    assert M.shape == (5, 5)
    assert np.allclose(M[:, 3:], 0) and np.allclose(M[3:, :], 0)


def test_block_spectrum(g_id, rng):
    G = g_id.G
    x = 0.3
    kap = AffineKappa(x * G.element("H"), -1.0 + 0.2j)
    for n in (1, 2, -3):
        ev = np.sort_complex(np.linalg.eigvals(ad_kappa_block(g_id, kap, n)))
        want = np.sort_complex(kap.k * n + np.array([0, 2 * x, -2 * x]))
        assert np.allclose(ev, want)


def test_R_block_eigen_oracle(g_id):
    G = g_id.G
    x, k = 0.25, -1.0
    R1 = affine_R_block(g_id, AffineKappa(x * G.element("H"), k), 1)
    ev = np.sort_complex(np.linalg.eigvals(R1))
    want = np.sort_complex(np.array([F_oracle(k), F_oracle(k + 2 * x), F_oracle(k - 2 * x)]))
    assert np.allclose(ev, want, atol=1e-13)


def test_R_zero_block_abelian(g_cox):
    # G_0 = span{H} is abelian, so f vanishes on the whole grade-0 block
    kap = AffineKappa(0.4 * g_cox.G.element("H"), -1.0)
    assert np.allclose(affine_R_block(g_cox, kap, 0), 0, atol=1e-15)


def test_bad_grade():
    g = grading_from_catalog(sl(3), "diag", h=[1, 1, -1])
    assert g.N == 2 and set(g.eigenspaces) == {0, 1}
    e2 = e_selfdual(2)
    with pytest.raises(BadGrade):
        ad_kappa_block(_no_odd(e2), AffineKappa(np.zeros(e2.dim), -1.0), 1)


def _no_odd(A):
    # identity with declared order 2: G_1 = 0
    return build_twisted_grading(A, np.eye(A.dim), N=2)


# ---------------------------------------------------------------- domain


def test_domain_real_k(g_id):
    rep = domain_check(g_id, AffineKappa(np.zeros(3), 1.0), 3)
    assert rep.admissible and rep.details["all_grades_certified"]


def test_domain_pole_hit(g_id):
    rep = domain_check(g_id, AffineKappa(np.zeros(3), 2j * np.pi), 3)
    assert not rep.admissible
    assert not rep.details["blocks"]["1"]["admissible"]


def test_domain_sl2_negative_k(g_id):
    rep = domain_check(g_id, AffineKappa(0.2 * g_id.G.element("H"), -1.0), 3)
    assert rep.admissible and rep.details["all_grades_certified"]


def test_affine_cdybe_rejects_inadmissible(g_id):
    with pytest.raises(InadmissibleSpectrum):
        verify_prop2(g_id, AffineKappa(np.zeros(3), 2j * np.pi), 3, 5)


# ---------------------------------------------------------------- operator CDYBE on homogeneous pairs


def test_affine_cdybe_sl2_identity(g_id):
    kap = AffineKappa(0.3 * g_id.G.element("H") + 0.05 * g_id.G.element("E"), -1.0, 0.2)
    rep = verify_prop2(g_id, kap, 3, 50, seed=3)
    assert rep.passed and rep.max_residual <= 1e-8
    seen = {(p["m"], p["n"]) for p in rep.sample_points}
    assert seen == set(grade_pairs(g_id, 3))


def test_affine_cdybe_sl2_coxeter_w4(g_cox):
    kap = AffineKappa(0.3 * g_cox.G.element("H"), -1.0, 0.1)
    rep = verify_prop2(g_cox, kap, 4, 60, seed=5)
    assert rep.passed and rep.max_residual <= 1e-8


def test_affine_cdybe_e2_identity():
    E = e_selfdual(2)
    g = grading_from_catalog(E, "identity")
    om = 0.1 * kappa0(E) + 0.05 * E.element("T12") + 0.03 * E.element("P1")
    rep = verify_prop2(g, AffineKappa(om, -1.0), 3, 50, seed=7)
    assert rep.passed and rep.max_residual <= 1e-8


def test_affine_cdybe_fd_path(g_id):
    kap = AffineKappa(0.3 * g_id.G.element("H"), -1.0)
    rep = verify_prop2(g_id, kap, 2, 20, seed=1, derivative_mode="fd")
    assert rep.passed and rep.tolerance == 1e-6


def test_affine_cdybe_grade_zero_pair(g_id, rng):
    kap = AffineKappa(0.3 * g_id.G.element("H"), -0.8)
    Rm = AffineRMatrix(g_id, kap)
    X, Y = random_homogeneous(g_id, 0, rng), random_homogeneous(g_id, 0, rng)
    assert operator_cdybe_affine(Rm, X, Y).norm() <= 1e-10 * X.norm() * Y.norm()


def test_affine_cdybe_negative_control(g_id, rng):
    Rm = AffineRMatrix(g_id, AffineKappa(0.3 * g_id.G.element("H"), -1.0))
    X, Y = random_homogeneous(g_id, 1, rng), random_homogeneous(g_id, -2, rng)
    assert operator_cdybe_affine(Rm, X, Y, C=0.0).norm() > 1e-2


# ---------------------------------------------------------------- structure


def test_grade_zero_self_dual(g_id, g_cox):
    for g in (g_id, g_cox):
        A0 = grade_zero_algebra(g)
        assert abs(np.linalg.det(A0.B)) > 1e-8


def test_block_diagonal(g_cox, rng):
    Rm = AffineRMatrix(g_cox, AffineKappa(0.3 * g_cox.G.element("H"), -1.0))
    for n in (-3, -1, 0, 2):
        out = Rm.apply(random_homogeneous(g_cox, n, rng))
        assert set(k for k, v in out.terms.items() if np.any(v != 0)) <= {n}
        if n != 0:
            assert out.d == 0 and out.c == 0


def test_mu_equivariance(g_id):
    # omega = 0.3H is fixed by Ad(diag(i, -i)); every block commutes with it
    G = g_id.G
    mu = sl_conjugation(2, np.diag([1j, -1j]))
    Rm = AffineRMatrix(g_id, AffineKappa(0.3 * G.element("H"), -1.0))
    Q = g_id.basis(1)
    for n in (1, -2, 3):
        R = Q @ Rm.block(n) @ Q.conj().T
        assert np.max(np.abs(mu @ R @ np.linalg.inv(mu) - R)) <= 1e-10
