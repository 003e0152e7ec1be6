import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirac_rmatrix.catalog import e_selfdual, kappa0, sl
from dirac_rmatrix.cdybe import (
    VerificationReport,
    antisymmetrize3,
    cdyb,
    cdyb_constancy_report,
    check_equivariance,
    check_invariant_constant,
    check_operator_cdybe,
    classical_ybe_bracket,
    proposition1_suite,
    sample_points,
)
from dirac_rmatrix.drmatrix import (
    canonical_r,
    constant_field,
    dirac_D_field,
    field_to_operator,
    reduce,
    reduced_canonical,
    trig_cartan,
    zero_field,
)
from dirac_rmatrix.errors import NoAdmissibleSamples
from dirac_rmatrix.lie import bracket, canonical_tensors, make_chain


def cartan_chain(A):
    return make_chain(A, [l for l in A.labels if l.startswith("H")])


def brute_cybe(A, r):
    # slot-by-slot loops over basis brackets
    n = A.dim
    e = np.eye(n)
    br = [[bracket(A, e[a], e[c]) for c in range(n)] for a in range(n)]
    T = np.zeros((n, n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    w = r[a, b] * r[c, d]
                    if w == 0:
                        continue
                    T[:, b, d] += w * br[a][c]  # [r12, r13]
                    T[a, :, d] += w * br[b][c]  # [r12, r23]
                    T[a, c, :] += w * br[b][d]  # [r13, r23]
    return T


def test_cybe_matches_brute_force(sl2, rng):
    r = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert np.max(np.abs(classical_ybe_bracket(sl2, r) - brute_cybe(sl2, r))) <= 1e-12


def test_cdyb_zero(sl3):
    assert np.max(np.abs(cdyb(zero_field(sl3), np.zeros(sl3.dim)))) == 0


@pytest.mark.parametrize("x", [0.2, 0.7, 0.4 + 0.3j])
def test_cdyb_of_D_vanishes(sl2, x):
    D = dirac_D_field(cartan_chain(sl2))
    assert np.max(np.abs(cdyb(D, x * sl2.element("H")))) <= 1e-9
    assert np.max(np.abs(cdyb(D, x * sl2.element("H"), "fd"))) <= 1e-6


@pytest.mark.parametrize("sign", [1, -1])
def test_canonical_solves_cdybe(sl3, rng, sign):
    # the antisymmetric part gives -1/4 f_hat, cancelled by [I/2, I/2]
    r = canonical_r(sl3, sign)
    _, fh = canonical_tensors(sl3)
    for _ in range(3):
        lam = 0.3 * rng.normal(size=sl3.dim)
        assert np.max(np.abs(cdyb(r, lam))) <= 1e-12
        assert np.max(np.abs(cdyb(r.antisymmetric_part(), lam) + 0.25 * fh)) <= 1e-12


def test_constancy_sl2(sl2):
    r = canonical_r(sl2, 1)
    pts = sample_points(0.5 * sl2.element("H"), np.eye(3), 0.2, 5, seed=1, domain_test=r.domain_test)
    rep = cdyb_constancy_report(r, pts, "exact")
    assert rep.passed and rep.max_residual <= 1e-8
    rep_fd = cdyb_constancy_report(r, pts, "fd")
    assert rep_fd.passed and rep_fd.tolerance == 1e-6


def test_invariant_constants(sl3, rng):
    I, fh = canonical_tensors(sl3)
    assert check_invariant_constant(I, sl3).passed
    assert check_invariant_constant(fh, sl3).passed
    bad = check_invariant_constant(rng.normal(size=(8, 8, 8)), sl3)
    assert not bad.passed and bad.max_residual > 1e-2


def test_equivariance_constant_invariant(sl2):
    r = constant_field(sl2, 0.5 * sl2.Binv)
    rep = check_equivariance(r, [0.3 * sl2.element("H")])
    assert rep.max_residual <= 1e-12


def test_equivariance_canonical(sl3, rng):
    r = canonical_r(sl3, 1)
    pts = [0.3 * rng.normal(size=sl3.dim) for _ in range(3)]
    assert check_equivariance(r, pts, "exact").max_residual <= 1e-8
    fd = check_equivariance(r, pts, "fd")
    assert fd.passed and fd.max_residual <= 1e-6


def test_equivariance_e4_reduced(e4):
    ch = make_chain(e4, [l for l in e4.labels if l[0] in "JT"])
    r = reduce(canonical_r(e4, 1), ch)
    assert check_equivariance(r, [0.1 * kappa0(e4)], "fd").max_residual <= 1e-6


def test_equivariance_negative_control(sl2):
    # a non-invariant constant breaks equivariance
    r = np.zeros((3, 3))
    r[sl2.index("E"), sl2.index("E")] = 1.0
    rep = check_equivariance(constant_field(sl2, r), [0.3 * sl2.element("H")])
    assert not rep.passed


# ---------------------------------------------------------------- operator form


def _cartan_point(A, rng):
    ch = cartan_chain(A)
    return ch.K @ (rng.uniform(0.2, 0.8, ch.K.shape[1]) + 0.1j * rng.normal(size=ch.K.shape[1]))


@pytest.mark.parametrize("name", ["sl2", "sl3"])
def test_operator_cdybe_reduced(name, rng, request):
    A = request.getfixturevalue(name)
    H = [l for l in A.labels if l.startswith("H")]
    R = field_to_operator(reduced_canonical(A, H, 0))
    for _ in range(5):
        kap = _cartan_point(A, rng)
        X = rng.normal(size=A.dim) + 1j * rng.normal(size=A.dim)
        Y = rng.normal(size=A.dim) + 1j * rng.normal(size=A.dim)
        assert check_operator_cdybe(R, kap, 0.5, X, Y) <= 1e-8
        assert check_operator_cdybe(R, kap, 0.5, X, Y, "fd") <= 1e-6
        assert check_operator_cdybe(R, kap, 0.5, X, X) <= 1e-8


def test_operator_cdybe_wrong_constant(sl2, rng):
    R = field_to_operator(reduced_canonical(sl2, ["H"], 0))
    kap = 0.4 * sl2.element("H")
    X, Y = sl2.element("E"), sl2.element("F")
    assert check_operator_cdybe(R, kap, 0.3, X, Y) > 1e-3


def test_operator_cdybe_zero_field(sl3, rng):
    R = field_to_operator(zero_field(sl3, cartan_chain(sl3).K))
    for _ in range(5):
        X, Y = rng.normal(size=8), rng.normal(size=8)
        want = float(np.max(np.abs(0.25 * bracket(sl3, X, Y))))
        assert check_operator_cdybe(R, _cartan_point(sl3, rng), 0.5, X, Y) == want


def test_operator_and_tensor_forms_agree(sl2, rng):
    # residual of the operator form vanishes together with CDYB(r) + C^2 f_hat
    _, fh = canonical_tensors(sl2)
    r = trig_cartan(sl2, 0)
    kap = 0.4 * sl2.element("H")
    tensor_res = np.max(np.abs(cdyb(r, kap) + 0.25 * fh))
    X, Y = rng.normal(size=3), rng.normal(size=3)
    op_res = check_operator_cdybe(field_to_operator(r), kap, 0.5, X, Y)
    assert tensor_res <= 1e-12 and op_res <= 1e-12


# ---------------------------------------------------------------- structure


def test_cdyb_is_antisymmetric(sl3, rng):
    r = reduce(canonical_r(sl3, 1), cartan_chain(sl3)).antisymmetric_part()
    T = cdyb(r, _cartan_point(sl3, rng))
    assert np.max(np.abs(antisymmetrize3(T) - T)) <= 1e-8


def test_fd_and_exact_agree(sl3, rng):
    r = reduce(canonical_r(sl3, -1), cartan_chain(sl3))
    kap = _cartan_point(sl3, rng)
    assert np.max(np.abs(cdyb(r, kap, "exact") - cdyb(r, kap, "fd"))) <= 1e-6


@settings(max_examples=15, deadline=None)
@given(st.floats(0.15, 0.9), st.floats(0.15, 0.9))
def test_reduction_sl3_random_points(x, y):
    A = sl(3)
    ch = cartan_chain(A)
    k = A.element({"H1": x, "H2": y})
    try:
        rep = proposition1_suite(ch, canonical_r(A, 1), [k])
    except NoAdmissibleSamples:
        return  # wall point
    assert rep.max_residual <= 1e-8


# ---------------------------------------------------------------- reduction suite


def test_reduction_sl2_zero(sl2):
    rep = proposition1_suite(cartan_chain(sl2), zero_field(sl2), [0.3 * sl2.element("H"), 0.6 * sl2.element("H")])
    assert rep.passed and rep.max_residual <= 1e-9


def test_reduction_sl3_canonical(sl3):
    ch = cartan_chain(sl3)
    r = canonical_r(sl3, 1)
    pts = sample_points(sl3.element("0.5H1+0.3H2"), ch.K, 0.2, 5, seed=7, domain_test=reduce(r, ch).domain_test)
    rep = proposition1_suite(ch, r, pts)
    assert rep.passed and rep.max_residual <= 1e-8
    assert set(rep.metadata["parts"][0]) == {"cdyb_D", "cdyb_rstar_minus_r", "cdyb_r_drift"}


def test_reduction_e4():
    A = e_selfdual(4)
    ch = make_chain(A, [l for l in A.labels if l[0] in "JT"])
    rep = proposition1_suite(ch, canonical_r(A, 1), [0.1 * kappa0(A)])
    assert rep.max_residual <= 1e-7


def test_reduction_no_samples(sl2):
    with pytest.raises(NoAdmissibleSamples):
        proposition1_suite(cartan_chain(sl2), zero_field(sl2), [np.zeros(3)])


def test_sample_points_exhausted(sl2):
    with pytest.raises(NoAdmissibleSamples):
        sample_points(np.zeros(3), np.eye(3), 0.1, 3, seed=0, domain_test=lambda k: False, max_tries=20)


def test_report_json():
    rep = VerificationReport("x", [np.array([1 + 2j])], [1e-3], 1e-2, {"algebra": "sl2"})
    d = json.loads(json.dumps(rep.to_dict()))
    assert d["pass"] is True
    assert d["points"][0]["kappa"] == [[1.0, 2.0]]
    assert not VerificationReport("x", [], [], 1.0).passed
