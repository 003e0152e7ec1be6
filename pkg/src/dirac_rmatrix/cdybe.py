"""CDYB three-tensor, equivariance and invariance checks, and the verification suites."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .drmatrix import OperatorField, RMatrixField, reduce
from .errors import NoAdmissibleSamples
from .lie import Chain, LieAlgebra, ad, ad_basis, bracket, dual_basis

FD_TOL = 1e-6
EXACT_TOL = 1e-8


@dataclass
class VerificationReport:
    check_name: str
    sample_points: list
    residuals: list
    tolerance: float
    metadata: dict = field(default_factory=dict)
    point_key: str = "kappa"

    @property
    def passed(self) -> bool:
        return len(self.residuals) > 0 and all(r <= self.tolerance for r in self.residuals)

    @property
    def max_residual(self) -> float:
        return max(self.residuals) if self.residuals else float("nan")

    def to_dict(self):
        return {
            "check": self.check_name,
            "points": [
                {self.point_key: _point_json(k), "residual": float(r)}
                for k, r in zip(self.sample_points, self.residuals)
            ],
            "tol": self.tolerance,
            "pass": self.passed,
            **self.metadata,
        }


def _point_json(p):
    if isinstance(p, dict):
        return p
    return _complex_list(p)


def _complex_list(v):
    v = np.atleast_1d(np.asarray(v, dtype=complex))
    return [[float(x.real), float(x.imag)] for x in v]


def classical_ybe_bracket(A: LieAlgebra, r) -> np.ndarray:
    """``[r12, r13] + [r12, r23] + [r13, r23]`` as a coefficient array."""
    f = A.f
    return (
        np.einsum("ace,ab,cd->ebd", f, r, r, optimize=True)
        + np.einsum("bce,ab,cd->aed", f, r, r, optimize=True)
        + np.einsum("bde,ab,cd->ace", f, r, r, optimize=True)
    )


def cyclic_derivative_terms(dyn, derivs) -> np.ndarray:
    """``L^1_a dr_23/dlambda_a + cyclic``, where ``derivs[a]`` is the derivative along ``L^a``."""
    S = np.einsum("pa,aqs->pqs", dyn, derivs)
    return S + np.transpose(S, (2, 0, 1)) + np.transpose(S, (1, 2, 0))


def cdyb(r: RMatrixField, kappa, derivative_mode="auto", step=None) -> np.ndarray:
    kappa = np.asarray(kappa, dtype=complex)
    A = r.algebra
    R = r(kappa)
    dual = r.dyn_dual
    kw = {} if step is None else {"step": step}
    derivs = np.array([r.derivative(kappa, dual[:, a], derivative_mode, **kw) for a in range(dual.shape[1])])
    if derivs.size == 0:
        derivs = np.zeros((0, A.dim, A.dim), dtype=complex)
    return classical_ybe_bracket(A, R) + cyclic_derivative_terms(r.dyn, derivs)


def invariance_action(A: LieAlgebra, T) -> np.ndarray:
    """Stack over basis ``x`` of ``(ad x (x) 1 ... + ... 1 (x) ad x) T``."""
    T = np.asarray(T, dtype=complex)
    ads = ad_basis(A)
    if T.ndim == 2:
        return np.einsum("xpa,ab->xpb", ads, T) + np.einsum("xpb,ab->xap", ads, T)
    return (
        np.einsum("xpa,abc->xpbc", ads, T)
        + np.einsum("xpb,abc->xapc", ads, T)
        + np.einsum("xpc,abc->xabp", ads, T)
    )


def check_invariant_constant(T, A: LieAlgebra, tol=1e-10) -> VerificationReport:
    res = float(np.max(np.abs(invariance_action(A, T)), initial=0.0))
    return VerificationReport("invariant_constant", [np.zeros(0)], [res], tol, {"algebra": A.name})


def equivariance_residual(r: RMatrixField, kappa, derivative_mode="auto", step=None) -> float:
    """``max_a |[L_a^1 + L_a^2, r] - d/dt r(kappa + t[L_a, kappa])|``."""
    A = r.algebra
    kappa = np.asarray(kappa, dtype=complex)
    R = r(kappa)
    kw = {} if step is None else {"step": step}
    worst = 0.0
    for a in range(r.dyn.shape[1]):
        La = r.dyn[:, a]
        X = ad(A, La)
        lhs = X @ R + R @ X.T
        rhs = r.derivative(kappa, bracket(A, La, kappa), derivative_mode, **kw)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def check_equivariance(r: RMatrixField, kappas, derivative_mode="auto", tol=None, step=None) -> VerificationReport:
    kappas = _as_points(kappas)
    tol = tol if tol is not None else (EXACT_TOL if _is_exact(r, derivative_mode) else FD_TOL)
    res = [equivariance_residual(r, k, derivative_mode, step) for k in kappas]
    return VerificationReport(
        "equivariance", kappas, res, tol, {"algebra": r.algebra.name, "field": r.name, "derivative_mode": _mode_name(r, derivative_mode)}
    )


def _as_points(kappas):
    arr = np.asarray(kappas, dtype=complex)
    if arr.ndim == 1:
        return [arr]
    return list(arr)


def _is_exact(r, mode):
    return mode in ("exact", "auto") and r.exact_derivative is not None


def _mode_name(r, mode):
    return "exact" if _is_exact(r, mode) else "fd"


def sample_points(center, directions, radius, count, seed, domain_test=None, max_tries=1000):
    """Seeded points ``center + radius * (random unit combination of directions)`` inside the domain."""
    rng = np.random.default_rng(seed)
    center = np.asarray(center, dtype=complex)
    pts = []
    tries = 0
    while len(pts) < count and tries < max_tries:
        tries += 1
        c = rng.uniform(-1, 1, directions.shape[1])
        p = center + radius * (directions @ c)
        if domain_test is None or domain_test(p):
            pts.append(p)
    if len(pts) < count:
        raise NoAdmissibleSamples(f"found only {len(pts)} admissible samples in {max_tries} tries")
    return pts


def cdyb_constancy_report(r: RMatrixField, kappas, derivative_mode="auto", tol=None) -> VerificationReport:
    """CDYB(r) must be the same invariant tensor at every sample point."""
    kappas = _as_points(kappas)
    tol = tol if tol is not None else (EXACT_TOL if _is_exact(r, derivative_mode) else FD_TOL)
    tensors = [cdyb(r, k, derivative_mode) for k in kappas]
    ref = tensors[0]
    res = []
    for T in tensors:
        inv = float(np.max(np.abs(invariance_action(r.algebra, T)), initial=0.0))
        res.append(max(float(np.max(np.abs(T - ref))), inv))
    return VerificationReport(
        "cdybe",
        kappas,
        res,
        tol,
        {
            "algebra": r.algebra.name,
            "field": r.name,
            "derivative_mode": _mode_name(r, derivative_mode),
            "cdyb_norm": float(np.max(np.abs(ref))),
        },
    )


def proposition1_suite(chain: Chain, r: RMatrixField, kappas, derivative_mode="auto", tol=None) -> VerificationReport:
    """``CDYB(D) = 0`` and ``CDYB(r*) = CDYB(r)`` at each point; ``CDYB(r)`` constant across points."""
    from .drmatrix import dirac_D_field

    kappas = [k for k in _as_points(kappas)]
    rstar = reduce(r, chain)
    kappas = [k for k in kappas if rstar.domain_test(k)]
    if not kappas:
        raise NoAdmissibleSamples("no sample point lies in the reduced domain")
    exact = _is_exact(r, derivative_mode)
    tol = tol if tol is not None else (EXACT_TOL if exact else FD_TOL)
    D = dirac_D_field(chain)
    from .drmatrix import lift_to_L

    res, parts = [], []
    ref = None
    for k in kappas:
        cd = cdyb(D, k, derivative_mode)
        c_r = cdyb(r, lift_to_L(chain, k), derivative_mode)
        c_star = cdyb(rstar, k, derivative_mode)
        ref = c_r if ref is None else ref
        p = {
            "cdyb_D": float(np.max(np.abs(cd))),
            "cdyb_rstar_minus_r": float(np.max(np.abs(c_star - c_r))),
            "cdyb_r_drift": float(np.max(np.abs(c_r - ref))),
        }
        parts.append(p)
        res.append(max(p.values()))
    return VerificationReport(
        "prop1",
        kappas,
        res,
        tol,
        {"algebra": r.algebra.name, "field": r.name, "chain": chain.description, "derivative_mode": _mode_name(r, derivative_mode), "parts": parts},
    )


def project_onto(chain_K, Kperp, X):
    Q = np.hstack([chain_K, Kperp])
    c = np.linalg.solve(Q, X)
    return chain_K @ c[: chain_K.shape[1]]


def operator_cdybe_residual(R: OperatorField, kappa, C, X, Y, derivative_mode="auto", Kperp=None) -> np.ndarray:
    """Left side of the operator CDYBE plus ``C^2 [X, Y]``; zero when the equation holds."""
    from .lie import _complement

    A = R.algebra
    kappa = np.asarray(kappa, dtype=complex)
    X = np.asarray(X, dtype=complex)
    Y = np.asarray(Y, dtype=complex)
    K = R.dyn
    if Kperp is None:
        Kperp = _complement(A, np.eye(A.dim, dtype=complex), K)
    Kdual = dual_basis(A, K)
    Rk = R(kappa)
    br = lambda u, v: bracket(A, u, v)
    RX, RY = Rk @ X, Rk @ Y
    out = br(RX, RY) - Rk @ (br(X, RY) + br(RX, Y))
    for i in range(K.shape[1]):
        dR = R.derivative(kappa, K[:, i], derivative_mode)
        out = out + Kdual[:, i] * (X @ A.B @ (dR @ Y))
    XK = project_onto(K, Kperp, X)
    YK = project_onto(K, Kperp, Y)
    out = out + R.derivative(kappa, YK, derivative_mode) @ X - R.derivative(kappa, XK, derivative_mode) @ Y
    return out + C**2 * br(X, Y)


def check_operator_cdybe(R: OperatorField, kappa, C, X, Y, derivative_mode="auto") -> float:
    return float(np.max(np.abs(operator_cdybe_residual(R, kappa, C, X, Y, derivative_mode))))


def antisymmetrize3(T) -> np.ndarray:
    perms = [((0, 1, 2), 1), ((1, 2, 0), 1), ((2, 0, 1), 1), ((1, 0, 2), -1), ((0, 2, 1), -1), ((2, 1, 0), -1)]
    return sum(s * np.transpose(T, p) for p, s in perms) / 6
