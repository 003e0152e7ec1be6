"""Theta functions, the chi_a kernels and the spectral-parameter r-matrix.

``theta1(z|tau) = 2 sum_n (-1)^n q^{(n+1/2)^2} sin((2n+1) pi z)`` with
``q = exp(i pi tau)``. The kernels

    chi_a(w, z) = e^{2 pi i a z / N} ((1/2 pi i) theta1(u + z) theta1'(0) / (theta1(z) theta1(u)) - delta_{a0} / w),
    u = w / (2 pi i) + a tau / N,

are applied blockwise to ``ad omega`` on the eigenspaces ``G_a``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import funcalc
from .affine import AffineKappa, TwistedGrading, _ad_on_block, block_function
from .cdybe import VerificationReport
from .errors import BadTau, PoleProximity

TWO_PI_I = 2j * np.pi
MAX_TERMS = 400
LOOP_POINTS = 512
LOOP_TOL = 1e-6
REMOVABLE_RADIUS = 1e-2


@dataclass(frozen=True)
class ThetaParams:
    """``tau`` with ``Im tau > 0``; ``series_terms = None`` picks the cutoff from the tail bound."""

    tau: complex
    series_terms: int | None = None
    tol: float = 1e-17

    def __post_init__(self):
        tau = complex(self.tau)
        if not np.isfinite(tau) or tau.imag <= 0:
            raise BadTau(f"need Im tau > 0, got tau = {tau}")
        object.__setattr__(self, "tau", tau)

    @property
    def q_abs(self) -> float:
        return float(np.exp(-np.pi * self.tau.imag))


def _terms_needed(params: ThetaParams, max_imag: float, weight_power=0) -> int:
    """Smallest cutoff whose first omitted term (and all later ones) is below ``tol``."""
    t = params.tau.imag
    n = 0
    while True:
        # log of 2 |q|^{(n+1/2)^2} e^{(2n+1) pi |Im z|} (2n+1)^p
        log_term = np.log(2) - np.pi * t * (n + 0.5) ** 2 + (2 * n + 1) * np.pi * max_imag
        log_term += weight_power * np.log(2 * n + 1)
        decreasing = np.pi * t * (2 * n + 2) > 2 * np.pi * max_imag + weight_power
        if decreasing and log_term < np.log(params.tol):
            return n
        n += 1
        if n > MAX_TERMS:
            raise BadTau(f"theta series needs more than {MAX_TERMS} terms (Im tau = {t:.3g}, |Im z| = {max_imag:.3g})")


def _cutoff(params, max_imag, weight_power=0):
    need = _terms_needed(params, max_imag, weight_power)
    if params.series_terms is not None:
        if params.series_terms < need:
            raise BadTau(f"series_terms={params.series_terms} leaves a tail above tol (need {need})")
        return params.series_terms
    return need


def _nome_powers(params, count):
    n = np.arange(count)
    return (-1.0) ** n * np.exp(1j * np.pi * params.tau * (n + 0.5) ** 2), n


def theta1(z, params: ThetaParams):
    """Vectorised ``theta1(z|tau)``."""
    z = np.asarray(z, dtype=complex)
    count = _cutoff(params, float(np.max(np.abs(z.imag), initial=0.0)))
    coeff, n = _nome_powers(params, count)
    return 2 * np.sum(coeff * np.sin(np.multiply.outer(z, 2 * n + 1) * np.pi), axis=-1)


def theta1_prime0(params: ThetaParams) -> complex:
    count = _cutoff(params, 0.0, weight_power=1)
    coeff, n = _nome_powers(params, count)
    return complex(2 * np.pi * np.sum(coeff * (2 * n + 1)))


def _chi_raw(a, N, w, z, params, tp0):
    u = w / TWO_PI_I + a * params.tau / N
    val = theta1(u + z, params) * tp0 / (theta1(z, params) * theta1(u, params)) / TWO_PI_I
    if a == 0:
        val = val - 1 / w
    return np.exp(TWO_PI_I * a * z / N) * val


def chi_pole_distance(a, N, w, params: ThetaParams):
    """Distance in ``w`` to the poles ``2 pi i (m + n tau - a tau / N)`` (``w = 0`` excluded for ``a = 0``)."""
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    tau = params.tau
    u = w / TWO_PI_I + a * tau / N
    n0 = np.round(u.imag / tau.imag)
    best = np.full(w.shape, np.inf)
    for dn in (-1, 0, 1):
        n = n0 + dn
        m0 = np.round((u - n * tau).real)
        for dm in (-1, 0, 1):
            m = m0 + dm
            d = 2 * np.pi * np.abs(u - m - n * tau)
            if a == 0:
                d = np.where((m == 0) & (n == 0), np.inf, d)
            best = np.minimum(best, d)
    return best


def _z_is_regular(z, params, margin):
    # zeros of theta1 at Z + tau Z
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    n = np.round(z.imag / params.tau.imag)
    m = np.round((z - n * params.tau).real)
    dist = np.abs(z - m - n * params.tau)
    if np.min(dist) <= margin:
        raise PoleProximity(f"z = {z[np.argmin(dist)]} is within {np.min(dist):.2e} of a zero of theta1")


def chi(a: int, N: int, w, z, params: ThetaParams, margin=funcalc.POLE_MARGIN):
    """``chi_a(w, z|tau)``, vectorised in ``w``; the removable point ``w = 0`` (``a = 0``) uses a Cauchy mean."""
    _z_is_regular(z, params, margin)
    w = np.asarray(w, dtype=complex)
    scalar_input = w.ndim == 0
    w = np.atleast_1d(w)
    dist = chi_pole_distance(a, N, w, params)
    if np.min(dist) <= margin:
        raise PoleProximity(f"chi_{a}: w within {np.min(dist):.2e} of a pole")
    tp0 = theta1_prime0(params)
    out = np.empty(w.shape, dtype=complex)
    near = (np.abs(w) < REMOVABLE_RADIUS) if a == 0 else np.zeros(w.shape, bool)
    if np.any(~near):
        out[~near] = _chi_raw(a, N, w[~near], z, params, tp0)
    if np.any(near):
        rho = min(0.5, 0.5 * float(chi_pole_distance(0, N, np.zeros(1), params)[0]))
        theta = 2 * np.pi * np.arange(64) / 64
        s = rho * np.exp(1j * theta)
        vals = _chi_raw(0, N, s, z, params, tp0)
        for idx in np.flatnonzero(near):
            out[idx] = np.mean(vals * s / (s - w[idx]))
    return out[0] if scalar_input else out


def chi_func(a, N, z, params: ThetaParams) -> funcalc.HoloFunc:
    return funcalc.HoloFunc(
        f"chi_{a}",
        lambda w: chi(a, N, w, z, params, margin=0.0),
        lambda w: chi_pole_distance(a, N, w, params),
        {"a": a, "N": N, "z": complex(z), "tau": params.tau},
    )


def trig_limit_chi0(w, z):
    """Limit of ``chi_0(w, z|tau)`` as ``tau -> i infinity``: ``f(w) + coth(i pi z) / 2``."""
    w = np.asarray(w, dtype=complex)
    return funcalc.f_func(np.atleast_1d(w)).reshape(w.shape) + 0.5 / np.tanh(1j * np.pi * complex(z))


# ---------------------------------------------------------------- r-matrix


@dataclass(frozen=True, eq=False)
class EllipticRParams:
    grading: TwistedGrading
    omega: np.ndarray
    z: complex
    tau: complex
    series_terms: int | None = None


@dataclass(frozen=True, eq=False)
class EllipticR:
    blocks: dict
    operator: np.ndarray
    tensor: np.ndarray
    params: EllipticRParams


def elliptic_R(p: EllipticRParams, margin=funcalc.POLE_MARGIN) -> EllipticR:
    """Block-diagonal operator ``chi_a(ad omega, z|tau)`` on ``G_a``, plus its tensor ``R B^{-1}``."""
    g = p.grading
    G = g.G
    theta = ThetaParams(p.tau, p.series_terms)
    _z_is_regular(p.z, theta, margin)
    omega = np.asarray(p.omega, dtype=complex)
    blocks = {}
    op = np.zeros((G.dim, G.dim), dtype=complex)
    for a in g.classes:
        W = _ad_on_block(g, omega, a)
        blocks[a] = funcalc.Calculus(chi_func(a, g.N, p.z, theta), W, margin).value
        Q = g.eigenspaces[a]
        op += Q @ blocks[a] @ Q.conj().T @ g.projectors[a]
    # grade preservation is structural; assert it anyway
    for a, Q in g.eigenspaces.items():
        leak = op @ Q - g.projectors[a] @ (op @ Q)
        assert np.max(np.abs(leak), initial=0.0) < 1e-8 * max(1.0, float(np.max(np.abs(op))))
    return EllipticR(blocks, op, op @ G.Binv, p)


def unitarity_defect(p: EllipticRParams) -> np.ndarray:
    """``r(omega, z) + r_21(omega, -z)``; expected independent of ``z`` and symmetric."""
    r_plus = elliptic_R(p).tensor
    r_minus = elliptic_R(EllipticRParams(p.grading, p.omega, -p.z, p.tau, p.series_terms)).tensor
    return r_plus + r_minus.T


def loop_consistency(
    g: TwistedGrading,
    kappa: AffineKappa,
    modes=(-3, -2, -1, 0, 1, 2, 3),
    points: int = LOOP_POINTS,
    tol: float = LOOP_TOL,
) -> VerificationReport:
    """Fourier modes of ``chi_a(ad omega, z)`` along a period against ``R + 1/2`` on the affine blocks.

    With ``tau = k N / (2 pi i)`` and ``z = x + i y0``, ``-Im tau < y0 < 0``, the
    mode ``n = a (mod N)`` of ``chi_a`` equals ``F(kn + ad omega) + 1/2`` for
    ``n != 0`` and ``f(ad omega) + 1/2`` for ``n = 0``. No rescaling of ``z`` is
    applied. When ``Re k >= 0`` the natural ``tau`` is not in the upper half
    plane; the check then uses ``-k`` for ``tau`` (reported as ``reflected``)
    and is expected to fail.
    """
    k = complex(kappa.k)
    tau = k * g.N / TWO_PI_I
    reflected = tau.imag <= 0
    if reflected:
        tau = -tau
    if tau.imag <= 0:
        raise BadTau(f"k = {k} gives tau = {tau} on the real axis")
    theta = ThetaParams(tau)
    y0 = -tau.imag / 2
    x = np.arange(points) / points
    zs = x + 1j * y0
    omega = np.asarray(kappa.omega, dtype=complex)
    samples = {}
    res, pts, parts = [], [], []
    for n in modes:
        a = n % g.N
        if a not in g.eigenspaces:
            continue
        if a not in samples:
            W = _ad_on_block(g, omega, a)
            samples[a] = (W, np.array([funcalc.Calculus(chi_func(a, g.N, z, theta), W).value for z in zs]))
        W, vals = samples[a]
        weights = np.exp(-TWO_PI_I * n * zs / g.N)
        mode = np.tensordot(weights, vals, axes=(0, 0)) / points
        target = funcalc.Calculus(block_function(n), W + k * n * np.eye(W.shape[0])).value + 0.5 * np.eye(W.shape[0])
        r = float(np.max(np.abs(mode - target), initial=0.0))
        res.append(r)
        pts.append({"n": int(n), "a": int(a)})
        parts.append({"n": int(n), "residual": r})
    return VerificationReport(
        "elliptic_consistency",
        pts,
        res,
        tol,
        {
            "G": g.G.name,
            "mu": g.name,
            "N": g.N,
            "tau": [tau.real, tau.imag],
            "k": [k.real, k.imag],
            "y0": y0,
            "points": points,
            "rescaling": 1.0,
            "constant_shift": 0.5,
            "reflected": bool(reflected),
        },
        point_key="mode",
    )
