"""Holomorphic functional calculus for small dense matrices.

``h(M)`` is computed from an eigendecomposition when the eigenvector matrix is
well conditioned. Otherwise a Taylor expansion around the spectral centre is
summed, with the Taylor coefficients obtained from Cauchy integrals on a circle
that stays clear of the poles of ``h``. Frechet derivatives use the
Daleckii-Krein formula with divided differences, again via Cauchy integrals
when two eigenvalues are close.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Callable

import numpy as np

from .errors import IllConditioned, InadmissibleSpectrum, PoleProximity

TWO_PI_I = 2j * np.pi
POLE_MARGIN = 1e-6
SERIES_RADIUS = 1.0
EIG_COND_MAX = 1e5


def _nearest_lattice_distance(z, include_zero):
    """Distance from ``z`` to ``2*pi*i*Z`` (or ``2*pi*i*Z*``)."""
    z = np.asarray(z, dtype=complex)
    n0 = np.round(z.imag / (2 * np.pi))
    best = np.full(z.shape, np.inf)
    for shift in (-1, 0, 1):
        n = n0 + shift
        d = np.abs(z - TWO_PI_I * n)
        if not include_zero:
            d = np.where(n == 0, np.inf, d)
        best = np.minimum(best, d)
    return best


def _half_coth(z):
    z = np.asarray(z, dtype=complex)
    with np.errstate(over="ignore", invalid="ignore"):
        return 0.5 / np.tanh(z / 2)


def _bernoulli(n):
    """Exact ``B_0 .. B_n``."""
    B = [Fraction(1)]
    for m in range(1, n + 1):
        B.append(-sum(comb(m + 1, j) * B[j] for j in range(m)) / (m + 1))
    return B


# f(z) = sum_k B_{2k} z^{2k-1} / (2k)!, converges for |z| < 2 pi
_F_SERIES = np.array([float(b / factorial(2 * k)) for k, b in enumerate(_bernoulli(40)[2::2], start=1)])


def _f_scalar(z):
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < SERIES_RADIUS
    out = np.empty_like(z)
    zs = z[small]
    z2 = zs * zs
    acc = np.zeros_like(zs)
    for c in _F_SERIES[::-1]:
        acc = acc * z2 + c
    out[small] = zs * acc
    zl = z[~small]
    out[~small] = _half_coth(zl) - 1 / zl
    return out


@dataclass(frozen=True)
class HoloFunc:
    """A scalar holomorphic function together with its excluded set.

    ``pole_distance(z)`` returns the distance from ``z`` to the nearest pole;
    it is vectorised like ``scalar``.
    """

    name: str
    scalar: Callable
    pole_distance: Callable
    params: dict = field(default_factory=dict)

    def __call__(self, z):
        return self.scalar(z)


f_func = HoloFunc("f", _f_scalar, lambda z: _nearest_lattice_distance(z, include_zero=False))
F_func = HoloFunc("F", _half_coth, lambda z: _nearest_lattice_distance(z, include_zero=True))


def custom(name, scalar, pole_distance=None, **params) -> HoloFunc:
    """Wrap an arbitrary vectorised scalar function; entire if no poles given."""
    if pole_distance is None:
        pole_distance = lambda z: np.full(np.shape(z), np.inf)
    return HoloFunc(name, scalar, pole_distance, params)


def eval_scalar(h: HoloFunc, z, margin=POLE_MARGIN) -> complex:
    dist = float(np.min(h.pole_distance(np.atleast_1d(complex(z)))))
    if dist <= margin:
        raise PoleProximity(f"{h.name}({z}) is within {dist:.2e} of a pole")
    return complex(np.asarray(h.scalar(np.atleast_1d(complex(z))))[0])


@dataclass
class SpectralReport:
    eigenvalues: list
    min_pole_distance: float
    admissible: bool
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "eigenvalues": [[float(np.real(e)), float(np.imag(e))] for e in self.eigenvalues],
            "min_pole_distance": float(self.min_pole_distance),
            "admissible": bool(self.admissible),
            **self.details,
        }


def spectrum_check(h: HoloFunc, M, margin=POLE_MARGIN) -> SpectralReport:
    M = np.asarray(M, dtype=complex)
    if M.size == 0:
        return SpectralReport([], float("inf"), True)
    w = np.linalg.eigvals(M)
    dist = float(np.min(h.pole_distance(w)))
    return SpectralReport(list(w), dist, dist > margin)


def _cauchy_divided_difference(h, a, b, npts=64):
    """``(h(a) - h(b)) / (a - b)`` (``h'(a)`` when equal) by a contour integral."""
    c = (a + b) / 2
    half = abs(a - b) / 2
    rho = max(4 * half, min(0.5 * float(h.pole_distance(np.atleast_1d(c))[0]), 1.0))
    rho = max(rho, 2 * half + 1e-12)
    theta = 2 * np.pi * np.arange(npts) / npts
    s = c + rho * np.exp(1j * theta)
    vals = h.scalar(s) * (s - c) / ((s - a) * (s - b))
    return complex(np.mean(vals))


def divided_differences(h: HoloFunc, w, rel=1e-2):
    """First divided differences ``h[w_i, w_j]`` for all pairs."""
    w = np.asarray(w, dtype=complex)
    hw = np.asarray(h.scalar(w), dtype=complex)
    diff = w[:, None] - w[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        D = (hw[:, None] - hw[None, :]) / diff
    scale = np.maximum(1.0, np.abs(w)[:, None])
    close = np.abs(diff) < rel * scale
    for i, j in zip(*np.nonzero(close)):
        if j < i and close[j, i]:
            D[i, j] = D[j, i]
        else:
            D[i, j] = _cauchy_divided_difference(h, w[i], w[j])
    return D


class Calculus:
    """Cached functional calculus of one matrix ``M`` for one function ``h``.

    Provides ``value`` = ``h(M)`` and ``frechet(E)`` = derivative of ``h`` at
    ``M`` in direction ``E``.
    """

    def __init__(self, h: HoloFunc, M, margin=POLE_MARGIN, cond_max=EIG_COND_MAX):
        self.h = h
        self.M = np.asarray(M, dtype=complex)
        n = self.M.shape[0]
        self.report = spectrum_check(h, self.M, margin)
        if not self.report.admissible:
            raise InadmissibleSpectrum(
                f"spectrum of operator is within {self.report.min_pole_distance:.2e} of a pole of {h.name}"
            )
        self.path = "eig"
        if n == 0:
            self.value = self.M.copy()
            self._V = self._Vinv = None
            return
        if np.count_nonzero(self.M - np.diag(np.diag(self.M))) == 0:
            w = np.diag(self.M).copy()
            V = Vinv = np.eye(n, dtype=complex)
            cond = 1.0
        else:
            w, V = np.linalg.eig(self.M)
            cond = np.linalg.cond(V)
            Vinv = np.linalg.inv(V) if cond < cond_max else None
        if cond < cond_max:
            self._w, self._V, self._Vinv = w, V, Vinv
            self.value = (V * h.scalar(w)) @ Vinv
            self._DD = None
        else:
            self.path = "taylor"
            self._V = self._Vinv = None
            self.value = taylor_apply(h, self.M)

    def frechet(self, E):
        E = np.asarray(E, dtype=complex)
        if self.path == "taylor":
            n = self.M.shape[0]
            big = np.block([[self.M, E], [np.zeros_like(E), self.M]])
            return taylor_apply(self.h, big)[:n, n:]
        if self._DD is None:
            self._DD = divided_differences(self.h, self._w)
        W = self._Vinv @ E @ self._V
        return self._V @ (self._DD * W) @ self._Vinv


def taylor_apply(h: HoloFunc, M, npts=256, max_terms=400, tol=1e-17):
    """``h(M)`` from the Taylor series of ``h`` at the mean eigenvalue."""
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    w = np.linalg.eigvals(M)
    sigma = complex(np.mean(w))
    spread = float(np.max(np.abs(w - sigma)))
    radius = float(h.pole_distance(np.atleast_1d(sigma))[0])
    if not spread < 0.9 * radius:
        raise IllConditioned(
            f"eigenvector matrix is ill conditioned and spectrum (spread {spread:.3g}) does not fit "
            f"inside the Taylor disc of {h.name} (radius {radius:.3g})"
        )
    rho = min(0.5 * radius, max(1.0, 2 * spread)) if np.isfinite(radius) else max(1.0, 2 * spread)
    rho = max(rho, min(0.95 * radius, 1.2 * spread)) if spread > 0 else rho
    theta = 2 * np.pi * np.arange(npts) / npts
    samples = h.scalar(sigma + rho * np.exp(1j * theta))
    coeffs = np.fft.fft(samples) / npts / rho ** np.arange(npts)
    X = M - sigma * np.eye(n)
    result = coeffs[0] * np.eye(n, dtype=complex)
    power = np.eye(n, dtype=complex)
    quiet = 0
    for k in range(1, min(max_terms, npts // 2)):
        power = power @ X
        term = coeffs[k] * power
        result = result + term
        size = np.max(np.abs(term))
        if size <= tol * max(1.0, np.max(np.abs(result))):
            quiet += 1
            if quiet >= 3 or not np.any(power):
                return result
        else:
            quiet = 0
    raise IllConditioned(f"Taylor series for {h.name} did not converge")


def holo_apply(h: HoloFunc, M, tol=1e-9, margin=POLE_MARGIN) -> np.ndarray:
    """``h(M)``; raises :class:`InadmissibleSpectrum` when a pole is too close."""
    calc = Calculus(h, M, margin)
    value = calc.value
    M = calc.M
    if M.size:
        comm = np.max(np.abs(value @ M - M @ value))
        scale = max(1.0, np.max(np.abs(M))) * max(1.0, np.max(np.abs(value)))
        if comm > tol * scale:
            raise IllConditioned(f"h(M) fails to commute with M (residual {comm:.2e})")
    return value


def holo_frechet(h: HoloFunc, M, E, margin=POLE_MARGIN) -> np.ndarray:
    """Derivative ``d/dt h(M + t E)`` at ``t = 0``."""
    return Calculus(h, M, margin).frechet(E)
