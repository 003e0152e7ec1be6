"""Twisted loop algebras with central extension and derivation, handled grade by grade.

An element of the affine algebra is a finite sum of homogeneous loop terms
``xi^n`` (``xi`` in the eigenspace ``G_{n mod N}`` of the automorphism ``mu``)
plus multiples of the derivation ``d`` and the central element ``c``.
Because ``ad kappa`` preserves every grade, the r-matrix is a collection of
finite blocks and the operator CDYBE can be checked exactly on homogeneous
elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import funcalc
from .cdybe import EXACT_TOL, FD_TOL, VerificationReport
from .drmatrix import FD_STEP
from .errors import (
    BadGrade,
    BadParams,
    GradeMismatch,
    NoFixedPoints,
    NotAutomorphism,
    NotIsometry,
    WrongOrder,
)
from .funcalc import F_func, SpectralReport, f_func
from .lie import LieAlgebra, ad, bracket, build_algebra, form

AXIOM_TOL = 1e-10
GRADE_TOL = 1e-12
MAX_ORDER = 64


# ---------------------------------------------------------------- grading


@dataclass(frozen=True, eq=False)
class TwistedGrading:
    """Eigenspace decomposition ``G = sum_a G_a`` with ``mu|G_a = zeta^a``, ``zeta = exp(2 pi i / N)``.

    ``eigenspaces[a]`` has orthonormal (Hermitian) columns spanning ``G_a``;
    only classes with ``G_a != 0`` appear.
    """

    G: LieAlgebra
    mu: np.ndarray
    N: int
    eigenspaces: dict
    projectors: dict
    name: str = "custom"

    @property
    def classes(self) -> list:
        return sorted(self.eigenspaces)

    def block_dim(self, n: int) -> int:
        a = n % self.N
        base = self.eigenspaces[a].shape[1] if a in self.eigenspaces else 0
        return base + (2 if n == 0 else 0)

    def has_grade(self, n: int) -> bool:
        return n == 0 or (n % self.N) in self.eigenspaces

    def grades(self, window: int) -> list:
        return [n for n in range(-window, window + 1) if self.has_grade(n)]

    def basis(self, n: int) -> np.ndarray:
        a = n % self.N
        if a not in self.eigenspaces:
            if n == 0:
                return np.zeros((self.G.dim, 0), dtype=complex)
            raise BadGrade(f"grade {n}: eigenspace G_{a} is zero")
        return self.eigenspaces[a]

    def element(self, terms=None, d=0.0, c=0.0) -> "AffineElement":
        x = AffineElement({int(n): np.asarray(v, dtype=complex) for n, v in (terms or {}).items()}, complex(d), complex(c))
        check_element(self, x)
        return x


def _matrix_power_order(mu, tol, max_order):
    P = np.eye(mu.shape[0], dtype=complex)
    for N in range(1, max_order + 1):
        P = P @ mu
        if np.max(np.abs(P - np.eye(mu.shape[0]))) <= tol:
            return N
    return None


def build_twisted_grading(G: LieAlgebra, mu, N=None, tol=AXIOM_TOL, name="custom") -> TwistedGrading:
    mu = np.asarray(mu, dtype=complex)
    if mu.shape != (G.dim, G.dim):
        raise BadParams(f"mu must be {G.dim}x{G.dim}, got {mu.shape}")
    scale = max(1.0, float(np.max(np.abs(G.f))))
    # mu [T_a, T_b] vs [mu T_a, mu T_b]
    lhs = np.einsum("abc,dc->abd", G.f, mu)
    rhs = np.einsum("pa,qb,pqc->abc", mu, mu, G.f)
    err = float(np.max(np.abs(lhs - rhs)))
    if err > tol * scale:
        raise NotAutomorphism(f"mu does not preserve brackets (residual {err:.2e})", residual=err)
    err = float(np.max(np.abs(mu.T @ G.B @ mu - G.B)))
    if err > tol * max(1.0, float(np.max(np.abs(G.B)))):
        raise NotIsometry(f"mu does not preserve the invariant form (residual {err:.2e})", residual=err)
    if N is None:
        N = _matrix_power_order(mu, tol, MAX_ORDER)
        if N is None:
            raise WrongOrder(f"mu has no finite order <= {MAX_ORDER}")
    else:
        N = int(N)
        err = float(np.max(np.abs(np.linalg.matrix_power(mu, N) - np.eye(G.dim))))
        if N < 1 or err > tol:
            raise WrongOrder(f"mu^{N} != identity (residual {err:.2e})", residual=err)
    zeta = np.exp(2j * np.pi / N)
    powers = [np.linalg.matrix_power(mu, j) for j in range(N)]
    spaces, projectors = {}, {}
    total = 0
    for a in range(N):
        P = sum(zeta ** (-a * j) * powers[j] for j in range(N)) / N
        u, s, _ = np.linalg.svd(P)
        rank = int(np.sum(s > 1e-8 * max(1.0, s[0] if s.size else 1.0)))
        if rank:
            spaces[a] = u[:, :rank]
            projectors[a] = P
            total += rank
    if total != G.dim:
        raise WrongOrder(f"eigenspaces of mu span {total} of {G.dim} dimensions")
    if 0 not in spaces:
        raise NoFixedPoints("mu has no nonzero fixed points")
    for a, Qa in spaces.items():
        for b, Qb in spaces.items():
            if (a + b) % N:
                err = float(np.max(np.abs(Qa.T @ G.B @ Qb), initial=0.0))
                if err > 1e-8:
                    raise NotIsometry(f"G_{a} and G_{b} are not orthogonal (residual {err:.2e})", residual=err)
    for A_ in (mu,):
        A_.setflags(write=False)
    return TwistedGrading(G, mu, N, spaces, projectors, name=name)


def automorphism(G: LieAlgebra, name: str = "identity", **params) -> np.ndarray:
    """Catalog automorphisms: ``identity``; on ``sl(n)``: ``coxeter`` and ``diag`` (``h=[...]``)."""
    from .catalog import sl_conjugation

    key = name.lower()
    if key in ("id", "identity"):
        return np.eye(G.dim, dtype=complex)
    if G.meta.get("catalog") != "sl":
        raise BadParams(f"automorphism {name!r} is only available for sl(n)")
    n = G.meta["n"]
    if key == "coxeter":
        h = np.diag(np.exp(2j * np.pi * np.arange(n) / n))
    elif key == "diag":
        if "h" not in params:
            raise BadParams("diag automorphism needs h=[...]")
        h = np.diag(np.asarray(params["h"], dtype=complex))
    else:
        raise BadParams(f"unknown automorphism {name!r}")
    mu = sl_conjugation(n, h)
    # exact zeros and roots of unity keep the invariants at round-off
    mu[np.abs(mu) < 1e-15] = 0
    return mu


def grading_from_catalog(G: LieAlgebra, mu_name: str = "identity", **params) -> TwistedGrading:
    return build_twisted_grading(G, automorphism(G, mu_name, **params), name=mu_name)


def grading_to_dict(g: TwistedGrading) -> dict:
    return {
        "G": g.G.name,
        "mu": [[[float(x.real), float(x.imag)] for x in row] for row in g.mu],
        "N": g.N,
        "eigenspace_dims": {str(a): int(Q.shape[1]) for a, Q in sorted(g.eigenspaces.items())},
    }


# ---------------------------------------------------------------- elements


@dataclass(frozen=True, eq=False)
class AffineElement:
    """``sum_n terms[n] * lambda^n + d * D + c * C``; ``terms`` maps grade to a G-vector."""

    terms: dict = field(default_factory=dict)
    d: complex = 0.0
    c: complex = 0.0

    def __add__(self, other):
        terms = {n: v.copy() for n, v in self.terms.items()}
        for n, v in other.terms.items():
            terms[n] = terms[n] + v if n in terms else v.copy()
        return AffineElement(terms, self.d + other.d, self.c + other.c)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, s):
        return AffineElement({n: s * v for n, v in self.terms.items()}, s * self.d, s * self.c)

    def norm(self) -> float:
        vals = [abs(self.d), abs(self.c)] + [float(np.max(np.abs(v), initial=0.0)) for v in self.terms.values()]
        return float(max(vals))


@dataclass(frozen=True)
class AffineKappa:
    """``omega + k d + l c`` with ``omega`` in ``G_0``."""

    omega: np.ndarray
    k: complex
    l: complex = 0.0


def check_element(g: TwistedGrading, x: AffineElement, tol=GRADE_TOL):
    for n, v in x.terms.items():
        a = n % g.N
        scale = max(1.0, float(np.max(np.abs(v), initial=0.0)))
        if a not in g.eigenspaces:
            if np.any(np.abs(v) > tol * scale):
                raise GradeMismatch(f"grade {n} term is nonzero but G_{a} = 0")
            continue
        err = float(np.max(np.abs(v - g.projectors[a] @ v), initial=0.0))
        if err > tol * scale:
            raise GradeMismatch(f"grade {n} term is not in G_{a} (residual {err:.2e})")


def check_kappa(g: TwistedGrading, kappa: AffineKappa, tol=GRADE_TOL):
    check_element(g, AffineElement({0: np.asarray(kappa.omega, dtype=complex)}))


def affine_bracket(g: TwistedGrading, x: AffineElement, y: AffineElement) -> AffineElement:
    check_element(g, x)
    check_element(g, y)
    G = g.G
    terms, c = {}, 0.0
    for m, xi in x.terms.items():
        for n, eta in y.terms.items():
            v = bracket(G, xi, eta)
            terms[m + n] = terms[m + n] + v if m + n in terms else v
            if m + n == 0:
                c += m * form(G, xi, eta)
    # [d, eta^n] = n eta^n
    for n, eta in y.terms.items():
        terms[n] = terms.get(n, 0) + x.d * n * eta
    for m, xi in x.terms.items():
        terms[m] = terms.get(m, 0) - y.d * m * xi
    return AffineElement({n: np.asarray(v, dtype=complex) for n, v in terms.items()}, 0.0, c)


def affine_form(g: TwistedGrading, x: AffineElement, y: AffineElement) -> complex:
    total = x.d * y.c + x.c * y.d
    for m, xi in x.terms.items():
        if -m in y.terms:
            total += form(g.G, xi, y.terms[-m])
    return complex(total)


def homogeneous(g: TwistedGrading, n: int, coords) -> AffineElement:
    """Element of grade ``n`` from block coordinates (for ``n = 0``: G_0 coords, then d, c)."""
    coords = np.asarray(coords, dtype=complex)
    Q = g.basis(n)
    xi = Q @ coords[: Q.shape[1]]
    if n == 0:
        return AffineElement({0: xi}, coords[-2], coords[-1])
    return AffineElement({n: xi})


def block_coords(g: TwistedGrading, x: AffineElement, n: int) -> np.ndarray:
    Q = g.basis(n)
    xi = x.terms.get(n)
    u = np.zeros(Q.shape[1], dtype=complex) if xi is None else Q.conj().T @ xi
    if n == 0:
        return np.concatenate([u, [x.d, x.c]])
    return u


# ---------------------------------------------------------------- blocks


def _check_grade(g, n):
    if not g.has_grade(int(n)):
        raise BadGrade(f"grade {n}: eigenspace G_{n % g.N} is zero")
    return int(n)


def _ad_on_block(g, x0, n):
    """Matrix of ``ad x0`` (``x0`` in ``G_0``) on the G-part of grade ``n`` in block coordinates."""
    Q = g.basis(n)
    return Q.conj().T @ ad(g.G, x0) @ Q


def ad_kappa_block(g: TwistedGrading, kappa: AffineKappa, n: int) -> np.ndarray:
    """``(ad kappa)`` on ``A_n``; for ``n = 0`` the block acts on ``G_0 + C d + C c`` and kills ``d, c``."""
    n = _check_grade(g, n)
    M = _ad_on_block(g, np.asarray(kappa.omega, dtype=complex), n)
    if n == 0:
        out = np.zeros((M.shape[0] + 2,) * 2, dtype=complex)
        out[: M.shape[0], : M.shape[0]] = M
        return out
    return M + kappa.k * n * np.eye(M.shape[0])


def _direction_block(g, T: AffineElement, n):
    """Derivative of ``ad kappa`` on ``A_n`` along ``T`` in ``A_0``."""
    tau = T.terms.get(0, np.zeros(g.G.dim, dtype=complex))
    M = _ad_on_block(g, tau, n)
    if n == 0:
        out = np.zeros((M.shape[0] + 2,) * 2, dtype=complex)
        out[: M.shape[0], : M.shape[0]] = M
        return out
    return M + T.d * n * np.eye(M.shape[0])


def block_function(n: int) -> funcalc.HoloFunc:
    return f_func if n == 0 else F_func


def affine_R_block(g: TwistedGrading, kappa: AffineKappa, n: int, margin=funcalc.POLE_MARGIN) -> np.ndarray:
    """``f((ad kappa)_0)`` at grade 0 and ``F((ad kappa)_n)`` otherwise."""
    n = _check_grade(g, n)
    return funcalc.Calculus(block_function(n), ad_kappa_block(g, kappa, n), margin).value


class AffineRMatrix:
    """Block r-matrix at a fixed ``kappa`` with cached functional calculus per grade."""

    def __init__(self, g: TwistedGrading, kappa: AffineKappa, margin=funcalc.POLE_MARGIN):
        check_kappa(g, kappa)
        self.g = g
        self.kappa = kappa
        self.margin = margin
        self._calc = {}

    def calculus(self, n) -> funcalc.Calculus:
        n = _check_grade(self.g, n)
        if n not in self._calc:
            self._calc[n] = funcalc.Calculus(block_function(n), ad_kappa_block(self.g, self.kappa, n), self.margin)
        return self._calc[n]

    def block(self, n) -> np.ndarray:
        return self.calculus(n).value

    def _apply_blockwise(self, x: AffineElement, op) -> AffineElement:
        out = AffineElement()
        grades = set(x.terms)
        if x.d != 0 or x.c != 0:
            grades.add(0)
        for n in sorted(grades):
            u = block_coords(self.g, x, n)
            out = out + homogeneous(self.g, n, op(n) @ u)
        return out

    def apply(self, x: AffineElement) -> AffineElement:
        return self._apply_blockwise(x, self.block)

    def derivative(self, T: AffineElement, x: AffineElement, mode="exact", step=FD_STEP) -> AffineElement:
        """``(nabla_T R) x`` for ``T`` in ``A_0``."""
        if mode == "exact":
            return self._apply_blockwise(x, lambda n: self.calculus(n).frechet(_direction_block(self.g, T, n)))
        return self._apply_blockwise(x, lambda n: self._fd_block(T, n, step))

    def _fd_block(self, T, n, step):
        tau = T.terms.get(0, np.zeros(self.g.G.dim, dtype=complex))

        def at(s):
            k = AffineKappa(self.kappa.omega + s * tau, self.kappa.k + s * T.d, self.kappa.l + s * T.c)
            return affine_R_block(self.g, k, n, self.margin)

        central = lambda h: (at(h) - at(-h)) / (2 * h)
        return (4 * central(step / 2) - central(step)) / 3


# ---------------------------------------------------------------- domain


def _lattice_collision(k, lam, residue, N, include_zero_grade):
    """Minimum over grades ``n = residue (mod N)`` of the distance of ``k n + lam`` to the pole set."""
    k = complex(k)
    best, where = np.inf, None
    if k.real == 0:
        return None, None
    center = -lam.real / k.real
    m0 = int(np.round((center - residue) / N))
    # walk outward until |Re(k n + lam)| alone exceeds the best distance found
    for direction in (1, -1):
        m = m0 if direction == 1 else m0 - 1
        while True:
            n = residue + m * N
            re_part = abs(k.real * n + lam.real)
            if re_part > best and abs(n - center) > N:
                break
            z = k * n + lam
            if n == 0:
                dist = float(funcalc._nearest_lattice_distance(np.atleast_1d(z), include_zero=False)[0])
            else:
                dist = float(funcalc._nearest_lattice_distance(np.atleast_1d(z), include_zero=True)[0])
            if (n != 0 or include_zero_grade) and dist < best:
                best, where = dist, n
            m += direction
            if abs(m - m0) > 10_000:
                break
    return best, where


def domain_check(g: TwistedGrading, kappa: AffineKappa, window: int = 3, margin=funcalc.POLE_MARGIN) -> SpectralReport:
    check_kappa(g, kappa)
    eigs, worst, blocks = [], np.inf, {}
    for n in g.grades(window):
        rep = funcalc.spectrum_check(block_function(n), ad_kappa_block(g, kappa, n), margin)
        eigs.extend(rep.eigenvalues)
        blocks[str(n)] = {"min_pole_distance": float(rep.min_pole_distance), "admissible": rep.admissible}
        worst = min(worst, rep.min_pole_distance)
    # all grades: k n + lambda_j avoids the poles
    all_grades = None
    collision = None
    if complex(kappa.k).real != 0:
        all_grades = np.inf
        for a in g.classes:
            lams = np.linalg.eigvals(_ad_on_block(g, np.asarray(kappa.omega, dtype=complex), a))
            for lam in lams:
                dist, n = _lattice_collision(kappa.k, lam, a, g.N, include_zero_grade=True)
                if dist is not None and dist < all_grades:
                    all_grades, collision = dist, n
    certified = all_grades is not None and all_grades > margin
    details = {
        "window": window,
        "blocks": blocks,
        "all_grades_certified": bool(certified),
        "all_grades_min_distance": None if all_grades is None else float(all_grades),
        "closest_grade": collision,
    }
    return SpectralReport(eigs, float(worst), bool(worst > margin), details)


# ---------------------------------------------------------------- operator CDYBE


def grade_zero_algebra(g: TwistedGrading) -> LieAlgebra:
    """``A_0 = G_0 + C d + C c`` as a finite Lie algebra in block coordinates."""
    Q = g.basis(0)
    r = Q.shape[1]
    dim = r + 2
    f = np.zeros((dim, dim, dim), dtype=complex)
    Qh = Q.conj().T
    f[:r, :r, :r] = np.einsum("pa,qb,pqc,kc->abk", Q, Q, g.G.f, Qh)
    B = np.zeros((dim, dim), dtype=complex)
    B[:r, :r] = Q.T @ g.G.B @ Q
    B[r, r + 1] = B[r + 1, r] = 1
    labels = [f"g0_{i}" for i in range(r)] + ["d", "c"]
    return build_algebra(f, B, labels, name=f"A0({g.G.name})")


def operator_cdybe_affine(Rm: AffineRMatrix, X: AffineElement, Y: AffineElement, C=0.5, mode="exact") -> AffineElement:
    """Left side of the operator CDYBE plus ``C^2 [X, Y]`` for the block r-matrix."""
    g = Rm.g
    br = lambda u, v: affine_bracket(g, u, v)
    RX, RY = Rm.apply(X), Rm.apply(Y)
    out = br(RX, RY) - Rm.apply(br(X, RY) + br(RX, Y))
    # sum_i K^i <X, (nabla_{K_i} R) Y> over a basis of A_0
    A0 = grade_zero_algebra(g)
    Ginv = np.linalg.inv(A0.B)
    vals = np.array(
        [affine_form(g, X, Rm.derivative(homogeneous(g, 0, np.eye(A0.dim)[i]), Y, mode)) for i in range(A0.dim)]
    )
    if np.any(vals != 0):
        out = out + homogeneous(g, 0, Ginv @ vals)
    XK = _grade_zero_part(X)
    YK = _grade_zero_part(Y)
    out = out + Rm.derivative(YK, X, mode) - Rm.derivative(XK, Y, mode)
    return out + br(X, Y).scale(C**2)


def _grade_zero_part(x: AffineElement) -> AffineElement:
    terms = {0: x.terms[0]} if 0 in x.terms else {}
    return AffineElement(terms, x.d, x.c)


def random_homogeneous(g: TwistedGrading, n: int, rng, with_dc=True) -> AffineElement:
    dim = g.block_dim(n)
    u = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    if n == 0 and not with_dc:
        u[-2:] = 0
    return homogeneous(g, n, u)


def grade_pairs(g: TwistedGrading, window: int) -> list:
    gr = g.grades(window)
    return [(m, n) for m in gr for n in gr if abs(m + n) <= window]


def verify_prop2(
    g: TwistedGrading,
    kappa: AffineKappa,
    window: int = 3,
    samples: int = 50,
    seed: int = 0,
    derivative_mode: str = "exact",
    tol=None,
) -> VerificationReport:
    """Operator CDYBE with ``C = 1/2`` on random homogeneous pairs with grades in the window.

    Every grade pair is visited before any repeats, so ``samples >= len(grade_pairs)``
    covers grade 0 with ``d, c`` components, central terms ``m + n = 0`` and generic pairs.
    """
    tol = tol if tol is not None else (EXACT_TOL if derivative_mode == "exact" else FD_TOL)
    rep = domain_check(g, kappa, window)
    if not rep.admissible:
        from .errors import InadmissibleSpectrum

        raise InadmissibleSpectrum(f"kappa is not admissible on grade window {window}")
    rng = np.random.default_rng(seed)
    pairs = grade_pairs(g, window)
    order = list(rng.permutation(len(pairs)))
    while len(order) < samples:
        order += list(rng.permutation(len(pairs)))
    Rm = AffineRMatrix(g, kappa)
    points, residuals = [], []
    for idx in order[:samples]:
        m, n = pairs[idx]
        X = random_homogeneous(g, m, rng)
        Y = random_homogeneous(g, n, rng)
        res = operator_cdybe_affine(Rm, X, Y, 0.5, derivative_mode)
        scale = max(1.0, X.norm() * Y.norm())
        points.append({"m": int(m), "n": int(n)})
        residuals.append(res.norm() / scale)
    return VerificationReport(
        "prop2",
        points,
        residuals,
        tol,
        {
            "G": g.G.name,
            "mu": g.name,
            "N": g.N,
            "window": window,
            "seed": seed,
            "derivative_mode": derivative_mode,
            "kappa": {
                "omega": [[float(x.real), float(x.imag)] for x in np.asarray(kappa.omega, dtype=complex)],
                "k": [float(complex(kappa.k).real), float(complex(kappa.k).imag)],
                "l": [float(complex(kappa.l).real), float(complex(kappa.l).imag)],
            },
            "all_grades_certified": rep.details["all_grades_certified"],
        },
        point_key="grades",
    )
