"""Dynamical r-matrix fields and the Dirac reduction ``r -> r* = r + D``.

A field maps a dynamical variable (an element of the dynamical subalgebra,
identified with its dual through the invariant form) to the coefficient matrix
``r^{ab}`` of ``r = r^{ab} T_a (x) T_b``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import funcalc
from .errors import DomainError, OnWall, SingularAd, SingularC
from .lie import Chain, LieAlgebra, ad, dual_basis

C_COND_MAX = 1e8
FD_STEP = 1e-5


def tensor_to_operator(A: LieAlgebra, r) -> np.ndarray:
    return np.asarray(r) @ A.B


def operator_to_tensor(A: LieAlgebra, R) -> np.ndarray:
    return np.asarray(R) @ A.Binv


class _LastCache:
    """Remember the most recent ``key -> value`` pair (derivative sweeps reuse one point)."""

    def __init__(self, build):
        self.build = build
        self.key = None
        self.value = None

    def __call__(self, x):
        key = np.asarray(x, dtype=complex).tobytes()
        if key != self.key:
            self.value = self.build(np.asarray(x, dtype=complex))
            self.key = key
        return self.value


@dataclass(frozen=True, eq=False)
class RMatrixField:
    algebra: LieAlgebra
    dyn: np.ndarray
    evaluate: Callable
    sym_part: np.ndarray
    domain_test: Callable = lambda kappa: True
    exact_derivative: Optional[Callable] = None
    name: str = "field"
    meta: dict = field(default_factory=dict)

    def __call__(self, kappa) -> np.ndarray:
        return self.evaluate(np.asarray(kappa, dtype=complex))

    def operator(self, kappa) -> np.ndarray:
        return tensor_to_operator(self.algebra, self(kappa))

    @property
    def dyn_dual(self) -> np.ndarray:
        return dual_basis(self.algebra, self.dyn)

    def derivative(self, kappa, direction, mode="auto", step=FD_STEP) -> np.ndarray:
        """``d/dt r(kappa + t*direction)`` at ``t = 0``.

        ``mode`` is ``"exact"``, ``"fd"`` (central differences with one Richardson
        step) or ``"auto"`` (exact when available).
        """
        kappa = np.asarray(kappa, dtype=complex)
        direction = np.asarray(direction, dtype=complex)
        if mode == "exact" and self.exact_derivative is None:
            raise ValueError(f"field {self.name!r} has no exact derivative")
        if mode in ("exact", "auto") and self.exact_derivative is not None:
            return self.exact_derivative(kappa, direction)
        return richardson_derivative(self, kappa, direction, step)

    def plus_constant(self, const, name=None) -> "RMatrixField":
        const = np.asarray(const, dtype=complex)
        ev = self.evaluate
        sym = 0.5 * (const + const.T)
        return replace(
            self,
            evaluate=lambda k: ev(k) + const,
            sym_part=self.sym_part + sym,
            name=name or f"{self.name}+const",
        )

    def antisymmetric_part(self) -> "RMatrixField":
        return self.plus_constant(-self.sym_part, name=f"{self.name}^a")


def richardson_derivative(fieldobj, kappa, direction, step=FD_STEP):
    def central(h):
        return (fieldobj(kappa + h * direction) - fieldobj(kappa - h * direction)) / (2 * h)

    return (4 * central(step / 2) - central(step)) / 3


@dataclass(frozen=True, eq=False)
class OperatorField:
    """Operator-valued version of :class:`RMatrixField` (``R = r @ B``)."""

    algebra: LieAlgebra
    dyn: np.ndarray
    eval_op: Callable
    derivative_op: Optional[Callable] = None
    name: str = "operator"

    def __call__(self, kappa):
        return self.eval_op(np.asarray(kappa, dtype=complex))

    def derivative(self, kappa, direction, mode="auto", step=FD_STEP):
        kappa = np.asarray(kappa, dtype=complex)
        direction = np.asarray(direction, dtype=complex)
        if mode in ("exact", "auto") and self.derivative_op is not None:
            return self.derivative_op(kappa, direction)
        return richardson_derivative(self, kappa, direction, step)


def field_to_operator(r: RMatrixField) -> OperatorField:
    B = r.algebra.B
    deriv = None
    if r.exact_derivative is not None:
        deriv = lambda k, t: r.exact_derivative(k, t) @ B
    return OperatorField(r.algebra, r.dyn, lambda k: r(k) @ B, deriv, name=r.name)


def operator_to_field(R: OperatorField, sym_part=None) -> RMatrixField:
    A = R.algebra
    Binv = A.Binv
    deriv = None
    if R.derivative_op is not None:
        deriv = lambda k, t: R.derivative_op(k, t) @ Binv
    sym = np.zeros((A.dim, A.dim), dtype=complex) if sym_part is None else sym_part
    return RMatrixField(A, R.dyn, lambda k: R(k) @ Binv, sym, exact_derivative=deriv, name=R.name)


def zero_field(A: LieAlgebra, dyn=None) -> RMatrixField:
    dyn = np.eye(A.dim, dtype=complex) if dyn is None else dyn
    zero = np.zeros((A.dim, A.dim), dtype=complex)
    return RMatrixField(
        A, dyn, lambda k: zero.copy(), zero.copy(), exact_derivative=lambda k, t: zero.copy(), name="zero"
    )


def constant_field(A: LieAlgebra, const, dyn=None, name="constant") -> RMatrixField:
    const = np.asarray(const, dtype=complex)
    return zero_field(A, dyn).plus_constant(const, name=name)


# ---------------------------------------------------------------- canonical


def canonical_r(A: LieAlgebra, sign: int = +1, margin=funcalc.POLE_MARGIN) -> RMatrixField:
    """Canonical field: operator ``f(ad lambda) + sign/2``, dynamical on all of ``A``."""
    if sign not in (+1, -1, 0):
        raise ValueError("sign must be +1, -1 or 0")
    Binv = A.Binv
    calc = _LastCache(lambda lam: funcalc.Calculus(funcalc.f_func, ad(A, lam), margin))
    shift = 0.5 * sign * np.eye(A.dim)

    def evaluate(lam):
        return (calc(lam).value + shift) @ Binv

    def deriv(lam, T):
        return calc(lam).frechet(ad(A, T)) @ Binv

    def domain(lam):
        return funcalc.spectrum_check(funcalc.f_func, ad(A, lam), margin).admissible

    return RMatrixField(
        A,
        np.eye(A.dim, dtype=complex),
        evaluate,
        0.5 * sign * Binv,
        domain,
        deriv,
        name=f"canonical{'+' if sign > 0 else '-' if sign < 0 else '0'}",
        meta={"construction": "canonical", "sign": sign},
    )


# ---------------------------------------------------------------- Dirac reduction


def _k_coords(chain: Chain, kappa):
    """``kappa_i = <kappa, K_i>``."""
    return chain.K.T @ chain.algebra.B @ kappa


def _mm_structure_K(chain: Chain):
    """``f_{alpha beta}^i``: K-components of ``[M_alpha, M_beta]`` in the adapted basis."""
    A = chain.algebra
    br = np.einsum("ai,bj,abc->cij", chain.M, chain.M, A.f)
    Qinv = np.linalg.inv(chain.adapted_basis)
    k = chain.K.shape[1]
    return np.einsum("ic,cab->abi", Qinv[:k], br)


def c_matrix(chain: Chain, kappa) -> np.ndarray:
    """``C_{alpha beta}(kappa) = -f_{alpha beta}^i kappa_i``."""
    return -np.einsum("abi,i->ab", _mm_structure_K(chain), _k_coords(chain, np.asarray(kappa, dtype=complex)))


def _check_c(C, cond_max=C_COND_MAX):
    if C.size == 0:
        return
    if C.shape[0] % 2:
        # C is antisymmetric in (alpha, beta) for every kappa
        raise SingularC(f"SingularC everywhere (odd d): C(kappa) is antisymmetric of odd size {C.shape[0]}")
    s = np.linalg.svd(C, compute_uv=False)
    if s[-1] == 0 or s[0] / s[-1] > cond_max or s[0] < 1e-300:
        raise SingularC(
            f"C(kappa) is not invertible (condition number {s[0] / s[-1] if s[-1] else np.inf:.2e})"
        )


def dirac_D(chain: Chain, kappa, cond_max=C_COND_MAX) -> np.ndarray:
    """``D(kappa) = D^{alpha beta} M_alpha (x) M_beta`` with ``D = C^{-1}``."""
    C = c_matrix(chain, kappa)
    _check_c(C, cond_max)
    return chain.M @ np.linalg.inv(C) @ chain.M.T


def dirac_D_field(chain: Chain, cond_max=C_COND_MAX) -> RMatrixField:
    A = chain.algebra
    fK = _mm_structure_K(chain)
    Mb = chain.M

    def C_of(k):
        return -np.einsum("abi,i->ab", fK, _k_coords(chain, k))

    def evaluate(k):
        C = C_of(k)
        _check_c(C, cond_max)
        return Mb @ np.linalg.inv(C) @ Mb.T

    def deriv(k, T):
        D = np.linalg.inv(C_of(k))
        return -Mb @ (D @ C_of(T) @ D) @ Mb.T

    def domain(k):
        try:
            _check_c(C_of(k), cond_max)
        except SingularC:
            return False
        return True

    zero = np.zeros((A.dim, A.dim), dtype=complex)
    return RMatrixField(A, chain.K, evaluate, zero, domain, deriv, name="D", meta={"construction": "dirac_D"})


def lift_to_L(chain: Chain, kappa):
    """The point of ``L`` with ``<lam, M> = 0`` and ``<lam, K_i> = <kappa, K_i>``."""
    if chain.orthogonal:
        return np.asarray(kappa, dtype=complex)
    B = chain.algebra.B
    L = chain.L
    lhs = np.vstack([chain.M.T @ B @ L, chain.K.T @ B @ L])
    rhs = np.concatenate([np.zeros(chain.M.shape[1], dtype=complex), chain.K.T @ B @ kappa])
    c = np.linalg.solve(lhs, rhs)
    return L @ c


def reduce(r: RMatrixField, chain: Chain, cond_max=C_COND_MAX) -> RMatrixField:
    """``r*(kappa) = r(kappa) + D(kappa)`` for ``kappa`` in the reduced domain."""
    if np.linalg.matrix_rank(np.hstack([r.dyn, chain.L])) != r.dyn.shape[1] or r.dyn.shape[1] != chain.L.shape[1]:
        raise ValueError("dynamical subalgebra of the field does not match L of the chain")
    D = dirac_D_field(chain, cond_max)

    def evaluate(k):
        return r(lift_to_L(chain, k)) + D(k)

    def domain(k):
        return D.domain_test(k) and r.domain_test(lift_to_L(chain, k))

    deriv = None
    if r.exact_derivative is not None:

        def deriv(k, T):
            return r.exact_derivative(lift_to_L(chain, k), lift_to_L(chain, T)) + D.exact_derivative(k, T)

    return RMatrixField(
        r.algebra,
        chain.K,
        evaluate,
        r.sym_part,
        domain,
        deriv,
        name=f"reduce({r.name})",
        meta={"construction": "reduce", "parent": r.meta, "chain": chain.description},
    )


# ---------------------------------------------------------------- closed forms


def _orth_complement(A: LieAlgebra, K):
    from .lie import _complement

    return _complement(A, np.eye(A.dim, dtype=complex), K)


def reduced_canonical(A: LieAlgebra, K, sign: int = +1, margin=funcalc.POLE_MARGIN) -> RMatrixField:
    """Direct block formula: ``f(ad k) + s/2`` on K, ``(1/2)coth(ad k / 2) + s/2`` on the orthocomplement."""
    K = np.asarray(K, dtype=complex) if np.ndim(K) == 2 else A.coord_subspace(list(K))
    dual_basis(A, K)
    Kp = _orth_complement(A, K)
    Q = np.hstack([K, Kp])
    Qinv = np.linalg.inv(Q)
    nk = K.shape[1]
    Binv = A.Binv
    shift = 0.5 * sign * np.eye(A.dim)

    def blocks(M):
        T = Qinv @ M @ Q
        return T[:nk, :nk], T[nk:, nk:]

    def build(k):
        bk, bm = blocks(ad(A, k))
        calc_m = None
        if bm.size:
            eig = np.linalg.eigvals(bm)
            if np.min(np.abs(eig)) <= margin:
                raise SingularAd(f"ad kappa is not invertible on the orthocomplement (|eig| {np.min(np.abs(eig)):.2e})")
            calc_m = funcalc.Calculus(funcalc.F_func, bm, margin)
        calc_k = funcalc.Calculus(funcalc.f_func, bk, margin)
        return calc_k, calc_m

    cache = _LastCache(build)

    def assemble(bk, bm):
        out = np.zeros((A.dim, A.dim), dtype=complex)
        out[:nk, :nk] = bk
        if bm is not None:
            out[nk:, nk:] = bm
        return Q @ out @ Qinv

    def evaluate(k):
        ck, cm = cache(k)
        return (assemble(ck.value, cm.value if cm else None) + shift) @ Binv

    def deriv(k, T):
        ck, cm = cache(k)
        tk, tm = blocks(ad(A, T))
        return assemble(ck.frechet(tk), cm.frechet(tm) if cm else None) @ Binv

    def domain(k):
        try:
            cache(k)
        except DomainError:
            return False
        return True

    return RMatrixField(
        A,
        K,
        evaluate,
        0.5 * sign * Binv,
        domain,
        deriv,
        name=f"reduced_canonical{'+' if sign > 0 else '-' if sign < 0 else '0'}",
        meta={"construction": "reduced_canonical", "sign": sign},
    )


@dataclass
class RootData:
    cartan: np.ndarray  # dim x rank
    roots: np.ndarray  # (nroots, rank): alpha(H_i)
    vectors: np.ndarray  # dim x nroots, normalised so <M_a, M_-a> = 2/|a|^2
    partner: np.ndarray  # index of -alpha
    norms2: np.ndarray  # |alpha|^2

    def values(self, A, kappa):
        c = np.linalg.lstsq(self.cartan, kappa, rcond=None)[0]
        return self.roots @ c


def root_data(A: LieAlgebra, cartan=None, seed=12345) -> RootData:
    """Roots from the eigenvectors of ``ad`` of a random regular Cartan element."""
    if cartan is None:
        cartan = A.coord_subspace([i for i, lab in enumerate(A.labels) if lab.startswith("H")])
    cartan = np.asarray(cartan, dtype=complex)
    rng = np.random.default_rng(seed)
    reg = cartan @ (rng.uniform(0.5, 1.5, cartan.shape[1]) + 1j * rng.uniform(0.5, 1.5, cartan.shape[1]))
    w, V = np.linalg.eig(ad(A, reg))
    nonzero = np.abs(w) > 1e-8
    vecs = V[:, nonzero]
    if vecs.shape[1] != A.dim - cartan.shape[1]:
        raise ValueError("cartan subspace is not a Cartan subalgebra")
    roots = []
    for j in range(vecs.shape[1]):
        v = vecs[:, j]
        big = int(np.argmax(np.abs(v)))
        v = v / v[big]
        vecs[:, j] = v
        roots.append([(ad(A, cartan[:, i]) @ v)[big] for i in range(cartan.shape[1])])
    roots = np.array(roots)
    partner = np.array([int(np.argmin(np.linalg.norm(roots + roots[j], axis=1))) for j in range(len(roots))])
    if np.max(np.abs(roots + roots[partner])) > 1e-8:
        raise ValueError("root system is not closed under negation")
    Ginv = np.linalg.inv(cartan.T @ A.B @ cartan)
    norms2 = np.einsum("ni,ij,nj->n", roots, Ginv, roots)
    # rescale so that <M_alpha, M_-alpha> = 2/|alpha|^2; only one root of each pair is rescaled
    for j in range(len(roots)):
        p = partner[j]
        if j < p:
            pair = vecs[:, j] @ A.B @ vecs[:, p]
            vecs[:, p] *= (2 / norms2[j]) / pair
    return RootData(cartan, roots, vecs, partner, norms2)


def _cartan_closed_form(A, rd: RootData, kernel, dkernel, const, name, sign, margin):
    def alpha_values(k):
        vals = rd.values(A, k)
        return vals

    def check(vals):
        d0 = np.min(np.abs(vals))
        dl = np.min(funcalc._nearest_lattice_distance(vals, include_zero=True))
        if min(d0, dl) <= margin:
            raise OnWall(f"kappa lies on a wall: min distance of root values to 2*pi*i*Z is {min(d0, dl):.2e}")

    def assemble(coef):
        Mp = rd.vectors
        Mm = rd.vectors[:, rd.partner]
        return (Mp * coef) @ Mm.T

    def evaluate(k):
        vals = alpha_values(k)
        check(vals)
        return const + assemble(rd.norms2 * kernel(vals))

    def deriv(k, T):
        vals = alpha_values(k)
        return assemble(rd.norms2 * dkernel(vals) * alpha_values(T))

    def domain(k):
        try:
            check(alpha_values(k))
        except OnWall:
            return False
        return True

    return RMatrixField(
        A,
        rd.cartan,
        evaluate,
        0.5 * (const + const.T),
        domain,
        deriv,
        name=name,
        meta={"construction": name, "sign": sign},
    )


def trig_cartan(A: LieAlgebra, sign: int = +1, cartan=None, margin=funcalc.POLE_MARGIN) -> RMatrixField:
    """``s/2 I_hat + sum_alpha |alpha|^2/4 coth(alpha(kappa)/2) M_alpha (x) M_-alpha``."""
    rd = root_data(A, cartan)
    kernel = lambda v: 0.25 / np.tanh(v / 2)
    dkernel = lambda v: -0.125 / np.sinh(v / 2) ** 2
    return _cartan_closed_form(A, rd, kernel, dkernel, 0.5 * sign * A.Binv, "trig_cartan", sign, margin)


def rational_cartan(A: LieAlgebra, cartan=None, margin=funcalc.POLE_MARGIN) -> RMatrixField:
    """``sum_alpha |alpha|^2 / (2 alpha(kappa)) M_alpha (x) M_-alpha``."""
    rd = root_data(A, cartan)
    kernel = lambda v: 0.5 / v
    dkernel = lambda v: -0.5 / v**2
    zero = np.zeros((A.dim, A.dim), dtype=complex)
    fieldobj = _cartan_closed_form(A, rd, kernel, dkernel, zero, "rational_cartan", 0, margin)
    # regular on 2*pi*i*Z*; only alpha(kappa) = 0 is a wall
    dv = fieldobj.exact_derivative

    def evaluate(k):
        vals = rd.values(A, k)
        if np.min(np.abs(vals)) <= margin:
            raise OnWall(f"kappa lies on a wall: min |alpha(kappa)| = {np.min(np.abs(vals)):.2e}")
        return zero + ((rd.vectors * (rd.norms2 * kernel(vals))) @ rd.vectors[:, rd.partner].T)

    def domain(k):
        return bool(np.min(np.abs(rd.values(A, k))) > margin)

    return replace(fieldobj, evaluate=evaluate, domain_test=domain, exact_derivative=dv)


def split_identity_check(r_a: RMatrixField, r_s, kappa, derivative_mode="auto") -> float:
    """``max |CDYB(r_a + r_s) - CDYB(r_a) - [r_s12, r_s13]|`` at ``kappa``."""
    from .cdybe import cdyb

    r_s = np.asarray(r_s, dtype=complex)
    full = r_a.plus_constant(r_s)
    lhs = cdyb(full, kappa, derivative_mode)
    A = r_a.algebra
    rhs = cdyb(r_a, kappa, derivative_mode) + np.einsum("ace,ab,cd->ebd", A.f, r_s, r_s)
    return float(np.max(np.abs(lhs - rhs)))
