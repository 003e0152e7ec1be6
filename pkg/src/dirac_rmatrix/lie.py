"""Finite-dimensional self-dual Lie algebras given by structure constants.

Conventions used throughout the package:

* ``f[a, b, c]`` is the coefficient of ``T_c`` in ``[T_a, T_b]``.
* ``B[a, b] = <T_a, T_b>`` is the invariant symmetric form.
* Elements are plain complex coefficient vectors over the basis.
* A tensor ``r = r^{ab} T_a (x) T_b`` is stored as the matrix ``r[a, b]``.
  Its operator (``X (x) Y`` acts as ``Z -> <Y, Z> X``) is ``r @ B``.
* Subspaces are coefficient matrices whose columns span them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    AntisymmetryViolation,
    ComplementNotInvariant,
    DegenerateForm,
    DegenerateRestriction,
    InvarianceViolation,
    JacobiViolation,
    NotSubalgebra,
    ShapeError,
)

DEFAULT_TOL = 1e-10
NONDEGENERACY_THRESHOLD = 1e-10


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    f: np.ndarray
    B: np.ndarray
    labels: tuple[str, ...]
    name: str = "custom"
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.f.shape[0]

    @property
    def Binv(self) -> np.ndarray:
        return np.linalg.inv(self.B)

    def basis_vector(self, label) -> np.ndarray:
        idx = label if isinstance(label, (int, np.integer)) else self.labels.index(label)
        e = np.zeros(self.dim, dtype=complex)
        e[idx] = 1.0
        return e

    def element(self, spec) -> np.ndarray:
        """Build an element from a label, a ``{label: coeff}`` dict, a string
        like ``"0.3H + 0.1E"`` or an explicit coefficient vector."""
        if isinstance(spec, str):
            return parse_element(self, spec)
        if isinstance(spec, dict):
            x = np.zeros(self.dim, dtype=complex)
            for key, val in spec.items():
                x = x + val * self.basis_vector(key)
            return x
        x = np.asarray(spec, dtype=complex)
        if x.shape != (self.dim,):
            raise ShapeError(f"expected vector of length {self.dim}, got {x.shape}")
        return x

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def indices(self, labels) -> list[int]:
        return [lab if isinstance(lab, (int, np.integer)) else self.labels.index(lab) for lab in labels]

    def coord_subspace(self, indices) -> np.ndarray:
        S = np.zeros((self.dim, len(indices)), dtype=complex)
        for j, i in enumerate(self.indices(indices)):
            S[i, j] = 1.0
        return S


def _scale(arr) -> float:
    m = float(np.max(np.abs(arr))) if arr.size else 0.0
    return max(m, 1.0)


def _worst(res):
    idx = np.unravel_index(int(np.argmax(np.abs(res))), res.shape)
    return tuple(int(i) for i in idx), float(np.abs(res[idx]))


def antisymmetry_residual(f):
    return f + np.transpose(f, (1, 0, 2))


def jacobi_residual(f):
    """``J[a,b,c,d]``: coefficient of ``T_d`` in the cyclic Jacobi sum."""
    t = np.einsum("abe,ecd->abcd", f, f)
    return t + np.transpose(t, (1, 2, 0, 3)) + np.transpose(t, (2, 0, 1, 3))


def invariance_residual(f, B):
    """``<[T_a,T_b],T_c> + <T_b,[T_a,T_c]>`` for all basis triples."""
    fb = np.einsum("abe,ec->abc", f, B)
    return fb + np.transpose(fb, (0, 2, 1))


def axiom_residuals(A: LieAlgebra) -> dict:
    B = A.B
    return {
        "antisymmetry": float(np.max(np.abs(antisymmetry_residual(A.f)), initial=0.0)),
        "jacobi": float(np.max(np.abs(jacobi_residual(A.f)), initial=0.0)),
        "invariance": float(np.max(np.abs(invariance_residual(A.f, B)), initial=0.0)),
        "symmetry_of_form": float(np.max(np.abs(B - B.T), initial=0.0)),
        "min_singular_value": float(np.min(np.linalg.svd(B, compute_uv=False))),
    }


def validate(f, B, tol=DEFAULT_TOL, nondeg=NONDEGENERACY_THRESHOLD):
    """Raise the matching :class:`AxiomViolation` if any axiom fails."""
    scale = _scale(f)
    res = antisymmetry_residual(f)
    where, worst = _worst(res) if res.size else ((), 0.0)
    if worst > tol * scale:
        raise AntisymmetryViolation(
            f"f[a,b,c] != -f[b,a,c] at (a,b,c)={where}, residual {worst:.3e}", where, worst
        )
    res = jacobi_residual(f)
    where, worst = _worst(res) if res.size else ((), 0.0)
    if worst > tol * scale**2:
        raise JacobiViolation(
            f"Jacobi identity fails at (a,b,c)={where[:3]} component {where[3]}, residual {worst:.3e}",
            where,
            worst,
        )
    if np.max(np.abs(B - B.T), initial=0.0) > tol * _scale(B):
        where, worst = _worst(B - B.T)
        raise InvarianceViolation(f"form is not symmetric at {where}, residual {worst:.3e}", where, worst)
    smin = np.min(np.linalg.svd(B, compute_uv=False)) if B.size else 0.0
    if smin <= nondeg * _scale(B):
        raise DegenerateForm(f"invariant form is degenerate (smallest singular value {smin:.3e})", None, float(smin))
    res = invariance_residual(f, B)
    where, worst = _worst(res) if res.size else ((), 0.0)
    if worst > tol * scale * _scale(B):
        raise InvarianceViolation(
            f"<[x,y],z> + <y,[x,z]> != 0 at (x,y,z)={where}, residual {worst:.3e}", where, worst
        )


def build_algebra(f, B, labels=None, name="custom", tol=DEFAULT_TOL, meta=None) -> LieAlgebra:
    f = np.asarray(f, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if f.ndim != 3 or f.shape[0] != f.shape[1] or f.shape[1] != f.shape[2]:
        raise ShapeError(f"structure constants must be dim x dim x dim, got {f.shape}")
    n = f.shape[0]
    if n < 1:
        raise ShapeError("dimension must be positive")
    if B.shape != (n, n):
        raise ShapeError(f"form must be {n} x {n}, got {B.shape}")
    if labels is None:
        labels = tuple(f"T{i}" for i in range(n))
    labels = tuple(labels)
    if len(labels) != n:
        raise ShapeError(f"{len(labels)} labels for dimension {n}")
    validate(f, B, tol=tol)
    f.setflags(write=False)
    B.setflags(write=False)
    return LieAlgebra(f=f, B=B, labels=labels, name=name, meta=dict(meta or {}))


def bracket(A: LieAlgebra, x, y) -> np.ndarray:
    return np.einsum("a,b,abc->c", x, y, A.f)


def ad(A: LieAlgebra, x) -> np.ndarray:
    """Matrix of ``ad x`` acting on coefficient vectors."""
    return np.einsum("a,abc->cb", np.asarray(x, dtype=complex), A.f)


def ad_basis(A: LieAlgebra) -> np.ndarray:
    """Stack of ``ad T_a`` matrices, shape ``(dim, dim, dim)``."""
    return np.transpose(A.f, (0, 2, 1))


def form(A: LieAlgebra, x, y) -> complex:
    return complex(np.asarray(x) @ A.B @ np.asarray(y))


def gram(A: LieAlgebra, S) -> np.ndarray:
    return S.T @ A.B @ S


def dual_basis(A: LieAlgebra, S, threshold=NONDEGENERACY_THRESHOLD) -> np.ndarray:
    """Columns ``v^j`` of the subspace spanned by ``S`` with ``<S_i, v^j> = delta``."""
    S = np.asarray(S, dtype=complex)
    if S.ndim == 1:
        S = S[:, None]
    G = gram(A, S)
    if G.size == 0:
        return S.copy()
    smin = np.min(np.linalg.svd(G, compute_uv=False))
    if smin <= threshold * _scale(G):
        raise DegenerateRestriction(f"form restricted to subspace is degenerate (smallest singular value {smin:.2e})")
    return S @ np.linalg.inv(G)


def closure_residual(A: LieAlgebra, S, T=None, target=None) -> float:
    """Largest component of ``[S_i, T_j]`` outside ``span(target)``."""
    T = S if T is None else T
    target = S if target is None else target
    if S.shape[1] == 0 or T.shape[1] == 0:
        return 0.0
    brackets = np.einsum("ai,bj,abc->cij", S, T, A.f).reshape(A.dim, -1)
    if target.shape[1] == 0:
        return float(np.max(np.abs(brackets), initial=0.0))
    P = target @ np.linalg.pinv(target)
    return float(np.max(np.abs(brackets - P @ brackets), initial=0.0))


def _complement(A: LieAlgebra, within, orth_to):
    """Basis of ``{v in span(within) : <v, orth_to> = 0}``.

    Prefers coordinate columns of ``within`` when they already qualify, so that
    catalog chains keep their labelled bases.
    """
    if orth_to.shape[1] == 0:
        return within.copy()
    if within.shape[1] == orth_to.shape[1]:
        return np.zeros((within.shape[0], 0), dtype=complex)
    target_dim = within.shape[1] - np.linalg.matrix_rank(orth_to.T @ A.B @ within)
    pairing = orth_to.T @ A.B @ within
    ok = [j for j in range(within.shape[1]) if np.max(np.abs(pairing[:, j])) < 1e-14]
    if len(ok) == target_dim:
        cand = within[:, ok]
        if np.linalg.matrix_rank(cand) == target_dim:
            return cand
    ns = scipy.linalg.null_space(pairing)
    return within @ ns


@dataclass(frozen=True, eq=False)
class Chain:
    """Nested subalgebras ``K`` inside ``L`` inside ``A`` with complement ``M`` of ``K`` in ``L``."""

    algebra: LieAlgebra
    K: np.ndarray
    L: np.ndarray
    M: np.ndarray
    Lperp: np.ndarray
    orthogonal: bool
    P_K: np.ndarray
    P_M: np.ndarray
    P_Lperp: np.ndarray
    description: str = ""

    @property
    def adapted_basis(self) -> np.ndarray:
        return np.hstack([self.K, self.M, self.Lperp])

    def leakage(self) -> float:
        return closure_residual(self.algebra, self.K, self.M, self.M)


def _as_subspace(A, spec):
    if isinstance(spec, str) and spec == "all":
        return np.eye(A.dim, dtype=complex)
    arr = np.asarray(spec)
    if arr.ndim == 2:
        return arr.astype(complex)
    return A.coord_subspace(list(spec))


def make_chain(A: LieAlgebra, K, L="all", M=None, tol=DEFAULT_TOL, description="") -> Chain:
    """Build and check ``K < L < A``.

    ``K``/``L``/``M`` are index or label lists, basis matrices, or ``"all"`` for
    ``L``. Without ``M`` the complement is the orthocomplement of ``K`` in ``L``.
    """
    Ks = _as_subspace(A, K)
    Ls = _as_subspace(A, L)
    if np.linalg.matrix_rank(np.hstack([Ls, Ks])) != Ls.shape[1]:
        raise NotSubalgebra("K is not contained in L")
    for name, S in (("K", Ks), ("L", Ls)):
        res = closure_residual(A, S)
        if res > tol * _scale(A.f):
            raise NotSubalgebra(f"{name} is not closed under the bracket (leak {res:.2e})")
    dual_basis(A, Ks)
    dual_basis(A, Ls)
    orthogonal = M is None
    if orthogonal:
        Ms = _complement(A, Ls, Ks)
    else:
        Ms = _as_subspace(A, M)
        if np.linalg.matrix_rank(np.hstack([Ks, Ms])) != Ls.shape[1] or np.linalg.matrix_rank(
            np.hstack([Ls, Ms])
        ) != Ls.shape[1]:
            raise ComplementNotInvariant("K + M does not span L as a direct sum")
    res = closure_residual(A, Ks, Ms, Ms)
    if res > tol * _scale(A.f):
        raise ComplementNotInvariant(f"[K, M] is not contained in M (leak {res:.2e})")
    if orthogonal:
        cross = Ms.T @ A.B @ Ks
        if cross.size and np.max(np.abs(cross)) > tol:
            raise ComplementNotInvariant("computed complement is not orthogonal to K")
    Lp = _complement(A, np.eye(A.dim, dtype=complex), Ls)
    Q = np.hstack([Ks, Ms, Lp])
    if Q.shape[1] != A.dim or np.linalg.matrix_rank(Q) != A.dim:
        raise DegenerateRestriction("K + M + L-perp does not span the algebra")
    Qinv = np.linalg.inv(Q)
    k, m = Ks.shape[1], Ms.shape[1]
    P_K = Q[:, :k] @ Qinv[:k]
    P_M = Q[:, k : k + m] @ Qinv[k : k + m]
    P_Lp = Q[:, k + m :] @ Qinv[k + m :]
    return Chain(A, Ks, Ls, Ms, Lp, orthogonal, P_K, P_M, P_Lp, description)


def canonical_tensors(A: LieAlgebra):
    """``I_hat = T_a (x) T^a`` and ``f_hat = f_{ab}^c T^a (x) T^b (x) T_c``."""
    Binv = A.Binv
    I_hat = Binv.copy()
    f_hat = np.einsum("pa,qb,pqc->abc", Binv, Binv, A.f)
    return I_hat, f_hat


_COEFF_EXP = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?j?")
_COEFF_PLAIN = re.compile(r"(?:\d+\.?\d*|\.\d+)j?")
_COEFF_PAREN = re.compile(r"\([^)]*\)")


def parse_element(A: LieAlgebra, text: str) -> np.ndarray:
    """Parse ``"0.3H + 0.1E - 2j*F"`` into a coefficient vector.

    A number followed by ``e``/``E`` is read as an exponent only if a basis
    label still follows, so ``"0.1E - F"`` means ``0.1 E - F`` in ``sl2``.
    Terms are separated by ``+``/``-``; spaces may appear between tokens.
    """
    x = np.zeros(A.dim, dtype=complex)
    s = text.strip()
    if not s:
        raise ValueError("empty element string")
    labels = sorted(A.labels, key=len, reverse=True)

    def label_at(pos):
        for lab in labels:
            if s.startswith(lab, pos):
                return lab
        return None

    def skip(pos):
        while pos < len(s) and s[pos].isspace():
            pos += 1
        return pos

    pos = 0
    while pos < len(s):
        pos = skip(pos)
        sign = 1.0
        if s[pos] in "+-":
            sign = -1.0 if s[pos] == "-" else 1.0
            pos = skip(pos + 1)
        elif pos > 0:
            raise ValueError(f"expected + or - at position {pos} in {text!r}")
        found = None
        for pat in (_COEFF_PAREN, _COEFF_EXP, _COEFF_PLAIN, None):
            if pat is None:
                coeff, end = "1", pos
            else:
                m = pat.match(s, pos)
                if not m:
                    continue
                coeff, end = m.group(0), m.end()
            after = skip(end)
            after = skip(after + 1) if s.startswith("*", after) else after
            lab = label_at(after)
            if lab is not None:
                found = (coeff, lab, after + len(lab))
                break
        if found is None:
            raise ValueError(f"cannot parse term at position {pos} in {text!r}")
        coeff, lab, pos = found
        x[A.labels.index(lab)] += sign * complex(coeff.strip("()"))
    return x
