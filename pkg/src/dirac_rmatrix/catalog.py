"""Named self-dual Lie algebras with exact integer structure constants."""

from __future__ import annotations

import itertools

import numpy as np

from .errors import BadParams, UnknownName
from .lie import LieAlgebra, build_algebra


def _sl_basis(n):
    """Cartan ``H_i = E_ii - E_{i+1,i+1}``, then ``E_ij`` (i<j), then ``E_ji``."""
    mats, labels = [], []
    for i in range(n - 1):
        m = np.zeros((n, n))
        m[i, i], m[i + 1, i + 1] = 1, -1
        mats.append(m)
        labels.append("H" if n == 2 else f"H{i + 1}")
    pos = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for i, j in pos + [(j, i) for i, j in pos]:
        m = np.zeros((n, n))
        m[i, j] = 1
        mats.append(m)
        if n == 2:
            labels.append("E" if i < j else "F")
        else:
            labels.append(f"E{i + 1}{j + 1}")
    return mats, labels


def _sl_coords(n, X):
    """Exact coordinates of a traceless matrix in the basis of :func:`_sl_basis`."""
    c = [np.sum(np.diag(X)[: i + 1]) for i in range(n - 1)]
    pos = [(i, j) for i in range(n) for j in range(i + 1, n)]
    c += [X[i, j] for i, j in pos] + [X[j, i] for i, j in pos]
    return np.array(c)


def sl(n: int) -> LieAlgebra:
    if n < 2:
        raise BadParams("sl(n) needs n >= 2")
    mats, labels = _sl_basis(n)
    dim = len(mats)
    f = np.zeros((dim, dim, dim))
    B = np.zeros((dim, dim))
    for a, b in itertools.product(range(dim), repeat=2):
        X, Y = mats[a], mats[b]
        f[a, b] = _sl_coords(n, X @ Y - Y @ X)
        B[a, b] = np.trace(X @ Y)
    return build_algebra(f, B, labels, name=f"sl{n}", meta={"catalog": "sl", "n": n})


def sl_matrices(n: int) -> list[np.ndarray]:
    """Defining-representation matrices of the ``sl(n)`` catalog basis."""
    return _sl_basis(n)[0]


def sl_conjugation(n: int, h) -> np.ndarray:
    """Matrix of ``X -> h X h^-1`` on ``sl(n)`` in the catalog basis."""
    h = np.asarray(h, dtype=complex)
    hinv = np.linalg.inv(h)
    mats = sl_matrices(n)
    return np.array([_sl_coords(n, h @ X @ hinv) for X in mats], dtype=complex).T


def e_selfdual(d: int, p: float = 0.0) -> LieAlgebra:
    """Self-dual extension of e(d): ``P_i``, ``J_ij``, ``T_ij`` (i<j) with form parameter ``p``."""
    if d < 2:
        raise BadParams("e_selfdual needs d >= 2")
    pairs = [(i, j) for i in range(d) for j in range(i + 1, d)]
    labels = [f"P{i + 1}" for i in range(d)]
    labels += [f"J{i + 1}{j + 1}" for i, j in pairs] + [f"T{i + 1}{j + 1}" for i, j in pairs]
    dim = len(labels)
    P = {i: i for i in range(d)}
    J, T = {}, {}
    for k, (i, j) in enumerate(pairs):
        J[(i, j)] = d + k
        T[(i, j)] = d + len(pairs) + k

    def antisym(table, i, j):
        # generator index with sign, J_ji = -J_ij, J_ii = 0
        if i == j:
            return None, 0
        return (table[(i, j)], 1) if i < j else (table[(j, i)], -1)

    f = np.zeros((dim, dim, dim))

    def add(a, b, table, i, j, coeff):
        idx, s = antisym(table, i, j)
        if idx is not None:
            f[a, b, idx] += coeff * s

    delta = lambda x, y: 1 if x == y else 0
    for (i, j), a in J.items():
        for (k, l), b in J.items():
            for tbl in (J,):
                add(a, b, tbl, i, l, delta(j, k))
                add(a, b, tbl, j, k, delta(i, l))
                add(a, b, tbl, i, k, -delta(j, l))
                add(a, b, tbl, j, l, -delta(i, k))
        for (k, l), b in T.items():
            for coeff, (x, y) in (
                (delta(j, k), (i, l)),
                (delta(i, l), (j, k)),
                (-delta(j, l), (i, k)),
                (-delta(i, k), (j, l)),
            ):
                add(a, b, T, x, y, coeff)
                add(b, a, T, x, y, -coeff)
        for k in range(d):
            f[a, P[k], P[i]] += delta(j, k)
            f[a, P[k], P[j]] -= delta(i, k)
            f[P[k], a, P[i]] -= delta(j, k)
            f[P[k], a, P[j]] += delta(i, k)
    for k in range(d):
        for l in range(d):
            add(P[k], P[l], T, k, l, 1)

    B = np.zeros((dim, dim))
    for i in range(d):
        B[P[i], P[i]] = 1
    for (i, j), a in J.items():
        for (k, l), b in J.items():
            val = delta(j, k) * delta(i, l) - delta(i, k) * delta(j, l)
            B[a, b] = p * val
            B[a, T[(k, l)]] = val
            B[T[(k, l)], a] = val
    return build_algebra(f, B, labels, name=f"e_selfdual{d}", meta={"catalog": "e_selfdual", "d": d, "p": p})


def kappa0(A: LieAlgebra) -> np.ndarray:
    """``J_12 + J_34 + ... + J_{d-1,d}`` for an ``e_selfdual(d)`` algebra."""
    d = A.meta["d"]
    x = np.zeros(A.dim, dtype=complex)
    for i in range(0, d - 1, 2):
        x[A.index(f"J{i + 1}{i + 2}")] = 1.0
    return x


def oscillator(n: int = 1) -> LieAlgebra:
    """``a_i``, ``a_i^dagger``, ``c``, ``N`` with ``[a_i, a_j^dagger] = delta_ij c``.

    Form: ``<c, N> = 1``, ``<a_i, a_j^dagger> = -delta_ij``; the sign is forced
    by invariance given ``[N, a] = -a``.
    """
    if n < 1:
        raise BadParams("oscillator needs n >= 1")
    suffix = (lambda i: "") if n == 1 else (lambda i: str(i + 1))
    labels = [f"a{suffix(i)}" for i in range(n)] + [f"ad{suffix(i)}" for i in range(n)] + ["c", "N"]
    dim = 2 * n + 2
    a = list(range(n))
    adg = list(range(n, 2 * n))
    c, N = 2 * n, 2 * n + 1
    f = np.zeros((dim, dim, dim))
    for i in range(n):
        f[a[i], adg[i], c] = 1
        f[adg[i], a[i], c] = -1
        f[N, a[i], a[i]] = -1
        f[a[i], N, a[i]] = 1
        f[N, adg[i], adg[i]] = 1
        f[adg[i], N, adg[i]] = -1
    B = np.zeros((dim, dim))
    B[c, N] = B[N, c] = 1
    for i in range(n):
        B[a[i], adg[i]] = B[adg[i], a[i]] = -1
    return build_algebra(f, B, labels, name=f"oscillator{n}", meta={"catalog": "oscillator", "n": n})


_CATALOG = {
    "sl": lambda params: sl(int(params.get("n", 2))),
    "e_selfdual": lambda params: e_selfdual(int(params.get("d", 2)), float(params.get("p", 0.0))),
    "oscillator": lambda params: oscillator(int(params.get("n", 1))),
}


def catalog(name: str, **params) -> LieAlgebra:
    """Look up a catalog algebra. ``"sl3"`` is accepted as shorthand for ``("sl", n=3)``."""
    key = name.strip().lower()
    if key.startswith("sl") and key[2:].isdigit():
        params.setdefault("n", int(key[2:]))
        key = "sl"
    elif key.startswith("e_selfdual") and key[len("e_selfdual"):].isdigit():
        params.setdefault("d", int(key[len("e_selfdual"):]))
        key = "e_selfdual"
    elif key.startswith("oscillator") and key[len("oscillator"):].isdigit():
        params.setdefault("n", int(key[len("oscillator"):]))
        key = "oscillator"
    if key not in _CATALOG:
        raise UnknownName(f"unknown catalog algebra {name!r}; choose from {sorted(_CATALOG)}")
    try:
        return _CATALOG[key](params)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, BadParams):
            raise
        raise BadParams(str(exc)) from exc
