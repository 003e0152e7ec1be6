"""JSON serialisation of algebras, r-matrices, gradings and reports.

Complex numbers are written as ``[re, im]`` pairs. Every document carries
``"schema_version": 1``. Python's float repr round-trips, so algebra files
reload bit-exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ParseError
from .lie import LieAlgebra, build_algebra

SCHEMA_VERSION = 1


def cpair(x) -> list:
    x = complex(x)
    return [float(x.real), float(x.imag)]


def cvec(v) -> list:
    return [cpair(x) for x in np.asarray(v, dtype=complex).ravel()]


def cmat(M) -> list:
    return [cvec(row) for row in np.asarray(M, dtype=complex)]


def from_cmat(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def algebra_to_dict(A: LieAlgebra) -> dict:
    f_entries = [[int(a), int(b), int(c), *cpair(A.f[a, b, c])] for a, b, c in zip(*np.nonzero(A.f))]
    B_entries = [[int(a), int(b), *cpair(A.B[a, b])] for a, b in zip(*np.nonzero(A.B))]
    return {
        "schema_version": SCHEMA_VERSION,
        "name": A.name,
        "dim": A.dim,
        "labels": list(A.labels),
        "f": f_entries,
        "B": B_entries,
    }


def algebra_from_dict(data: dict, tol=1e-10) -> LieAlgebra:
    """Parse an algebra document; axiom failures propagate as :class:`AxiomViolation`."""
    try:
        dim = int(data["dim"])
        labels = data.get("labels") or [f"T{i}" for i in range(dim)]
        f = np.zeros((dim, dim, dim), dtype=complex)
        for entry in data["f"]:
            a, b, c = (int(i) for i in entry[:3])
            f[a, b, c] = complex(entry[3], entry[4] if len(entry) > 4 else 0.0)
        B = np.zeros((dim, dim), dtype=complex)
        for entry in data["B"]:
            a, b = (int(i) for i in entry[:2])
            B[a, b] = complex(entry[2], entry[3] if len(entry) > 3 else 0.0)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ParseError(f"malformed algebra document: {exc!r}") from exc
    return build_algebra(f, B, labels, name=str(data.get("name", "custom")), tol=tol, meta={"source": "file"})


def read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def load_algebra(path, tol=1e-10) -> LieAlgebra:
    return algebra_from_dict(read_json(path), tol)


def dumps(doc: dict) -> str:
    """Deterministic JSON text (sorted keys, fixed indentation)."""
    if "schema_version" not in doc:
        doc = {"schema_version": SCHEMA_VERSION, **doc}
    return json.dumps(doc, indent=2, sort_keys=True, default=_default) + "\n"


def _default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return cpair(obj)
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return cmat(obj) if obj.ndim == 2 else cvec(obj)
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_json(path, doc: dict) -> str:
    text = dumps(doc)
    if path is None or str(path) == "-":
        return text
    p = Path(path)
    try:
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text)
    except OSError as exc:
        raise ParseError(f"cannot write {path}: {exc}") from exc
    return text


def rmatrix_to_dict(A: LieAlgebra, kappa, r, sym_part, meta=None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "algebra": A.name,
        "labels": list(A.labels),
        "kappa": cvec(kappa),
        "r": cmat(r),
        "sym_part": cmat(sym_part),
        "meta": meta or {},
    }


def report_to_dict(report, config=None) -> dict:
    doc = {"schema_version": SCHEMA_VERSION, **report.to_dict()}
    if config is not None:
        doc["config"] = config
    return doc


def grading_document(grading) -> dict:
    from .affine import grading_to_dict

    return {"schema_version": SCHEMA_VERSION, **grading_to_dict(grading)}


def elliptic_document(R) -> dict:
    p = R.params
    return {
        "schema_version": SCHEMA_VERSION,
        "G": p.grading.G.name,
        "N": p.grading.N,
        "omega": cvec(p.omega),
        "z": cpair(p.z),
        "tau": cpair(p.tau),
        "blocks": {str(a): cmat(M) for a, M in sorted(R.blocks.items())},
        "operator": cmat(R.operator),
    }
