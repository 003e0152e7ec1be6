import json

import numpy as np
import pytest

from dirac_rmatrix import io
from dirac_rmatrix.catalog import catalog
from dirac_rmatrix.errors import JacobiViolation, ParseError


@pytest.mark.parametrize("name", ["sl2", "sl3", "e_selfdual4", "oscillator1"])
def test_algebra_round_trip_bit_exact(name, tmp_path):
    A = catalog(name)
    path = tmp_path / "alg.json"
    io.write_json(path, io.algebra_to_dict(A))
    B = io.load_algebra(path)
    assert np.array_equal(A.f, B.f) and np.array_equal(A.B, B.B)
    assert tuple(B.labels) == tuple(A.labels)


def test_round_trip_complex_entries(sl2):
    doc = io.algebra_to_dict(sl2)
    doc["B"] = [[a, b, re / 3, 0.0] for a, b, re, _ in doc["B"]]
    doc["f"] = [[a, b, c, re, im] for a, b, c, re, im in doc["f"]]
    A = io.algebra_from_dict(json.loads(io.dumps(doc)))
    assert np.array_equal(A.B, sl2.B / 3)


@pytest.mark.parametrize(
    "doc",
    [{}, {"dim": 2}, {"dim": "x", "f": [], "B": []}, {"dim": 2, "f": [[0, 1]], "B": []}, {"dim": 1, "f": [], "B": [["a", 0, 1]]}],
)
def test_malformed(doc):
    with pytest.raises(ParseError):
        io.algebra_from_dict(doc)


def test_unreadable(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ParseError):
        io.read_json(bad)
    with pytest.raises(ParseError):
        io.read_json(tmp_path / "missing.json")


def test_axiom_errors_propagate(sl3):
    doc = io.algebra_to_dict(sl3)
    i, j, k = sl3.index("E12"), sl3.index("E23"), sl3.index("E13")
    for e in doc["f"]:
        if (e[0], e[1], e[2]) in ((i, j, k), (j, i, k)):
            e[3] *= 2
    with pytest.raises(JacobiViolation):
        io.algebra_from_dict(doc)


def test_schema_version_and_determinism():
    doc = {"b": np.array([1 + 2j]), "a": np.float64(0.5), "flag": np.bool_(True)}
    text = io.dumps(doc)
    parsed = json.loads(text)
    assert parsed["schema_version"] == 1
    assert parsed["b"] == [[1.0, 2.0]]
    assert text == io.dumps(doc)
    assert list(parsed) == sorted(parsed)


def test_write_to_stdout_returns_text():
    assert io.write_json(None, {"x": 1}) == io.write_json("-", {"x": 1})


def test_cmat_round_trip(rng):
    M = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert np.array_equal(io.from_cmat(io.cmat(M)), M)
