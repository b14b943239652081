"""Deterministic artifact serialization tests."""

import json

import numpy as np
import pytest

from bergspec import (
    BergspecError,
    GridSpec,
    build_toeplitz_1d,
    build_toeplitz_2d,
    eigenvalues,
    essential_spectrum_1d,
    parse,
    pseudospectrum,
)
from bergspec.serialize import (
    essential_result_to_json,
    fmt_float,
    json_text,
    matrix_to_csv,
    matrix_to_json,
    pseudo_to_csv,
    pseudo_to_json,
    region_to_json,
    spectrum_to_json,
)


def test_fmt_float_round_trips():
    for x in (0.1, 1.0 / 3.0, -2.5e-17, 0.0, 123456789.123456789,
              np.pi, 2.0 ** -1074):
        assert float(fmt_float(x)) == x


def test_fmt_float_rejects_nonfinite():
    with pytest.raises(BergspecError):
        fmt_float(float("nan"))
    with pytest.raises(BergspecError):
        fmt_float(float("inf"))


def test_json_text_is_valid_json_and_ordered():
    doc = json_text({"b": 1, "a": [0.5, {"x": True, "y": None}], "s": 'q"uo\\te'})
    parsed = json.loads(doc)
    assert parsed == {"b": 1, "a": [0.5, {"x": True, "y": None}], "s": 'q"uo\\te'}
    # insertion order is preserved, not sorted
    assert doc.index('"b"') < doc.index('"a"')
    assert doc.endswith("\n")


def test_matrix_json_schema():
    m = build_toeplitz_1d(parse("z"), 3)
    doc = json.loads(matrix_to_json(m))
    assert sorted(doc) == ["entries", "kind", "n"]
    assert doc["kind"] == "1d" and doc["n"] == 3
    assert len(doc["entries"]) == 9
    # row-major: entry (1,0) sits at flat index 3
    assert doc["entries"][3][0] == pytest.approx(np.sqrt(0.5))
    assert doc["entries"][3][1] == 0.0
    m2 = build_toeplitz_2d(parse("z*w"), 2)
    doc2 = json.loads(matrix_to_json(m2))
    assert doc2["kind"] == "2d" and doc2["n"] == 2
    assert len(doc2["entries"]) == 16


def test_matrix_csv_format():
    m = build_toeplitz_1d(parse("(0+1i)*z"), 2)
    lines = matrix_to_csv(m).splitlines()
    assert len(lines) == 2
    assert lines[0] == "0+0i,0+0i"
    row1 = lines[1].split(",")
    assert row1[0] == f"0+{fmt_float(np.sqrt(0.5))}i"
    # negative imaginary parts use the minus separator
    mc = build_toeplitz_1d(parse("(0-1i)*z"), 2)
    assert matrix_to_csv(mc).splitlines()[1].split(",")[0].count("-") == 1


def test_spectrum_json_has_points_residuals_meta():
    s = eigenvalues(build_toeplitz_1d(parse("z*conj(z)"), 4))
    doc = json.loads(spectrum_to_json(s))
    assert len(doc["points"]) == 4
    assert len(doc["residuals"]) == 4
    assert doc["meta"]["solver"] == "eigh"


def test_pseudo_artifacts():
    m = build_toeplitz_1d(parse("z"), 8)
    g = GridSpec(-1.0, 1.0, -0.5, 0.5, 5, 3)
    ps = pseudospectrum(m, g, 1e-2)
    doc = json.loads(pseudo_to_json(ps))
    assert doc["n_re"] == 5 and doc["n_im"] == 3
    assert doc["epsilon"] == 1e-2
    assert len(doc["values"]) == 15
    csv = pseudo_to_csv(ps).splitlines()
    assert csv[0].split(",") == [
        fmt_float(-1.0), fmt_float(1.0), fmt_float(-0.5), fmt_float(0.5),
        "5", "3", fmt_float(1e-2)]
    assert len(csv) == 1 + 3
    assert len(csv[1].split(",")) == 5
    # row-major values match the JSON flattening
    flat = [float(v) for line in csv[1:] for v in line.split(",")]
    assert flat == doc["values"]


def test_region_json_schema():
    r = essential_spectrum_1d(parse("z"), 8)
    doc = json.loads(region_to_json(r))
    assert sorted(doc) == ["h", "points"]
    assert len(doc["points"]) == 8
    assert all(len(p) == 2 for p in doc["points"])


def test_essential_result_json_schema():
    from bergspec import essential_spectrum_2d

    res = essential_spectrum_2d(parse("z+w"), n=8, eps=1e-3, m=4, m_theta=32,
                                resolution=21, refine=False)
    doc = json.loads(essential_result_to_json(res))
    assert sorted(doc) == ["params", "slices_theta1", "slices_theta2", "union"]
    assert len(doc["slices_theta1"]) == 4
    entry = doc["slices_theta1"][0]
    assert sorted(entry) == ["region", "theta"]
    assert sorted(entry["region"]) == ["h", "points"]
    assert doc["params"]["m"] == 4


def test_serialization_deterministic():
    m = build_toeplitz_1d(parse("exp(z)"), 6)
    assert matrix_to_json(m) == matrix_to_json(m)
    g = GridSpec(-1.5, 1.5, -1.5, 1.5, 7, 7)
    a = pseudo_to_csv(pseudospectrum(m, g, 1e-3, seed=5))
    b = pseudo_to_csv(pseudospectrum(m, g, 1e-3, seed=5))
    assert a == b


def test_unserializable_object_rejected():
    with pytest.raises(BergspecError):
        json_text({"bad": object()})
