import csv
import json

import numpy as np
import pytest

from l1lab.convex_geometry import ConvexBody, chebyshev
from l1lab.errors import DomainViolation
from l1lab.fileio import (
    canonical_json,
    center_result_to_doc,
    convex_body_from_doc,
    convex_body_to_doc,
    function_family_from_doc,
    function_family_to_doc,
    grid_function_from_doc,
    grid_function_to_doc,
    lorentz_table_to_csv,
    map_spec_from_doc,
    map_spec_to_doc,
    sha256_of_file,
    sha256_of_text,
    trace_to_csv,
    ui_certificate_to_doc,
    write_csv,
    write_json,
)
from l1lab.fixed_point_lab import MapSpec, km_iterate
from l1lab.grid_space import FunctionFamily, GridFunction, Partition
from l1lab.integrability import ui_certificate
from l1lab.families import dominated_family


def _sample_function():
    p = Partition((np.array([0.25, 0.75]), np.array([0.5])))
    return GridFunction(p, np.array([1.0, -2.0, 0.5]))


def test_grid_function_roundtrip():
    f = _sample_function()
    doc = grid_function_to_doc(f)
    assert doc["windows"] == [[0.25, 0.75], [0.5]]
    assert doc["values"] == [1.0, -2.0, 0.5]
    assert "effective_resolution" not in doc
    back = grid_function_from_doc(doc)
    assert back.partition == f.partition
    assert np.array_equal(back.values, f.values)


def test_grid_function_roundtrip_with_resolution():
    f = GridFunction(Partition.dyadic(2), np.array([1.0, 1.0, 0.0, 0.0]), effective_resolution=1)
    doc = grid_function_to_doc(f)
    assert doc["effective_resolution"] == 1
    assert grid_function_from_doc(doc).effective_resolution == 1


def test_grid_function_doc_survives_json_text():
    f = _sample_function()
    text = canonical_json(grid_function_to_doc(f))
    back = grid_function_from_doc(json.loads(text))
    assert np.array_equal(back.values, f.values)


def test_malformed_grid_function_doc():
    with pytest.raises(DomainViolation):
        grid_function_from_doc({"values": [1.0]})
    with pytest.raises(DomainViolation):
        grid_function_from_doc({"windows": [[1.0]]})


def test_family_roundtrip():
    fam = dominated_family(3, cells=8, count=4)
    doc = function_family_to_doc(fam)
    back = function_family_from_doc(doc)
    assert back.label == fam.label
    assert len(back) == len(fam)
    for a, b in zip(fam, back):
        assert np.array_equal(a.values, b.values)


def test_body_roundtrip():
    p = Partition.uniform(3)
    body = ConvexBody(
        (GridFunction(p, np.array([1.0, 0.0, 2.0])), GridFunction(p, np.zeros(3))),
        "demo body",
    )
    back = convex_body_from_doc(convex_body_to_doc(body))
    assert back.label == "demo body"
    assert len(back) == 2
    assert np.array_equal(back.generators[0].values, body.generators[0].values)


def test_map_spec_roundtrip_nested():
    c = GridFunction(Partition.uniform(2), np.array([0.5, 0.25]))
    spec = MapSpec.combine(
        (0.25, MapSpec.identity()),
        (0.75, MapSpec.compose(MapSpec.constant(c), MapSpec.alspach(mode="project"))),
    )
    back = map_spec_from_doc(map_spec_to_doc(spec))
    assert back.kind == "convex_combination"
    weights = [w for w, _ in back.terms]
    assert weights == [0.25, 0.75]
    inner = back.terms[1][1]
    assert inner.kind == "composition"
    assert inner.parts[0].kind == "constant"
    assert np.array_equal(inner.parts[0].target.values, c.values)
    assert inner.parts[1].mode == "project"


def test_map_spec_doc_rejects_unknown_kind():
    with pytest.raises(DomainViolation):
        map_spec_from_doc({"kind": "warp"})


def test_certificate_document_shape():
    fam = dominated_family(7, cells=64, count=6)
    cert = ui_certificate(fam, [0.5, 0.1])
    doc = ui_certificate_to_doc(cert)
    assert set(doc) == {"eps", "delta", "M", "orlicz", "bound", "verdict"}
    assert doc["eps"] == [0.5, 0.1]
    assert set(doc["orlicz"]) == {"breakpoints"}
    assert isinstance(doc["bound"], float)
    assert doc["verdict"] == "UI_AT_TESTED_SCALES"
    # the document must be JSON-clean as-is
    json.dumps(doc)


def test_center_result_document(tmp_path):
    p = Partition.uniform(2)
    body = ConvexBody(
        (GridFunction(p, np.array([1.0, 0.0])), GridFunction(p, np.array([0.0, 1.0]))),
        "square",
    )
    doc = center_result_to_doc(chebyshev(body, tol=1e-10))
    for key in ("radius", "center", "iterations", "certified_gap", "converged", "lower_bound"):
        assert key in doc
    json.dumps(doc)


def test_canonical_json_is_stable_and_sorted():
    a = canonical_json({"b": 1, "a": [2, 1]})
    b = canonical_json({"a": [2, 1], "b": 1})
    assert a == b
    assert a.endswith("\n")
    assert a.index('"a"') < a.index('"b"')


def test_write_json_and_digest(tmp_path):
    path = tmp_path / "doc.json"
    write_json(path, {"x": 1.5})
    text = path.read_text()
    assert text == canonical_json({"x": 1.5})
    assert sha256_of_file(path) == sha256_of_text(text)


def test_write_csv_shape(tmp_path):
    path = tmp_path / "t.csv"
    write_csv(path, ["a", "b"], [(1, 2), (3, 4)])
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows == [["a", "b"], ["1", "2"], ["3", "4"]]


def test_trace_csv_columns(tmp_path, unit_grid):
    c = GridFunction(unit_grid, np.full(8, 2.0))
    x0 = GridFunction(unit_grid, np.zeros(8))
    trace = km_iterate(MapSpec.constant(c), x0, lam=0.5, max_steps=6)
    path = tmp_path / "trace.csv"
    trace_to_csv(trace, path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["n", "residual", "step_norm", "drift"]
    assert len(rows) == len(trace.rows) + 1
    # values are written with full precision, readable back exactly
    assert float(rows[1][1]) == trace.rows[0].residual


def test_lorentz_csv(tmp_path):
    from l1lab.lorentz import lorentz_norm_table

    path = tmp_path / "lt.csv"
    lorentz_table_to_csv(lorentz_norm_table(4, 2.0), path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["k", "norm"]
    assert [r[0] for r in rows[1:]] == ["1", "2", "3", "4"]
    assert float(rows[-1][1]) == pytest.approx(1 + 2**-0.5 + 3**-0.5 + 4**-0.5, abs=1e-12)
