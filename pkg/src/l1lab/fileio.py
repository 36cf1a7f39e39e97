"""Document formats: JSON codecs and CSV writers.

Every document is a plain dict of JSON types so that reports can be
serialized canonically (sorted keys) and compared byte for byte across
runs. Grid functions list their values window-major, cell-minor, which
is exactly the package's global cell order.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

from .convex_geometry import CenterResult, ConvexBody, ModulusProbe
from .errors import DomainViolation
from .fixed_point_lab import IterationTrace, MapSpec, OrbitScanRecord
from .grid_space import FunctionFamily, GridFunction, Partition
from .integrability import UICertificate


# ---------------------------------------------------------------------------
# grid functions, families, bodies


def grid_function_to_doc(f: GridFunction) -> dict:
    doc = {
        "windows": [[float(m) for m in w] for w in f.partition.windows],
        "values": [float(v) for v in f.values],
    }
    if f.effective_resolution is not None:
        doc["effective_resolution"] = f.effective_resolution
    return doc


def grid_function_from_doc(doc: dict) -> GridFunction:
    try:
        windows = doc["windows"]
        values = doc["values"]
    except (KeyError, TypeError) as exc:
        raise DomainViolation(f"grid function document missing field: {exc}") from None
    partition = Partition(windows=tuple(windows))
    return GridFunction(partition, values, doc.get("effective_resolution"))


def function_family_to_doc(family: FunctionFamily) -> dict:
    return {
        "label": family.label,
        "members": [grid_function_to_doc(f) for f in family],
    }


def function_family_from_doc(doc: dict) -> FunctionFamily:
    members = tuple(grid_function_from_doc(d) for d in doc.get("members", []))
    if not members:
        raise DomainViolation("family document has no members")
    return FunctionFamily(members=members, label=str(doc.get("label", "")))


def convex_body_to_doc(body: ConvexBody) -> dict:
    return {
        "label": body.label,
        "generators": [grid_function_to_doc(g) for g in body.generators],
    }


def convex_body_from_doc(doc: dict) -> ConvexBody:
    generators = tuple(grid_function_from_doc(d) for d in doc.get("generators", []))
    if not generators:
        raise DomainViolation("body document has no generators")
    return ConvexBody(generators=generators, label=str(doc.get("label", "")))


# ---------------------------------------------------------------------------
# map specs


def map_spec_to_doc(spec: MapSpec) -> dict:
    doc: dict = {"kind": spec.kind}
    if spec.domain_label:
        doc["domain_label"] = spec.domain_label
    if spec.kind == "constant":
        doc["target"] = grid_function_to_doc(spec.target)
    elif spec.kind == "alspach":
        doc["mode"] = spec.mode
    elif spec.kind == "convex_combination":
        doc["terms"] = [[w, map_spec_to_doc(child)] for w, child in spec.terms]
    elif spec.kind == "composition":
        doc["parts"] = [map_spec_to_doc(part) for part in spec.parts]
    return doc


def map_spec_from_doc(doc: dict) -> MapSpec:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise DomainViolation("map document needs a 'kind' field")
    kind = doc["kind"]
    label = str(doc.get("domain_label", ""))
    if kind == "constant":
        return MapSpec(kind=kind, target=grid_function_from_doc(doc["target"]), domain_label=label)
    if kind == "alspach":
        return MapSpec(kind=kind, mode=doc.get("mode", "exact"), domain_label=label)
    if kind == "convex_combination":
        terms = tuple((float(w), map_spec_from_doc(child)) for w, child in doc.get("terms", []))
        return MapSpec(kind=kind, terms=terms, domain_label=label)
    if kind == "composition":
        parts = tuple(map_spec_from_doc(part) for part in doc.get("parts", []))
        return MapSpec(kind=kind, parts=parts, domain_label=label)
    return MapSpec(kind=kind, domain_label=label)


# ---------------------------------------------------------------------------
# results


def ui_certificate_to_doc(cert: UICertificate) -> dict:
    return {
        "eps": list(cert.eps_grid),
        "delta": list(cert.delta_of_eps),
        "M": list(cert.M_of_eps),
        "orlicz": {"breakpoints": list(cert.orlicz.breakpoints)} if cert.orlicz else None,
        "bound": cert.orlicz_bound,
        "verdict": cert.verdict,
    }


def center_result_to_doc(result: CenterResult) -> dict:
    return {
        "radius": result.radius,
        "center": grid_function_to_doc(result.center),
        "iterations": result.iterations,
        "certified_gap": result.certified_gap,
        "converged": result.converged,
        "lower_bound": result.lower_bound,
    }


def modulus_probe_to_doc(probe: ModulusProbe) -> dict:
    return {
        "delta_hat": probe.delta_hat,
        "eta": probe.eta,
        "witness": list(probe.witness),
        "witness_members": [grid_function_to_doc(f) for f in probe.witness_members],
        "pairs_tested": probe.pairs_tested,
        "qualifying": probe.qualifying,
        "exhaustive": probe.exhaustive,
    }


def orbit_records_to_docs(records: list[OrbitScanRecord]) -> list[dict]:
    return [
        {
            "resolution": r.resolution,
            "status": r.status,
            "orbit_len": r.orbit_len,
            "diam": r.diam,
            "rad": r.rad,
            "gap": r.gap,
            "ratio": r.ratio,
        }
        for r in records
    ]


# ---------------------------------------------------------------------------
# file writers


def canonical_json(obj) -> str:
    """Stable serialization: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(canonical_json(obj))


def write_csv(path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def trace_to_csv(trace: IterationTrace, path) -> None:
    write_csv(
        path,
        ["n", "residual", "step_norm", "drift"],
        [(row.n, repr(row.residual), repr(row.step_norm), repr(row.drift)) for row in trace.rows],
    )


def lorentz_table_to_csv(values: list[float], path) -> None:
    write_csv(path, ["k", "norm"], [(k + 1, repr(v)) for k, v in enumerate(values)])


def sha256_of_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def sha256_of_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
