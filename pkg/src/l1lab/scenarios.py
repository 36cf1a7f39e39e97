"""Batch experiments: config validation, dispatch, and report writing.

A scenario config is a JSON object naming one experiment, its params,
a seed, and an output path. :func:`validate_config` checks the whole
document and reports every violation at once; :func:`run_scenario`
executes a validated config, writes ``report.json``, ``results.json``,
a CSV trace, and (unless disabled) a PNG figure into the output
directory, and returns the in-memory report.

Reproducibility contract: the results payload is a pure function of the
config and seed. All randomness flows through counter-based generators
keyed on the seed, reductions run in fixed order, and nothing
time- or path-dependent lands in the payload, so byte comparison of
``results.json`` across runs is a meaningful regression check.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import families, plots
from ._version import __version__
from .convex_geometry import ConvexBody, chebyshev, diameter, empirical_modulus, normal_structure_gap, slack, slack_identity_gap
from .errors import ConfigError, DomainViolation
from .fileio import (
    canonical_json,
    center_result_to_doc,
    convex_body_from_doc,
    grid_function_from_doc,
    grid_function_to_doc,
    function_family_from_doc,
    lorentz_table_to_csv,
    map_spec_from_doc,
    modulus_probe_to_doc,
    orbit_records_to_docs,
    sha256_of_file,
    sha256_of_text,
    trace_to_csv,
    ui_certificate_to_doc,
    write_csv,
    write_json,
)
from .fixed_point_lab import km_iterate, orbit_hull_scan, sample_example_set
from .grid_space import GridFunction, Partition
from .integrability import build_orlicz, orlicz_integral, layer_cake_bound, tail_profile, ui_certificate
from .lorentz import lorentz_norm_table
from .rng import STREAM_BODY, STREAM_PAIRS, make_rng

EXPERIMENTS = (
    "ui-certificate",
    "orlicz-build",
    "chebyshev",
    "normal-structure",
    "modulus-probe",
    "alspach-orbit",
    "km-iterate",
    "lorentz-table",
    "slack-audit",
)


@dataclass(frozen=True)
class ScenarioConfig:
    """A validated experiment request with defaults already applied."""

    experiment: str
    params: dict
    seed: int
    output_path: str
    resolution: int | None = None


@dataclass(frozen=True)
class RunReport:
    config: dict
    results: dict
    wall_time_seconds: float
    version: str
    input_digests: dict


# ---------------------------------------------------------------------------
# validation helpers


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _is_pow2(v) -> bool:
    return _is_int(v) and v >= 1 and v & (v - 1) == 0


class _Params:
    """Pulls typed values out of a params dict, collecting violations."""

    def __init__(self, raw: dict, errors: list[str]):
        self.raw = raw
        self.errors = errors
        self.used: set[str] = set()

    def fail(self, key: str, message: str) -> None:
        self.errors.append(f"params.{key}: {message}")

    def take(self, key: str, check, describe: str, *, default=None, required=False):
        self.used.add(key)
        if key not in self.raw:
            if required:
                self.fail(key, "required")
            return default
        value = self.raw[key]
        if not check(value):
            self.fail(key, f"must be {describe}")
            return default
        return value

    def int_at_least(self, key: str, minimum: int, *, default=None, required=False):
        return self.take(
            key,
            lambda v: _is_int(v) and v >= minimum,
            f"an integer >= {minimum}",
            default=default,
            required=required,
        )

    def positive_num(self, key: str, *, default=None, required=False):
        return self.take(
            key, lambda v: _is_num(v) and v > 0, "a positive number", default=default, required=required
        )

    def choice(self, key: str, options: tuple, *, default=None):
        return self.take(
            key, lambda v: v in options, f"one of {options}", default=default
        )

    def pair_range(self, key: str, *, default):
        value = self.take(
            key,
            lambda v: isinstance(v, list)
            and len(v) == 2
            and all(_is_num(x) for x in v)
            and v[0] < v[1],
            "a [low, high] pair with low < high",
            default=default,
        )
        return [float(value[0]), float(value[1])]

    def flag_unknown(self) -> None:
        for key in sorted(set(self.raw) - self.used):
            self.fail(key, "unknown parameter")


def _validate_family_spec(p: _Params, key: str, *, required=True):
    spec = p.take(key, lambda v: isinstance(v, dict), "an object", required=required)
    if spec is None:
        return None
    kind = spec.get("kind")
    kinds = ("spike", "half-indicators", "dominated", "example-set", "file")
    if kind not in kinds:
        p.fail(f"{key}.kind", f"must be one of {kinds}")
        return None
    out = {"kind": kind}
    if kind == "spike":
        out["n_max"] = spec.get("n_max", 64)
        if not (_is_int(out["n_max"]) and out["n_max"] >= 1):
            p.fail(f"{key}.n_max", "must be an integer >= 1")
    elif kind == "dominated":
        out["cells"] = spec.get("cells", 256)
        out["count"] = spec.get("count", 12)
        out["bound"] = spec.get("bound", 2.0)
        if not (_is_int(out["cells"]) and out["cells"] >= 1):
            p.fail(f"{key}.cells", "must be an integer >= 1")
        if not (_is_int(out["count"]) and out["count"] >= 1):
            p.fail(f"{key}.count", "must be an integer >= 1")
        if not (_is_num(out["bound"]) and out["bound"] > 0):
            p.fail(f"{key}.bound", "must be a positive number")
    elif kind == "example-set":
        out["count"] = spec.get("count", 20)
        out["resolution"] = spec.get("resolution", 64)
        out["storage"] = spec.get("storage")
        if not (_is_int(out["count"]) and out["count"] >= 1):
            p.fail(f"{key}.count", "must be an integer >= 1")
        if not _is_pow2(out["resolution"]):
            p.fail(f"{key}.resolution", "must be a positive power of two")
        if out["storage"] is not None and not _is_pow2(out["storage"]):
            p.fail(f"{key}.storage", "must be a positive power of two")
    elif kind == "file":
        out["path"] = spec.get("path")
        if not (isinstance(out["path"], str) and out["path"]):
            p.fail(f"{key}.path", "must be a nonempty path")
    return out


def _validate_body_spec(p: _Params, key: str):
    spec = p.take(key, lambda v: isinstance(v, dict), "an object", required=True)
    if spec is None:
        return None
    kind = spec.get("kind")
    if kind not in ("random", "file"):
        p.fail(f"{key}.kind", "must be one of ('random', 'file')")
        return None
    out = {"kind": kind}
    if kind == "file":
        out["path"] = spec.get("path")
        if not (isinstance(out["path"], str) and out["path"]):
            p.fail(f"{key}.path", "must be a nonempty path")
    else:
        out["cells"] = spec.get("cells", 3)
        out["generators"] = spec.get("generators", 4)
        value_range = spec.get("value_range", [-1.5, 1.5])
        measure_range = spec.get("measure_range", [0.2, 0.9])
        if not (_is_int(out["cells"]) and out["cells"] >= 1):
            p.fail(f"{key}.cells", "must be an integer >= 1")
        if not (_is_int(out["generators"]) and out["generators"] >= 1):
            p.fail(f"{key}.generators", "must be an integer >= 1")
        for name, rng_pair in (("value_range", value_range), ("measure_range", measure_range)):
            ok = (
                isinstance(rng_pair, list)
                and len(rng_pair) == 2
                and all(_is_num(x) for x in rng_pair)
                and rng_pair[0] < rng_pair[1]
            )
            if not ok:
                p.fail(f"{key}.{name}", "must be a [low, high] pair with low < high")
            else:
                out[name] = [float(rng_pair[0]), float(rng_pair[1])]
        if "measure_range" in out and out["measure_range"][0] <= 0:
            p.fail(f"{key}.measure_range", "lower bound must be positive")
    return out


def _validate_map_doc(p: _Params, key: str, doc) -> None:
    """Structural checks on a map document; deep errors surface at run time."""
    if not isinstance(doc, dict) or "kind" not in doc:
        p.fail(key, "must be an object with a 'kind' field")
        return
    kind = doc["kind"]
    kinds = ("identity", "constant", "alspach", "convex_combination", "composition")
    if kind not in kinds:
        p.fail(f"{key}.kind", f"must be one of {kinds}")
        return
    if kind == "constant" and not isinstance(doc.get("target"), dict):
        p.fail(f"{key}.target", "constant map needs a grid function object")
    if kind == "alspach" and doc.get("mode", "exact") not in ("exact", "project"):
        p.fail(f"{key}.mode", "must be 'exact' or 'project'")
    if kind == "convex_combination":
        terms = doc.get("terms")
        if not isinstance(terms, list) or not terms:
            p.fail(f"{key}.terms", "must be a nonempty list of [weight, map] pairs")
            return
        total = 0.0
        for idx, term in enumerate(terms):
            if not (isinstance(term, list) and len(term) == 2 and _is_num(term[0]) and term[0] >= 0):
                p.fail(f"{key}.terms[{idx}]", "must be a [nonnegative weight, map] pair")
                return
            total += term[0]
            _validate_map_doc(p, f"{key}.terms[{idx}]", term[1])
        if abs(total - 1.0) > 1e-12:
            p.fail(f"{key}.terms", f"weights sum to {total:g}, expected 1")
    if kind == "composition":
        parts = doc.get("parts")
        if not isinstance(parts, list) or not parts:
            p.fail(f"{key}.parts", "must be a nonempty list of maps")
            return
        for idx, part in enumerate(parts):
            _validate_map_doc(p, f"{key}.parts[{idx}]", part)


# ---------------------------------------------------------------------------
# per-experiment schemas


def _params_slack_audit(p: _Params, _res):
    return {
        "pairs": p.int_at_least("pairs", 1, default=1000),
        "cells": p.int_at_least("cells", 1, default=16),
        "value_range": p.pair_range("value_range", default=[-5.0, 5.0]),
    }


def _params_lorentz_table(p: _Params, _res):
    return {
        "k_max": p.int_at_least("k_max", 1, required=True),
        "p": p.take(key="p", check=lambda v: _is_num(v) and v > 1, describe="a number > 1", required=True),
    }


def _params_chebyshev(p: _Params, _res):
    return {
        "body": _validate_body_spec(p, "body"),
        "tol": p.positive_num("tol", default=1e-6),
        "max_iter": p.int_at_least("max_iter", 1, default=24000),
    }


def _params_modulus_probe(p: _Params, _res):
    eta = p.take(
        "eta", lambda v: _is_num(v) and 0 < v <= 1, "a number in (0, 1]", required=True
    )
    return {
        "family": _validate_family_spec(p, "family"),
        "eta": eta,
        "samples": p.int_at_least("samples", 1, default=2000),
    }


def _params_ui_certificate(p: _Params, _res):
    grid = p.take(
        "eps_grid",
        lambda v: isinstance(v, list) and v and all(_is_num(e) and e > 0 for e in v),
        "a nonempty list of positive numbers",
        required=True,
    )
    return {
        "family": _validate_family_spec(p, "family"),
        "eps_grid": grid,
        "m_cap": p.positive_num("m_cap"),
    }


def _params_orlicz_build(p: _Params, _res):
    return {"family": _validate_family_spec(p, "family")}


def _params_alspach_orbit(p: _Params, _res):
    x0 = p.take(
        "x0",
        lambda v: isinstance(v, list)
        and v
        and all(_is_num(b) for b in v)
        and _is_pow2(len(v)),
        "a list of numbers with power-of-two length",
        default=[0.5],
    )
    resolutions = p.take(
        "resolutions",
        lambda v: isinstance(v, list)
        and v
        and all(_is_pow2(r) for r in v)
        and all(b > a for a, b in zip(v, v[1:])),
        "a strictly increasing list of powers of two",
        required=True,
    )
    return {
        "x0": x0,
        "steps": p.int_at_least("steps", 1, required=True),
        "resolutions": resolutions,
        "mode": p.choice("mode", ("exact", "project"), default="exact"),
        "tol": p.positive_num("tol", default=1e-6),
    }


def _params_km_iterate(p: _Params, resolution):
    map_doc = p.take("map", lambda v: True, "a map object", required=True)
    if map_doc is not None:
        _validate_map_doc(p, "map", map_doc)
    x0 = p.take("x0", lambda v: isinstance(v, dict), "an object", required=True)
    if x0 is not None:
        kind = x0.get("kind")
        if kind not in ("constant", "sample", "file"):
            p.fail("x0.kind", "must be one of ('constant', 'sample', 'file')")
        elif kind == "constant" and not (_is_num(x0.get("value")) and 0 <= x0["value"] <= 1):
            p.fail("x0.value", "must be a number in [0, 1]")
        elif kind == "file" and not (isinstance(x0.get("path"), str) and x0["path"]):
            p.fail("x0.path", "must be a nonempty path")
        if kind in ("constant", "sample") and resolution is None:
            p.errors.append("resolution: required for km-iterate unless x0 comes from a file")
    lam = p.take(
        "lam", lambda v: _is_num(v) and 0 < v <= 1, "a number in (0, 1]", default=0.5
    )
    return {
        "map": map_doc,
        "x0": x0,
        "lam": lam,
        "max_steps": p.int_at_least("max_steps", 0, default=1000),
        "tol": p.take(
            "tol", lambda v: _is_num(v) and v >= 0, "a nonnegative number", default=1e-10
        ),
    }


_SCHEMAS = {
    "slack-audit": _params_slack_audit,
    "lorentz-table": _params_lorentz_table,
    "chebyshev": _params_chebyshev,
    "normal-structure": _params_chebyshev,
    "modulus-probe": _params_modulus_probe,
    "ui-certificate": _params_ui_certificate,
    "orlicz-build": _params_orlicz_build,
    "alspach-orbit": _params_alspach_orbit,
    "km-iterate": _params_km_iterate,
}


def validate_config(raw: str):
    """Validate raw JSON text; a ScenarioConfig on success, else all violations.

    The violation list covers every problem found, not just the first, so
    a config can be fixed in one pass.
    """
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        return [f"config: invalid JSON ({exc.msg} at line {exc.lineno})"]
    if not isinstance(doc, dict):
        return ["config: top level must be a JSON object"]

    errors: list[str] = []
    known_top = {"experiment", "params", "seed", "resolution", "output_path"}
    for key in sorted(set(doc) - known_top):
        errors.append(f"{key}: unknown field")

    experiment = doc.get("experiment")
    if experiment is None:
        errors.append("experiment: required")
    elif not isinstance(experiment, str):
        errors.append("experiment: must be text")
    elif experiment not in EXPERIMENTS:
        errors.append(f"experiment: unknown experiment {experiment!r}")

    seed = doc.get("seed")
    if seed is None:
        errors.append("seed: required")
    elif not _is_int(seed):
        errors.append("seed: must be an integer")

    output_path = doc.get("output_path")
    if output_path is None:
        errors.append("output_path: required")
    elif not (isinstance(output_path, str) and output_path):
        errors.append("output_path: must be a nonempty path")

    resolution = doc.get("resolution")
    if resolution is not None and not _is_pow2(resolution):
        errors.append("resolution: must be a positive power of two")
        resolution = None

    raw_params = doc.get("params", {})
    params: dict = {}
    if not isinstance(raw_params, dict):
        errors.append("params: must be an object")
    elif isinstance(experiment, str) and experiment in _SCHEMAS:
        p = _Params(raw_params, errors)
        params = _SCHEMAS[experiment](p, resolution)
        p.flag_unknown()

    if errors:
        return errors
    return ScenarioConfig(
        experiment=experiment,
        params=params,
        seed=seed,
        output_path=output_path,
        resolution=resolution,
    )


# ---------------------------------------------------------------------------
# input builders


def _load_data_doc(path: str, what: str) -> dict:
    """Read a JSON data file, turning I/O and parse faults into library errors."""
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise DomainViolation(f"cannot read {what} file {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise DomainViolation(f"{what} file {path} is not valid JSON: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise DomainViolation(f"{what} file {path} must hold a JSON object")
    return doc


def _build_family(spec: dict, seed: int):
    digests = {}
    kind = spec["kind"]
    if kind == "spike":
        family = families.spike_family(spec["n_max"])
    elif kind == "half-indicators":
        family = families.half_indicator_family()
    elif kind == "dominated":
        family = families.dominated_family(
            seed, cells=spec["cells"], count=spec["count"], bound=spec["bound"]
        )
    elif kind == "example-set":
        family = sample_example_set(
            seed, spec["count"], spec["resolution"], storage=spec.get("storage")
        )
    else:
        path = spec["path"]
        family = function_family_from_doc(_load_data_doc(path, "family"))
        digests["family_file"] = sha256_of_file(path)
    return family, digests


def _build_body(spec: dict, seed: int):
    digests = {}
    if spec["kind"] == "file":
        path = spec["path"]
        body = convex_body_from_doc(_load_data_doc(path, "body"))
        digests["body_file"] = sha256_of_file(path)
        return body, digests
    rng = make_rng(seed, STREAM_BODY)
    lo, hi = spec["value_range"]
    mlo, mhi = spec["measure_range"]
    partition = Partition.single_window(rng.uniform(mlo, mhi, size=spec["cells"]))
    generators = tuple(
        GridFunction(partition, rng.uniform(lo, hi, size=spec["cells"]))
        for _ in range(spec["generators"])
    )
    return ConvexBody(generators=generators, label=f"random(seed={seed})"), digests


# ---------------------------------------------------------------------------
# runners


def _run_slack_audit(cfg: ScenarioConfig, out: Path, figures: bool):
    p = cfg.params
    rng = make_rng(cfg.seed, STREAM_PAIRS)
    partition = Partition.uniform(p["cells"])
    lo, hi = p["value_range"]
    slacks = []
    worst_gap = 0.0
    rows = []
    for i in range(p["pairs"]):
        a = GridFunction(partition, rng.uniform(lo, hi, size=p["cells"]))
        b = GridFunction(partition, rng.uniform(lo, hi, size=p["cells"]))
        value = slack(a, b)
        gap = slack_identity_gap(a, b)
        worst_gap = max(worst_gap, gap)
        slacks.append(value)
        rows.append((i, repr(value), repr(gap)))
    write_csv(out / "slack_audit.csv", ["pair", "slack", "identity_gap"], rows)
    if figures:
        plots.histogram(
            out / "slack_audit.png", slacks, "cancellation mass across random pairs", "slack"
        )
    return {
        "pairs": p["pairs"],
        "cells": p["cells"],
        "max_identity_gap": worst_gap,
        "max_slack": max(slacks),
        "mean_slack": float(np.mean(slacks)),
        "zero_slack_pairs": sum(1 for s in slacks if s == 0.0),
    }, {}


def _run_lorentz_table(cfg: ScenarioConfig, out: Path, figures: bool):
    p = cfg.params
    values = lorentz_norm_table(p["k_max"], p["p"])
    lorentz_table_to_csv(values, out / "lorentz_table.csv")
    if figures:
        plots.line_plot(
            out / "lorentz_table.png",
            list(range(1, len(values) + 1)),
            values,
            f"(p,1) norm of k ones, p={p['p']:g}",
            "k",
            "norm",
        )
    return {"k_max": p["k_max"], "p": p["p"], "norms": values}, {}


def _run_chebyshev(cfg: ScenarioConfig, out: Path, figures: bool):
    p = cfg.params
    body, digests = _build_body(p["body"], cfg.seed)
    result = chebyshev(body, tol=p["tol"], max_iter=p["max_iter"])
    diam = diameter(body)
    write_csv(
        out / "chebyshev_history.csv",
        ["iteration", "best_radius"],
        [(i, repr(v)) for i, v in result.history],
    )
    if figures:
        plots.line_plot(
            out / "chebyshev_history.png",
            [i for i, _ in result.history],
            [v for _, v in result.history],
            f"center search on {body.label or 'body'}",
            "iteration",
            "best radius",
        )
    payload = {
        "label": body.label,
        "generators": len(body),
        "cells": body.partition.cell_count,
        "diameter": diam,
        **center_result_to_doc(result),
    }
    return payload, digests


def _run_normal_structure(cfg: ScenarioConfig, out: Path, figures: bool):
    p = cfg.params
    body, digests = _build_body(p["body"], cfg.seed)
    ns = normal_structure_gap(body, tol=p["tol"], max_iter=p["max_iter"])
    write_csv(
        out / "normal_structure.csv",
        ["diam", "rad", "gap", "ratio"],
        [(repr(ns.diam), repr(ns.rad), repr(ns.gap), repr(ns.ratio))],
    )
    if figures:
        plots.bar_pair(
            out / "normal_structure.png",
            ["radius", "diameter"],
            [ns.rad, ns.diam],
            body.label or "body",
            "L1 distance",
        )
    return {
        "label": body.label,
        "diam": ns.diam,
        "rad": ns.rad,
        "gap": ns.gap,
        "ratio": ns.ratio,
        "certified_gap": ns.center_result.certified_gap,
        "converged": ns.center_result.converged,
        "iterations": ns.center_result.iterations,
    }, digests


def _run_modulus_probe(cfg: ScenarioConfig, out: Path, figures: bool):
    p = cfg.params
    family, digests = _build_family(p["family"], cfg.seed)
    probe = empirical_modulus(family, eta=p["eta"], sample_count=p["samples"], seed=cfg.seed)
    write_csv(
        out / "modulus_pairs.csv",
        ["i", "j", "ratio", "midpoint_norm", "norm_sum", "contribution"],
        [
            (r.i, r.j, repr(r.ratio), repr(r.midpoint_norm), repr(r.norm_sum), repr(r.contribution))
            for r in probe.rows
        ],
    )
    if figures:
        plots.scatter(
            out / "modulus_pairs.png",
            [r.ratio for r in probe.rows],
            [r.contribution for r in probe.rows],
            f"convexity contributions, eta={p['eta']:g}",
            "separation ratio",
            "contribution",
        )
    payload = modulus_probe_to_doc(probe)
    payload["family_label"] = family.label
    return payload, digests


def _run_ui_certificate(cfg: ScenarioConfig, out: Path, figures: bool):
    p = cfg.params
    family, digests = _build_family(p["family"], cfg.seed)
    cert = ui_certificate(family, p["eps_grid"], m_cap=p.get("m_cap"))
    doc = ui_certificate_to_doc(cert)
    write_json(out / "certificate.json", doc)
    write_csv(
        out / "ui_certificate.csv",
        ["eps", "delta", "M"],
        [
            (repr(e), "" if d is None else repr(d), "" if m is None else repr(m))
            for e, d, m in zip(cert.eps_grid, cert.delta_of_eps, cert.M_of_eps)
        ],
    )
    if figures:
        plots.eps_witness_curves(
            out / "ui_certificate.png",
            cert.eps_grid,
            cert.delta_of_eps,
            cert.M_of_eps,
            f"{family.label or 'family'}: {cert.verdict}",
        )
    return {
        "family_label": family.label,
        "certificate": doc,
        "failures": [[eps, clause] for eps, clause in cert.failures],
    }, digests


def _run_orlicz_build(cfg: ScenarioConfig, out: Path, figures: bool):
    p = cfg.params
    family, digests = _build_family(p["family"], cfg.seed)
    phi = build_orlicz(family)
    bound = layer_cake_bound(phi, family)
    max_integral = max(orlicz_integral(phi, f) for f in family)
    profile = [tail_profile(family, s) for s in phi.breakpoints]
    write_csv(
        out / "orlicz_ladder.csv",
        ["k", "breakpoint", "tail_profile", "cap"],
        [
            (k + 1, repr(s), repr(profile[k]), repr(2.0 ** (-(k + 1))))
            for k, s in enumerate(phi.breakpoints)
        ],
    )
    if figures:
        knots = [phi.evaluate(s) for s in phi.breakpoints]
        plots.step_curve(
            out / "orlicz_ladder.png",
            list(phi.breakpoints),
            knots,
            f"gauge for {family.label or 'family'}",
        )
    return {
        "family_label": family.label,
        "breakpoints": list(phi.breakpoints),
        "slopes": list(phi.slopes),
        "tail_profile_at_breakpoints": profile,
        "bound": bound,
        "max_integral": max_integral,
        "margin": bound - max_integral,
    }, digests


def _run_alspach_orbit(cfg: ScenarioConfig, out: Path, figures: bool):
    p = cfg.params
    blocks = [float(b) for b in p["x0"]]
    depth = len(blocks).bit_length() - 1
    x0 = GridFunction(Partition.dyadic(depth), blocks, effective_resolution=depth)
    records = orbit_hull_scan(
        x0, steps=p["steps"], resolutions=p["resolutions"], mode=p["mode"], tol=p["tol"]
    )
    docs = orbit_records_to_docs(records)
    write_csv(
        out / "orbit_scan.csv",
        ["resolution", "status", "orbit_len", "diam", "rad", "gap", "ratio"],
        [
            (
                d["resolution"],
                d["status"],
                d["orbit_len"],
                *("" if d[k] is None else repr(d[k]) for k in ("diam", "rad", "gap", "ratio")),
            )
            for d in docs
        ],
    )
    plotted = [(d["resolution"], d["ratio"]) for d in docs if d["ratio"] is not None]
    if figures and plotted:
        plots.line_plot(
            out / "orbit_scan.png",
            [r for r, _ in plotted],
            [v for _, v in plotted],
            f"orbit hull ratio, steps={p['steps']}, {p['mode']} mode",
            "resolution (cells)",
            "rad / diam",
        )
    return {"mode": p["mode"], "steps": p["steps"], "records": docs}, {}


def _run_km_iterate(cfg: ScenarioConfig, out: Path, figures: bool):
    p = cfg.params
    digests = {}
    spec = map_spec_from_doc(p["map"])
    x0_spec = p["x0"]
    if x0_spec["kind"] == "file":
        path = x0_spec["path"]
        x0 = grid_function_from_doc(_load_data_doc(path, "x0"))
        digests["x0_file"] = sha256_of_file(path)
    elif x0_spec["kind"] == "constant":
        depth = cfg.resolution.bit_length() - 1
        x0 = GridFunction(
            Partition.dyadic(depth),
            np.full(cfg.resolution, float(x0_spec["value"])),
            effective_resolution=0,
        )
    else:
        x0 = sample_example_set(cfg.seed, 1, cfg.resolution)[0]
    trace = km_iterate(spec, x0, lam=p["lam"], max_steps=p["max_steps"], tol=p["tol"])
    trace_to_csv(trace, out / "km_trace.csv")
    residuals = [row.residual for row in trace.rows]
    if figures and residuals:
        plots.line_plot(
            out / "km_trace.png",
            [row.n for row in trace.rows],
            residuals,
            f"residuals, lam={p['lam']:g}, {trace.status}",
            "step",
            "residual",
            logy=all(r > 0 for r in residuals),
        )
    return {
        "status": trace.status,
        "lam": p["lam"],
        "tol": p["tol"],
        "steps_recorded": len(trace.rows),
        "residual_first": residuals[0] if residuals else None,
        "residual_last": residuals[-1] if residuals else None,
        "final_effective_resolution": trace.final.effective_resolution,
    }, digests


_RUNNERS = {
    "slack-audit": _run_slack_audit,
    "lorentz-table": _run_lorentz_table,
    "chebyshev": _run_chebyshev,
    "normal-structure": _run_normal_structure,
    "modulus-probe": _run_modulus_probe,
    "ui-certificate": _run_ui_certificate,
    "orlicz-build": _run_orlicz_build,
    "alspach-orbit": _run_alspach_orbit,
    "km-iterate": _run_km_iterate,
}


def run_scenario(
    config: ScenarioConfig,
    *,
    out_override: str | None = None,
    seed_override: int | None = None,
    figures: bool = True,
) -> RunReport:
    """Execute one experiment and write its report files.

    Writes ``report.json`` (config echo, results, timing, digests) and
    ``results.json`` (payload only, canonical bytes) plus the
    experiment's CSV and figure into the output directory.
    """
    if config.experiment not in _RUNNERS:
        raise DomainViolation(f"unknown experiment {config.experiment!r}")
    cfg = config if seed_override is None else replace(config, seed=seed_override)
    out = Path(out_override if out_override is not None else cfg.output_path)
    out.mkdir(parents=True, exist_ok=True)

    config_doc = {
        "experiment": cfg.experiment,
        "params": cfg.params,
        "seed": cfg.seed,
        "resolution": cfg.resolution,
        "output_path": cfg.output_path,
    }
    started = time.perf_counter()
    results, extra_digests = _RUNNERS[cfg.experiment](cfg, out, figures)
    wall = time.perf_counter() - started

    digests = {"config": sha256_of_text(canonical_json(config_doc))}
    digests.update(extra_digests)
    report = RunReport(
        config=config_doc,
        results=results,
        wall_time_seconds=wall,
        version=__version__,
        input_digests=digests,
    )
    write_json(out / "results.json", results)
    write_json(
        out / "report.json",
        {
            "config": config_doc,
            "results": results,
            "wall_time_seconds": wall,
            "version": __version__,
            "input_digests": digests,
        },
    )
    return report


def load_config(path) -> ScenarioConfig:
    """Read and validate a config file, raising ConfigError on violations."""
    result = validate_config(Path(path).read_text())
    if isinstance(result, list):
        raise ConfigError(result)
    return result
