"""End-to-end acceptance checks.

Each test prints a single ``ACCEPTANCE n: PASS`` (or FAIL) line and
enforces its runtime budget. Tolerances are pinned in the assertions.
The lines also land in ``VERDICTS``, which conftest replays in the
terminal summary so they are visible without ``-s``.
"""

import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from l1lab.convex_geometry import (
    ConvexBody,
    chebyshev,
    diameter,
    empirical_modulus,
    slack_identity_gap,
)
from l1lab.families import dominated_family, half_indicator_family, spike_family
from l1lab.fixed_point_lab import (
    MapSpec,
    alspach_map,
    km_iterate,
    lipschitz_estimate,
    orbit_hull_scan,
    sample_example_set,
)
from l1lab.grid_space import GridFunction, Partition, l1_norm
from l1lab.integrability import (
    build_orlicz,
    layer_cake_bound,
    orlicz_integral,
    tail_profile,
    ui_certificate,
)
from l1lab.lorentz import lorentz_norm_table, lorentz_p1_norm
from l1lab.scenarios import run_scenario, validate_config

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"
SEED = 2026
VERDICTS: list[str] = []


def _say(line):
    VERDICTS.append(line)
    print(line)


@contextmanager
def _criterion(n, budget_seconds):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        _say(f"ACCEPTANCE {n}: FAIL")
        raise
    elapsed = time.perf_counter() - start
    if elapsed > budget_seconds:
        _say(f"ACCEPTANCE {n}: FAIL (runtime {elapsed:.1f}s exceeds {budget_seconds}s)")
        raise AssertionError(f"criterion {n} runtime {elapsed:.1f}s over budget")
    _say(f"ACCEPTANCE {n}: PASS ({elapsed:.2f}s)")


def test_acceptance_01_slack_identity_audit():
    with _criterion(1, 1.0):
        rng = np.random.default_rng(SEED)
        p = Partition.uniform(16)
        for _ in range(1000):
            a = GridFunction(p, rng.uniform(-5, 5, size=16))
            b = GridFunction(p, rng.uniform(-5, 5, size=16))
            assert slack_identity_gap(a, b) <= 1e-12


def test_acceptance_02_alspach_isometry():
    with _criterion(2, 5.0):
        fam = sample_example_set(SEED, 400, 1024, storage=2048)
        for i in range(0, 400, 2):
            f, g = fam[i], fam[i + 1]
            tf, tg = alspach_map(f), alspach_map(g)
            assert abs(l1_norm(tf - tg) - l1_norm(f - g)) <= 1e-12
            for out in (tf, tg):
                assert (out.values >= 0.0).all() and (out.values <= 1.0).all()
                integral = float(out.values @ out.partition.cell_measures)
                assert abs(integral - 0.5) <= 1e-12
        est = lipschitz_estimate(MapSpec.alspach(), SEED, 200, fam)
        assert abs(est - 1.0) <= 1e-9


def test_acceptance_03_residual_dichotomy():
    with _criterion(3, 10.0):
        x0 = GridFunction(Partition.dyadic(12), np.full(4096, 0.5), effective_resolution=0)
        pure = km_iterate(MapSpec.alspach(), x0, lam=1.0, max_steps=500)
        assert pure.status == "RESOLUTION_EXHAUSTED"
        first = pure.rows[0].residual
        for row in pure.rows:
            assert abs(row.residual - first) <= 1e-12
        averaged = km_iterate(
            MapSpec.alspach(mode="project"), x0, lam=0.5, max_steps=200
        )
        residuals = [row.residual for row in averaged.rows]
        assert all(b <= a + 1e-12 for a, b in zip(residuals, residuals[1:]))
        assert residuals[200] < residuals[10]


def _brute_force_radius(body, grid):
    # exhaustive minimax over the grid, axis tables first so the inner
    # loops are pure array sums
    w = body.partition.cell_measures
    tables = [
        [np.abs(g.values[c] - grid) * w[c] for c in range(len(w))]
        for g in body.generators
    ]
    if len(w) == 2:
        planes = [t[0][:, None] + t[1][None, :] for t in tables]
        return float(np.min(np.max(planes, axis=0)))
    rests = [t[1][:, None] + t[2][None, :] for t in tables]
    best = np.inf
    for i in range(grid.size):
        stack = [t[0][i] + rest for t, rest in zip(tables, rests)]
        best = min(best, float(np.min(np.max(stack, axis=0))))
    return best


def test_acceptance_04_chebyshev_matches_brute_force():
    with _criterion(4, 60.0):
        rng = np.random.default_rng(SEED)
        grid = np.linspace(-2.0, 2.0, 401)
        for _ in range(20):
            cells = int(rng.integers(2, 4))
            n_gen = int(rng.integers(2, 5))
            p = Partition.single_window(rng.uniform(0.2, 0.9, size=cells))
            gens = tuple(
                GridFunction(p, rng.uniform(-1.5, 1.5, size=cells)) for _ in range(n_gen)
            )
            body = ConvexBody(gens, "acc4")
            res = chebyshev(body, tol=1e-6)
            brute = _brute_force_radius(body, grid)
            assert abs(res.radius - brute) <= 2e-2
            d = diameter(body)
            assert d / 2 - 1e-9 <= res.radius <= d + 1e-9
        for seed in range(5):
            rng2 = np.random.default_rng(seed)
            p = Partition.single_window(rng2.uniform(0.2, 0.9, size=3))
            pair = ConvexBody(
                tuple(GridFunction(p, rng2.uniform(-1.5, 1.5, size=3)) for _ in range(2)),
                "acc4-pair",
            )
            res = chebyshev(pair, tol=1e-11)
            assert abs(res.radius - diameter(pair) / 2) <= 1e-10


def test_acceptance_05_normal_structure_scan():
    with _criterion(5, 120.0):
        x0 = GridFunction(Partition.single_window([1.0]), np.array([0.5]))
        records = orbit_hull_scan(x0, steps=6, resolutions=[16, 32, 64, 128, 256])
        _say("  resolution  points  status                diam      rad       gap     ratio")
        for rec in records:
            _say(
                f"  {rec.resolution:10d}  {rec.orbit_len:6d}  {rec.status:20s}"
                f"  {rec.diam:.5f}  {rec.rad:.5f}  {rec.gap:.5f}  {rec.ratio:.5f}"
            )
            assert rec.gap is not None and rec.gap > 0.0


def test_acceptance_06_orlicz_construction():
    with _criterion(6, 5.0):
        fam = sample_example_set(SEED, 20, 64)
        phi = build_orlicz(fam)
        bps = phi.breakpoints
        assert all(b > a for a, b in zip(bps, bps[1:]))
        for k, s in enumerate(bps, start=1):
            assert tail_profile(fam, s) <= 2.0 ** (-k)
        slopes = phi.slopes
        assert all(b >= a for a, b in zip(slopes, slopes[1:]))
        worst = max(orlicz_integral(phi, f) for f in fam)
        assert worst <= layer_cake_bound(phi, fam) + 1e-9


def test_acceptance_07_ui_certificate_controls():
    with _criterion(7, 5.0):
        spike_cert = ui_certificate(spike_family(64), [0.5], m_cap=63.0)
        assert spike_cert.verdict.startswith("FAILED")
        assert (0.5, "clause ii") in spike_cert.failures
        dom_cert = ui_certificate(
            dominated_family(SEED, cells=256, count=12, bound=2.0), [0.5, 0.1, 0.02]
        )
        assert dom_cert.verdict == "UI_AT_TESTED_SCALES"


def test_acceptance_08_modulus_probe_finding():
    with _criterion(8, 1.0):
        probe = empirical_modulus(half_indicator_family(), eta=0.9, sample_count=100, seed=SEED)
        assert abs(probe.delta_hat) <= 1e-12
        wa, wb = probe.witness_members
        overlap = np.minimum(np.abs(wa.values), np.abs(wb.values))
        assert float(overlap @ wa.partition.cell_measures) == 0.0


def test_acceptance_09_lorentz_values():
    with _criterion(9, 1.0):
        assert abs(lorentz_p1_norm(np.array([1.0, 1.0]), 2.0) - (1 + 2**-0.5)) <= 1e-6
        table = lorentz_norm_table(4, 2.0)
        partial = 1 + 2**-0.5 + 3**-0.5 + 4**-0.5
        assert abs(table[3] - partial) <= 1e-6
        rng = np.random.default_rng(SEED)
        for _ in range(500):
            x = rng.uniform(-3, 3, size=6)
            y = rng.uniform(-3, 3, size=6)
            assert lorentz_p1_norm(x + y, 2.0) <= (
                lorentz_p1_norm(x, 2.0) + lorentz_p1_norm(y, 2.0) + 1e-12
            )


def test_acceptance_10_determinism(tmp_path):
    with _criterion(10, 300.0):
        configs = sorted(CONFIG_DIR.glob("*.json"))
        assert configs, "no bundled configs found"
        for path in configs:
            cfg = validate_config(path.read_text())
            assert not isinstance(cfg, list), f"{path.name}: {cfg}"
            out_a = tmp_path / path.stem / "a"
            out_b = tmp_path / path.stem / "b"
            run_scenario(cfg, out_override=str(out_a), figures=False)
            run_scenario(cfg, out_override=str(out_b), figures=False)
            bytes_a = (out_a / "results.json").read_bytes()
            bytes_b = (out_b / "results.json").read_bytes()
            assert bytes_a == bytes_b, f"{path.name}: results differ between runs"
