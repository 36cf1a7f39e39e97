"""Radius, diameter, and convexity diagnostics for finitely generated bodies.

A :class:`ConvexBody` is the convex hull of finitely many grid functions.
Because the L1 distance is jointly convex, the hull's diameter is attained
at a pair of generators, and the radius functional r(z) = max distance
from z to a generator is convex in z, so the Chebyshev center problem is
a finite minimax solved here by subgradient descent with a running best.

The certified gap reported with each center is upper bound minus the
half-diameter lower bound. That lower bound is not always tight, so a
perfectly good center can retain a positive certified gap; callers that
need agreement with ground truth should compare radii, not gaps.

The module also carries the exact cancellation identity relating
``|a| + |b| - |a+b|`` to overlapping sign masses, and two convexity
probes: an empirical modulus over difference families and a separation
test between candidate centers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBody, DomainViolation, NoValidPair, PartitionMismatch
from .grid_space import FunctionFamily, GridFunction, l1_norm
from .integrability import family_difference
from .rng import STREAM_PAIRS, make_rng

DEFAULT_MAX_ITER = 24000
_ROUNDS = 12


@dataclass(frozen=True, eq=False)
class ConvexBody:
    """Convex hull of a nonempty generator list on one partition."""

    generators: tuple[GridFunction, ...]
    label: str = ""

    def __post_init__(self):
        gens = tuple(self.generators)
        if not gens:
            raise DomainViolation("a convex body needs at least one generator")
        base = gens[0].partition
        for i, g in enumerate(gens[1:], start=1):
            if g.partition is not base and g.partition != base:
                raise PartitionMismatch(f"generator {i} uses a different partition")
        object.__setattr__(self, "generators", gens)

    @property
    def partition(self):
        return self.generators[0].partition

    @property
    def duplicate_indices(self) -> tuple[int, ...]:
        """Indices of generators that repeat an earlier generator's values."""
        seen: set[bytes] = set()
        dups = []
        for i, g in enumerate(self.generators):
            key = g.values.tobytes()
            if key in seen:
                dups.append(i)
            seen.add(key)
        return tuple(dups)

    def __len__(self) -> int:
        return len(self.generators)


@dataclass(frozen=True, eq=False)
class CenterResult:
    """Outcome of a center search.

    ``certified_gap`` is best upper bound minus best lower bound on the
    radius; ``converged`` records whether it reached the requested
    tolerance before the iteration cap. ``history`` holds (iteration,
    best radius so far) pairs for trace output.
    """

    radius: float
    center: GridFunction
    iterations: int
    certified_gap: float
    converged: bool
    lower_bound: float
    history: tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class NormalStructure:
    diam: float
    rad: float
    gap: float
    ratio: float
    center_result: CenterResult


@dataclass(frozen=True)
class ModulusRow:
    """One qualifying pair in a modulus probe."""

    i: int
    j: int
    ratio: float
    midpoint_norm: float
    norm_sum: float
    contribution: float


@dataclass(frozen=True, eq=False)
class ModulusProbe:
    """Result of scanning difference-family pairs for convexity defect.

    ``delta_hat`` is the smallest contribution seen over qualifying pairs
    (clamped at zero: the triangle inequality forces nonnegativity, so any
    negative value is rounding noise). A zero is a finding, not a failure.
    """

    delta_hat: float
    witness: tuple[int, int]
    witness_members: tuple[GridFunction, GridFunction]
    eta: float
    pairs_tested: int
    qualifying: int
    exhaustive: bool
    rows: tuple[ModulusRow, ...]


@dataclass(frozen=True)
class SeparationResult:
    holds: bool
    witness: int | None
    ratio: float | None


# ---------------------------------------------------------------------------
# the cancellation identity


def _slack_integrands(a: GridFunction, b: GridFunction) -> tuple[np.ndarray, np.ndarray]:
    va, vb = a.values, b.values
    direct = np.abs(va) + np.abs(vb) - np.abs(va + vb)
    overlap = 2.0 * (
        np.minimum(np.clip(va, 0.0, None), np.clip(-vb, 0.0, None))
        + np.minimum(np.clip(-va, 0.0, None), np.clip(vb, 0.0, None))
    )
    return direct, overlap


def slack(a: GridFunction, b: GridFunction) -> float:
    """Integral of |a| + |b| - |a+b|, the mass lost to sign cancellation.

    The integrand equals twice the overlap of opposing sign parts cell by
    cell; both forms are computed and must agree pointwise to 1e-12, which
    guards the arithmetic rather than the caller.
    """
    if a.partition is not b.partition and a.partition != b.partition:
        raise PartitionMismatch("slack needs both functions on one partition")
    direct, overlap = _slack_integrands(a, b)
    worst = float(np.max(np.abs(direct - overlap))) if direct.size else 0.0
    if worst > 1e-12:
        raise ArithmeticError(
            f"cancellation identity violated pointwise by {worst:.3e}"
        )
    return max(0.0, float(direct @ a.partition.cell_measures))


def slack_identity_gap(a: GridFunction, b: GridFunction) -> float:
    """Absolute difference of the two slack formulas, integrated. Audit hook."""
    if a.partition is not b.partition and a.partition != b.partition:
        raise PartitionMismatch("slack needs both functions on one partition")
    direct, overlap = _slack_integrands(a, b)
    w = a.partition.cell_measures
    return abs(float(direct @ w) - float(overlap @ w))


# ---------------------------------------------------------------------------
# diameter and Chebyshev center


def diameter(body: ConvexBody) -> float:
    """Largest pairwise generator distance; equals the hull diameter."""
    gens = body.generators
    w = body.partition.cell_measures
    values = np.stack([g.values for g in gens])
    best = 0.0
    for i in range(len(gens)):
        dists = np.abs(values[i + 1 :] - values[i]) @ w
        if dists.size:
            best = max(best, float(dists.max()))
    return best


def chebyshev(body: ConvexBody, tol: float, max_iter: int = DEFAULT_MAX_ITER) -> CenterResult:
    """Minimize the worst generator distance over unconstrained centers.

    Subgradient descent on r(z) = max_g ||g - z||_1 with a diminishing
    step schedule, restarted from the running best at a halved scale a
    fixed number of times. Square-summable steps make the running best
    converge; the restarts just speed that up. Stops early once the
    certified gap (best value minus half the diameter) is within ``tol``.
    """
    if not tol > 0:
        raise DomainViolation(f"tolerance must be positive, got {tol}")
    if max_iter < 1:
        raise DomainViolation("iteration cap must be at least 1")
    gens = np.stack([g.values for g in body.generators])
    w = np.asarray(body.partition.cell_measures)

    def value_and_worst(z: np.ndarray) -> tuple[float, int]:
        dists = np.abs(gens - z) @ w
        worst = int(np.argmax(dists))
        return float(dists[worst]), worst

    lower = diameter(body) / 2.0
    best_z = gens.mean(axis=0)
    best_val, _ = value_and_worst(best_z)
    history = [(0, best_val)]
    iterations = 0
    gap = max(0.0, best_val - lower)

    weight_sq = float(w @ w)
    inner = max(1, max_iter // _ROUNDS)
    for r in range(_ROUNDS):
        if gap <= tol or iterations >= max_iter or best_val == 0.0:
            break
        z = best_z.copy()
        scale = best_val / weight_sq / (2.0 ** r)
        for k in range(inner):
            if iterations >= max_iter:
                break
            val, worst = value_and_worst(z)
            iterations += 1
            if val < best_val:
                best_val = val
                best_z = z.copy()
                gap = max(0.0, best_val - lower)
            history.append((iterations, best_val))
            if gap <= tol:
                break
            z += (scale / (k + 1)) * np.sign(gens[worst] - z) * w

    center = GridFunction(body.partition, best_z)
    return CenterResult(
        radius=best_val,
        center=center,
        iterations=iterations,
        certified_gap=gap,
        converged=gap <= tol,
        lower_bound=lower,
        history=tuple(history),
    )


def normal_structure_gap(
    body: ConvexBody, tol: float = 1e-6, max_iter: int = DEFAULT_MAX_ITER
) -> NormalStructure:
    """Diameter minus radius for a body of positive diameter.

    The mean of the generators already has worst-case distance at most
    (n-1)/n times the diameter, so finitely generated bodies always show a
    strictly positive gap; a zero diameter means the quantity is undefined
    and is rejected.
    """
    diam = diameter(body)
    if diam == 0.0:
        raise DegenerateBody("all generators coincide; radius ratio undefined")
    result = chebyshev(body, tol=tol, max_iter=max_iter)
    gap = max(0.0, diam - result.radius)
    return NormalStructure(
        diam=diam,
        rad=result.radius,
        gap=gap,
        ratio=result.radius / diam,
        center_result=result,
    )


# ---------------------------------------------------------------------------
# convexity probes


def empirical_modulus(
    family: FunctionFamily, eta: float, sample_count: int, seed: int
) -> ModulusProbe:
    """Scan difference-family pairs for the smallest convexity contribution.

    Pairs x, y with ||x-y|| at least eta times ||x|| + ||y|| contribute
    1 - midpoint norm / averaged norm. All unordered pairs are enumerated
    when the budget covers them; otherwise ``sample_count`` pairs are drawn
    with the probe's own stream, independent of eta, so shrinking eta with
    a fixed seed only ever enlarges the qualifying set.
    """
    if not 0 < eta <= 1:
        raise DomainViolation(f"eta must lie in (0, 1], got {eta}")
    if sample_count < 1:
        raise DomainViolation("sample count must be at least 1")
    diff = family_difference(family)
    n = len(diff)
    all_pairs = n * (n - 1) // 2
    exhaustive = all_pairs <= sample_count
    if exhaustive:
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    else:
        draws = make_rng(seed, STREAM_PAIRS).integers(0, n, size=(sample_count, 2))
        pairs = [(int(i), int(j)) for i, j in draws if i != j]

    rows: list[ModulusRow] = []
    tested = 0
    for i, j in pairs:
        x, y = diff[i], diff[j]
        norm_sum = l1_norm(x) + l1_norm(y)
        if norm_sum == 0.0:
            continue
        tested += 1
        ratio = l1_norm(x - y) / norm_sum
        if ratio < eta:
            continue
        midpoint_norm = l1_norm(x + y) / 2.0
        contribution = 1.0 - midpoint_norm / (norm_sum / 2.0)
        rows.append(ModulusRow(i, j, ratio, midpoint_norm, norm_sum, contribution))

    if not rows:
        raise NoValidPair(f"no pair reached the eta={eta} separation among {tested} tested")
    best = min(rows, key=lambda row: row.contribution)
    return ModulusProbe(
        delta_hat=max(0.0, best.contribution),
        witness=(best.i, best.j),
        witness_members=(diff[best.i], diff[best.j]),
        eta=eta,
        pairs_tested=tested,
        qualifying=len(rows),
        exhaustive=exhaustive,
        rows=tuple(rows),
    )


def separation_check(
    c1: GridFunction, c2: GridFunction, body: ConvexBody, eta: float
) -> SeparationResult:
    """First generator witnessing eta-separation of two candidate centers.

    The separation ratio against witness w is ||c1 - c2|| over
    ||c1 - w|| + ||c2 - w||; generators that zero the denominator are
    skipped. Reports the first witness reaching eta, or the best ratio
    seen when none does.
    """
    if not 0 < eta < 1:
        raise DomainViolation(f"eta must lie in (0, 1), got {eta}")
    for f in (c1, c2):
        if f.partition is not body.partition and f.partition != body.partition:
            raise PartitionMismatch("centers must share the body's partition")
    numerator = l1_norm(c1 - c2)
    best: float | None = None
    for idx, w in enumerate(body.generators):
        denominator = l1_norm(c1 - w) + l1_norm(c2 - w)
        if denominator == 0.0:
            continue
        ratio = numerator / denominator
        if best is None or ratio > best:
            best = ratio
        if ratio >= eta:
            return SeparationResult(holds=True, witness=idx, ratio=ratio)
    return SeparationResult(holds=False, witness=None, ratio=best)
