"""Executable nonexpansive maps and averaged-iteration probes.

The centerpiece is the baker-transform isometry on the set
K = {0 <= f <= 1, integral 1/2} over the unit interval: squash the
graph's lower half onto [0, 1/2] and its overflow onto (1/2, 1]. On a
dyadic grid the formula is exact, but each application doubles the
dyadic depth a function genuinely needs. Functions therefore carry an
effective depth, the map increments it, and the storage depth bounds how
many exact applications a grid admits; running past that raises
:class:`~l1lab.errors.ResolutionExhausted` rather than silently aliasing.

For long iterations there is a projected variant: apply the exact map at
the doubled depth, then average adjacent cells back onto the storage
grid. Cell averaging is an L1 contraction that preserves the integral,
so the composite stays nonexpansive on K and can be iterated forever,
at the price of no longer being an isometry.

Maps compose into :class:`MapSpec` trees (identity, constant targets,
convex combinations, compositions) evaluated by :func:`apply_map`, and
:func:`km_iterate` runs the averaged scheme
x_{n+1} = (1 - lam) x_n + lam T x_n with a per-step trace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .convex_geometry import ConvexBody, normal_structure_gap
from .errors import DomainViolation, NoValidPair, ResolutionExhausted
from .grid_space import FunctionFamily, GridFunction, Partition, dyadic_depth, l1_norm
from .rng import STREAM_FAMILY, STREAM_PAIRS, make_rng

MEMBERSHIP_TOL = 1e-9
MAP_KINDS = ("identity", "constant", "alspach", "convex_combination", "composition")


@dataclass(frozen=True, eq=False)
class MapSpec:
    """A tree of composable maps.

    ``kind`` selects the node type; only the fields that kind uses are
    meaningful. Convex combinations carry (weight, child) terms with
    nonnegative weights summing to one; compositions apply their parts
    left to right. The alspach leaf takes ``mode`` "exact" (depth-tracked
    isometry) or "project" (cell-averaged, iterable forever).
    """

    kind: str
    target: GridFunction | None = None
    mode: str = "exact"
    terms: tuple[tuple[float, "MapSpec"], ...] = ()
    parts: tuple["MapSpec", ...] = ()
    domain_label: str = ""

    def __post_init__(self):
        if self.kind not in MAP_KINDS:
            raise DomainViolation(f"unknown map kind {self.kind!r}")
        if self.kind == "constant" and self.target is None:
            raise DomainViolation("constant map needs a target function")
        if self.kind == "alspach" and self.mode not in ("exact", "project"):
            raise DomainViolation(f"alspach mode must be 'exact' or 'project', got {self.mode!r}")
        if self.kind == "convex_combination":
            terms = tuple((float(w), child) for w, child in self.terms)
            if not terms:
                raise DomainViolation("convex combination needs at least one term")
            if any(w < 0 for w, _ in terms):
                raise DomainViolation("convex combination weights must be nonnegative")
            total = sum(w for w, _ in terms)
            if abs(total - 1.0) > 1e-12:
                raise DomainViolation(f"convex combination weights sum to {total}, not 1")
            object.__setattr__(self, "terms", terms)
        if self.kind == "composition":
            parts = tuple(self.parts)
            if not parts:
                raise DomainViolation("composition needs at least one part")
            object.__setattr__(self, "parts", parts)

    @staticmethod
    def identity() -> "MapSpec":
        return MapSpec(kind="identity")

    @staticmethod
    def constant(target: GridFunction) -> "MapSpec":
        return MapSpec(kind="constant", target=target)

    @staticmethod
    def alspach(mode: str = "exact") -> "MapSpec":
        return MapSpec(kind="alspach", mode=mode)

    @staticmethod
    def combine(*terms: tuple[float, "MapSpec"]) -> "MapSpec":
        return MapSpec(kind="convex_combination", terms=tuple(terms))

    @staticmethod
    def compose(*parts: "MapSpec") -> "MapSpec":
        return MapSpec(kind="composition", parts=tuple(parts))


@dataclass(frozen=True)
class StepRecord:
    n: int
    residual: float
    step_norm: float
    drift: float


@dataclass(frozen=True, eq=False)
class IterationTrace:
    """Step-by-step record of an averaged iteration.

    ``step_norm`` is stored as lam times the residual, which the update
    rule makes exact by construction. ``final`` is the iterate held when
    the loop stopped.
    """

    rows: tuple[StepRecord, ...]
    status: str
    lam: float
    tol: float
    final: GridFunction


@dataclass(frozen=True)
class OrbitScanRecord:
    """Hull geometry of one truncated orbit at one resolution.

    ``status`` is OK when all requested steps fit the grid and
    RESOLUTION_EXHAUSTED when the orbit was cut short; geometry fields are
    None when fewer than two orbit points exist.
    """

    resolution: int
    status: str
    orbit_len: int
    diam: float | None
    rad: float | None
    gap: float | None
    ratio: float | None


# ---------------------------------------------------------------------------
# the baker-transform isometry


def _integral(f: GridFunction) -> float:
    return float(f.values @ f.partition.cell_measures)


def _check_membership(f: GridFunction) -> None:
    v = f.values
    if v.size and (v.min() < -MEMBERSHIP_TOL or v.max() > 1.0 + MEMBERSHIP_TOL):
        raise DomainViolation(
            f"values must lie in [0, 1]; found range [{v.min():.3g}, {v.max():.3g}]"
        )
    integral = _integral(f)
    if abs(integral - 0.5) > MEMBERSHIP_TOL:
        raise DomainViolation(f"integral must be 1/2, got {integral:.12g}")


def _effective_depth(f: GridFunction, storage_depth: int) -> int:
    """Declared effective depth, or the smallest depth the values admit."""
    if f.effective_resolution is not None:
        return f.effective_resolution
    for m in range(storage_depth + 1):
        blocks = f.values.reshape(2 ** m, -1)
        if np.all(blocks == blocks[:, :1]):
            return m
    return storage_depth


def alspach_map(f: GridFunction) -> GridFunction:
    """One exact baker-transform step; the output needs one more depth level.

    Writing b for the value on a depth-m block, the image takes value
    min(2b, 1) on the block's left half-scale copy in [0, 1/2] and
    max(2b - 1, 0) on its copy in (1/2, 1]. Those two values sum to 2b,
    so the integral is preserved exactly, and the pointwise identity
    |min(2a,1) - min(2b,1)| + |max(2a-1,0) - max(2b-1,0)| = 2|a - b|
    makes the map an isometry on the grid.
    """
    storage = dyadic_depth(f.partition)
    _check_membership(f)
    m = _effective_depth(f, storage)
    if m >= storage:
        raise ResolutionExhausted(
            f"image needs depth {m + 1} but storage holds 2^{storage} cells",
            effective=m,
            storage=storage,
        )
    stride = 2 ** (storage - m)
    blocks = f.values[::stride]
    image = np.concatenate((np.minimum(2.0 * blocks, 1.0), np.maximum(2.0 * blocks - 1.0, 0.0)))
    return GridFunction(f.partition, np.repeat(image, stride // 2), effective_resolution=m + 1)


def alspach_map_projected(f: GridFunction) -> GridFunction:
    """Baker-transform step followed by cell averaging back onto the grid.

    The exact image on the depth-(M+1) refinement is averaged over each
    storage cell's two halves. Averaging is integral-preserving and an L1
    contraction, so the composite is nonexpansive on K and never runs out
    of resolution, but contractions destroy the isometry, so residual
    traces under this map can genuinely decrease.
    """
    dyadic_depth(f.partition)
    _check_membership(f)
    v = f.values
    doubled = np.concatenate((np.minimum(2.0 * v, 1.0), np.maximum(2.0 * v - 1.0, 0.0)))
    return GridFunction(f.partition, 0.5 * (doubled[0::2] + doubled[1::2]))


def apply_map(spec: MapSpec, f: GridFunction) -> GridFunction:
    """Evaluate a map tree at one function."""
    if spec.kind == "identity":
        return f
    if spec.kind == "constant":
        target = spec.target
        if target.partition is not f.partition and target.partition != f.partition:
            raise DomainViolation("constant map target lives on a different partition")
        return target
    if spec.kind == "alspach":
        return alspach_map(f) if spec.mode == "exact" else alspach_map_projected(f)
    if spec.kind == "convex_combination":
        acc: GridFunction | None = None
        for weight, child in spec.terms:
            piece = weight * apply_map(child, f)
            acc = piece if acc is None else acc + piece
        return acc
    out = f
    for part in spec.parts:
        out = apply_map(part, out)
    return out


# ---------------------------------------------------------------------------
# iteration


def km_iterate(
    spec: MapSpec,
    x0: GridFunction,
    lam: float,
    max_steps: int,
    tol: float = 1e-10,
) -> IterationTrace:
    """Averaged iteration with a per-step residual trace.

    Each row holds the residual ||x_n - T x_n||, the implied step norm
    lam * residual, and the drift from the start. Stops on residual < tol
    (CONVERGED), the step cap (MAXED, after recording that step's row), or
    an exact alspach leaf running out of depth (RESOLUTION_EXHAUSTED).
    """
    if not 0 < lam <= 1:
        raise DomainViolation(f"lambda must lie in (0, 1], got {lam}")
    if max_steps < 0:
        raise DomainViolation("max_steps must be nonnegative")
    if tol < 0:
        raise DomainViolation("tol must be nonnegative")
    rows: list[StepRecord] = []
    x = x0
    status = "MAXED"
    for n in range(max_steps + 1):
        try:
            tx = apply_map(spec, x)
        except ResolutionExhausted:
            status = "RESOLUTION_EXHAUSTED"
            break
        residual = l1_norm(x - tx)
        rows.append(StepRecord(n=n, residual=residual, step_norm=lam * residual, drift=l1_norm(x - x0)))
        if residual < tol:
            status = "CONVERGED"
            break
        if n == max_steps:
            status = "MAXED"
            break
        # lam = 1 must hand the image through untouched so the exact
        # map's depth bookkeeping survives the update arithmetic.
        x = tx if lam == 1.0 else x + lam * (tx - x)
    return IterationTrace(rows=tuple(rows), status=status, lam=lam, tol=tol, final=x)


def lipschitz_estimate(
    spec: MapSpec, sampler_seed: int, pair_count: int, domain: FunctionFamily
) -> float:
    """Largest image-to-input distance ratio over sampled domain pairs."""
    if pair_count < 1:
        raise DomainViolation("pair count must be at least 1")
    rng = make_rng(sampler_seed, STREAM_PAIRS)
    n = len(domain)
    best: float | None = None
    for _ in range(pair_count):
        i, j = (int(v) for v in rng.integers(0, n, size=2))
        x, y = domain[i], domain[j]
        dist = l1_norm(x - y)
        if dist == 0.0:
            continue
        ratio = l1_norm(apply_map(spec, x) - apply_map(spec, y)) / dist
        best = ratio if best is None else max(best, ratio)
    if best is None:
        raise NoValidPair(f"all {pair_count} sampled pairs were degenerate")
    return best


# ---------------------------------------------------------------------------
# the example set and its orbits


def _fit_half_integral(blocks: np.ndarray) -> np.ndarray:
    """Shift-and-clip a block vector until its mean is 1/2.

    Bisection on the constant shift: the clipped mean is continuous and
    nondecreasing in the shift, hitting 0 at shift -1 and 1 at shift +1.
    This is a generator of K members, not a metric projection (the L1
    projection onto K is not unique).
    """

    def shifted(s: float) -> np.ndarray:
        return np.clip(blocks + s, 0.0, 1.0)

    lo, hi = -1.0, 1.0
    mid = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        err = float(shifted(mid).mean()) - 0.5
        if abs(err) <= 1e-13:
            break
        if err < 0:
            lo = mid
        else:
            hi = mid
    out = shifted(mid)
    if abs(float(out.mean()) - 0.5) > 1e-12:
        raise ArithmeticError("bisection failed to pin the integral at 1/2")
    return out


def _depth_of(count: int, what: str) -> int:
    if count < 1 or count & (count - 1) != 0:
        raise DomainViolation(f"{what} must be a positive power of two, got {count}")
    return count.bit_length() - 1


def sample_example_set(
    seed: int, count: int, resolution: int, storage: int | None = None
) -> FunctionFamily:
    """Random members of K = {0 <= f <= 1, integral 1/2} on a dyadic grid.

    ``resolution`` is the number of value blocks each member genuinely
    uses; ``storage`` (default equal) allocates a finer grid so the exact
    baker transform has depth to spare. Values are drawn uniformly, then
    shifted and clipped onto the integral constraint.
    """
    if count < 1:
        raise DomainViolation("count must be at least 1")
    depth = _depth_of(resolution, "resolution")
    storage_depth = depth if storage is None else _depth_of(storage, "storage")
    if storage_depth < depth:
        raise DomainViolation(f"storage 2^{storage_depth} is finer than resolution 2^{depth}?")
    rng = make_rng(seed, STREAM_FAMILY)
    partition = Partition.dyadic(storage_depth)
    members = []
    for _ in range(count):
        blocks = _fit_half_integral(rng.uniform(0.0, 1.0, size=2 ** depth))
        values = np.repeat(blocks, 2 ** (storage_depth - depth))
        members.append(GridFunction(partition, values, effective_resolution=depth))
    return FunctionFamily(
        members=tuple(members),
        label=f"K-sample(seed={seed}, n={count}, depth={depth})",
    )


def orbit_hull_scan(
    x0: GridFunction,
    steps: int,
    resolutions,
    mode: str = "exact",
    tol: float = 1e-6,
    max_iter: int = 24000,
) -> list[OrbitScanRecord]:
    """Hull geometry of baker-transform orbits across grid resolutions.

    The start function is re-rendered on each resolution's grid, iterated
    up to ``steps`` times, and the orbit's convex hull is measured. In
    exact mode small grids cut orbits short; the truncated orbit is still
    measured and the record says so, since the geometry of the points
    that do fit is exactly what a resolution trend is probing.
    """
    if steps < 1:
        raise DomainViolation("steps must be at least 1")
    if mode not in ("exact", "project"):
        raise DomainViolation(f"mode must be 'exact' or 'project', got {mode!r}")
    res_list = [int(r) for r in resolutions]
    if not res_list:
        raise DomainViolation("resolutions must be nonempty")
    depths = [_depth_of(r, "resolution") for r in res_list]
    if any(b <= a for a, b in zip(depths, depths[1:])):
        raise DomainViolation("resolutions must be strictly increasing")

    base_depth = dyadic_depth(x0.partition)
    m0 = _effective_depth(x0, base_depth)
    base_blocks = x0.values[:: 2 ** (base_depth - m0)]

    records: list[OrbitScanRecord] = []
    for res, depth in zip(res_list, depths):
        if m0 > depth:
            records.append(
                OrbitScanRecord(res, "RESOLUTION_EXHAUSTED", 0, None, None, None, None)
            )
            continue
        partition = Partition.dyadic(depth)
        x = GridFunction(
            partition, np.repeat(base_blocks, 2 ** (depth - m0)), effective_resolution=m0
        )
        orbit = [x]
        status = "OK"
        for _ in range(steps):
            try:
                x = alspach_map(x) if mode == "exact" else alspach_map_projected(x)
            except ResolutionExhausted:
                status = "RESOLUTION_EXHAUSTED"
                break
            orbit.append(x)
        if len(orbit) < 2:
            records.append(OrbitScanRecord(res, status, len(orbit), None, None, None, None))
            continue
        body = ConvexBody(generators=tuple(orbit), label=f"orbit at 2^{depth}")
        ns = normal_structure_gap(body, tol=tol, max_iter=max_iter)
        records.append(
            OrbitScanRecord(res, status, len(orbit), ns.diam, ns.rad, ns.gap, ns.ratio)
        )
    return records
