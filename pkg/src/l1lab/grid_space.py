"""Piecewise-constant functions on finite measured partitions.

The space under study is a finite list of *windows*, each carved into
finitely many cells of positive measure. A :class:`GridFunction` assigns
one real value per cell, so every function is simple and every integral
is a finite weighted sum. Cell indexing is global: window 0's cells come
first, then window 1's, and so on.

Windows play the role of a sigma-finite decomposition: metrics that only
care about local behaviour (:func:`local_measure_distance`) weight window
``m`` by ``2**-m`` so that far windows contribute little, while norms
(:func:`l1_norm`) see all cells equally.

Nothing here interpolates. All operations are exact on the
piecewise-constant class, which is what makes the sorting-based metric
computations below exact rather than approximate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import DomainViolation, PartitionMismatch


def _readonly(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Partition:
    """Finite windows, each split into cells of positive measure.

    ``windows`` is a tuple of 1-d arrays; entry ``windows[m][c]`` is the
    measure of cell ``c`` inside window ``m``. Total measure is finite by
    construction. Partitions compare equal when their window structure and
    cell measures match exactly.
    """

    windows: tuple[np.ndarray, ...]

    def __post_init__(self):
        if not self.windows:
            raise DomainViolation("a partition needs at least one window")
        wins = []
        for i, w in enumerate(self.windows):
            arr = _readonly(w)
            if arr.ndim != 1 or arr.size == 0:
                raise DomainViolation(f"window {i} must be a nonempty 1-d list of cell measures")
            if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
                raise DomainViolation(f"window {i} has nonpositive or nonfinite cell measures")
            wins.append(arr)
        object.__setattr__(self, "windows", tuple(wins))
        offsets = np.zeros(len(wins) + 1, dtype=np.int64)
        np.cumsum([w.size for w in wins], out=offsets[1:])
        offsets.flags.writeable = False
        object.__setattr__(self, "_offsets", offsets)
        object.__setattr__(self, "_cells", _readonly(np.concatenate(wins)))

    # -- constructors -------------------------------------------------

    @classmethod
    def single_window(cls, cell_measures) -> "Partition":
        return cls(windows=(np.asarray(cell_measures, dtype=float),))

    @classmethod
    def uniform(cls, cells: int, total: float = 1.0) -> "Partition":
        """One window of `cells` equal cells with the given total measure."""
        if cells < 1:
            raise DomainViolation("cell count must be >= 1")
        return cls.single_window(np.full(cells, total / cells))

    @classmethod
    def dyadic(cls, depth: int) -> "Partition":
        """One window modelling [0,1] split into 2**depth equal cells."""
        if depth < 0:
            raise DomainViolation("dyadic depth must be >= 0")
        return cls.single_window(np.full(2 ** depth, 2.0 ** (-depth)))

    # -- structure ----------------------------------------------------

    @property
    def window_count(self) -> int:
        return len(self.windows)

    @property
    def cell_count(self) -> int:
        return int(self._offsets[-1])

    @property
    def cell_measures(self) -> np.ndarray:
        """All cell measures in global order (read-only view)."""
        return self._cells

    @property
    def total_measure(self) -> float:
        return float(self._cells.sum())

    def window_slice(self, window_index: int) -> slice:
        """Global-index slice covering one window's cells."""
        if not 0 <= window_index < self.window_count:
            raise IndexError(f"window index {window_index} out of range (have {self.window_count})")
        return slice(int(self._offsets[window_index]), int(self._offsets[window_index + 1]))

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Partition):
            return NotImplemented
        return len(self.windows) == len(other.windows) and all(
            a.size == b.size and np.array_equal(a, b)
            for a, b in zip(self.windows, other.windows)
        )

    def __repr__(self) -> str:
        sizes = ",".join(str(w.size) for w in self.windows)
        return f"Partition(windows={self.window_count}, cells=[{sizes}], total={self.total_measure:g})"


def _require_shared(f: "GridFunction", g: "GridFunction") -> Partition:
    if f.partition is not g.partition and f.partition != g.partition:
        raise PartitionMismatch("grid functions live on different partitions")
    return f.partition


def dyadic_depth(partition: Partition) -> int:
    """Depth M of a single-window, 2**M equal-cell partition; raises otherwise."""
    if partition.window_count != 1:
        raise DomainViolation("dyadic structure needs a single-window partition")
    m = partition.windows[0]
    n = m.size
    if n & (n - 1) != 0:
        raise DomainViolation(f"cell count {n} is not a power of two")
    if not np.all(m == m[0]):
        raise DomainViolation("dyadic structure needs equal cell measures")
    return n.bit_length() - 1


@dataclass(frozen=True, eq=False)
class GridFunction:
    """One real value per cell of a partition.

    ``effective_resolution`` is an optional annotation for functions on
    dyadic grids: when set to ``m``, the values are constant on blocks of
    ``2**(M-m)`` consecutive cells (width ``2**-m`` on the unit interval),
    i.e. the function genuinely lives at depth ``m`` even though it is
    stored at depth ``M``. The constructor verifies this.
    """

    partition: Partition
    values: np.ndarray
    effective_resolution: int | None = None

    def __post_init__(self):
        vals = _readonly(self.values)
        if vals.ndim != 1 or vals.size != self.partition.cell_count:
            raise DomainViolation(
                f"expected {self.partition.cell_count} values, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise DomainViolation("grid function values must be finite")
        object.__setattr__(self, "values", vals)
        if self.effective_resolution is not None:
            m = int(self.effective_resolution)
            depth = dyadic_depth(self.partition)
            if not 0 <= m <= depth:
                raise DomainViolation(
                    f"effective resolution {m} outside [0, {depth}] for this grid"
                )
            blocks = vals.reshape(2 ** m, -1)
            if not np.all(blocks == blocks[:, :1]):
                raise DomainViolation(
                    f"values are not constant on the {2 ** m} blocks claimed by effective resolution {m}"
                )
            object.__setattr__(self, "effective_resolution", m)

    def with_values(self, values, effective_resolution: int | None = None) -> "GridFunction":
        return GridFunction(self.partition, values, effective_resolution)

    # Arithmetic stays inside the piecewise-constant class, so it is
    # defined pointwise on values. Resolution annotations survive where
    # the block structure provably does.

    def _combine_res(self, other: "GridFunction") -> int | None:
        if self.effective_resolution is None or other.effective_resolution is None:
            return None
        return max(self.effective_resolution, other.effective_resolution)

    def __add__(self, other):
        if not isinstance(other, GridFunction):
            return NotImplemented
        _require_shared(self, other)
        return GridFunction(self.partition, self.values + other.values, self._combine_res(other))

    def __sub__(self, other):
        if not isinstance(other, GridFunction):
            return NotImplemented
        _require_shared(self, other)
        return GridFunction(self.partition, self.values - other.values, self._combine_res(other))

    def __neg__(self):
        return GridFunction(self.partition, -self.values, self.effective_resolution)

    def __mul__(self, scalar):
        if not isinstance(scalar, (int, float, np.floating, np.integer)):
            return NotImplemented
        return GridFunction(self.partition, self.values * float(scalar), self.effective_resolution)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        res = "" if self.effective_resolution is None else f", res={self.effective_resolution}"
        return f"GridFunction(cells={self.values.size}, l1={l1_norm(self):.6g}{res})"


@dataclass(frozen=True, eq=False)
class FunctionFamily:
    """An indexed collection of grid functions on one shared partition."""

    members: tuple[GridFunction, ...]
    label: str = ""

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise DomainViolation("a function family needs at least one member")
        base = members[0].partition
        for i, f in enumerate(members[1:], start=1):
            if f.partition is not base and f.partition != base:
                raise PartitionMismatch(f"family member {i} uses a different partition")
        object.__setattr__(self, "members", members)

    @property
    def partition(self) -> Partition:
        return self.members[0].partition

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[GridFunction]:
        return iter(self.members)

    def __getitem__(self, i: int) -> GridFunction:
        return self.members[i]

    def __repr__(self) -> str:
        return f"FunctionFamily({self.label!r}, n={len(self.members)})"


# ---------------------------------------------------------------------------
# norms and metrics


def l1_norm(f: GridFunction) -> float:
    """Integral of |f| over all windows."""
    return float(np.abs(f.values) @ f.partition.cell_measures)


def ky_fan_distance(f: GridFunction, g: GridFunction, window_index: int) -> float:
    """Smallest eps with mu(|f-g| > eps) <= eps, restricted to one window.

    Exact on grids: the distribution function of |f-g| is a step function
    whose jumps sit at the distinct difference values, so scanning the
    segments between consecutive jumps (in ascending eps order) finds the
    first feasible eps without any root-finding.
    """
    p = _require_shared(f, g)
    sl = p.window_slice(window_index)
    diff = np.abs(f.values[sl] - g.values[sl])
    measures = p.windows[window_index]

    levels, inverse = np.unique(diff, return_inverse=True)
    mass_at = np.zeros(levels.size)
    np.add.at(mass_at, inverse, measures)
    # above[i] = mu(|f-g| >= levels[i]); suffix sums over the level masses.
    above = np.cumsum(mass_at[::-1])[::-1]

    positive = levels > 0
    pos_levels = levels[positive]
    pos_above = above[positive]
    if pos_levels.size == 0:
        return 0.0

    # Segment [lo, hi) in eps on which mu(|f-g| > eps) is constant:
    # below the smallest positive level the measure is pos_above[0], and
    # between consecutive levels it is the mass strictly above the lower one.
    lows = np.concatenate(([0.0], pos_levels))
    highs = np.concatenate((pos_levels, [np.inf]))
    masses = np.concatenate((pos_above, [0.0]))
    for lo, hi, mass in zip(lows, highs, masses):
        candidate = max(lo, mass)
        if candidate < hi:
            return float(candidate)
    # Unreachable: the final segment has mass 0, so lo always qualifies.
    raise AssertionError("segment scan found no feasible eps")


def local_measure_distance(f: GridFunction, g: GridFunction) -> float:
    """Window-weighted combination of Ky Fan distances, a metric on the grid.

    Window m (1-based) contributes 2**-m * min(1, ky_fan_distance in m), so
    the sum converges for any window count and two functions are at distance
    zero exactly when they agree everywhere.
    """
    p = _require_shared(f, g)
    total = 0.0
    for m in range(p.window_count):
        total += 2.0 ** (-(m + 1)) * min(1.0, ky_fan_distance(f, g, m))
    return total


def truncate(f: GridFunction, level: float) -> GridFunction:
    """Clamp |f| at the given positive level, keeping signs."""
    if not level > 0:
        raise DomainViolation(f"truncation level must be positive, got {level}")
    clipped = np.sign(f.values) * np.minimum(np.abs(f.values), level)
    return f.with_values(clipped, f.effective_resolution)


def rearrange_decreasing(f: GridFunction) -> list[tuple[float, float]]:
    """(|value|, measure) pairs sorted by |value| descending, ties by cell index."""
    mags = np.abs(f.values)
    order = np.argsort(-mags, kind="stable")
    measures = f.partition.cell_measures
    return [(float(mags[i]), float(measures[i])) for i in order]


# ---------------------------------------------------------------------------
# almost-uniform convergence and measure-Cauchy extraction


@dataclass(frozen=True)
class EgorovResult:
    """Outcome of carving out a small bad set for near-uniform convergence.

    ``cells`` are window-local indices of the removed set N, ``removed_measure``
    is mu(N), and ``defect`` is the worst per-cell deviation sup_n |f_n - limit|
    over the cells that remain.
    """

    cells: tuple[int, ...]
    removed_measure: float
    defect: float


def egorov_bad_set(
    sequence: Sequence[GridFunction],
    limit: GridFunction,
    window_index: int,
    eps: float,
    tail_start: int = 0,
) -> EgorovResult:
    """Greedily remove worst cells of one window under a strict measure budget.

    Cells are ranked by their convergence defect sup_{n >= tail_start}
    |f_n - limit| (ties broken by cell index) and removed while the removed
    measure stays strictly below ``eps``. The scan stops at the first cell
    that does not fit: removing cells with smaller defects could not lower
    the reported sup anyway.
    """
    if not eps > 0:
        raise DomainViolation(f"eps must be positive, got {eps}")
    if not sequence:
        raise DomainViolation("sequence must be nonempty")
    if not 0 <= tail_start < len(sequence):
        raise DomainViolation(f"tail_start {tail_start} outside sequence of length {len(sequence)}")
    p = limit.partition
    for f in sequence:
        _require_shared(f, limit)
    sl = p.window_slice(window_index)
    tail = np.stack([f.values[sl] for f in sequence[tail_start:]])
    defects = np.max(np.abs(tail - limit.values[sl]), axis=0)
    measures = p.windows[window_index]

    order = np.argsort(-defects, kind="stable")
    chosen: list[int] = []
    removed = 0.0
    for c in order:
        if defects[c] == 0.0:
            break
        if removed + measures[c] < eps:
            chosen.append(int(c))
            removed += float(measures[c])
        else:
            break
    keep_mask = np.ones(defects.size, dtype=bool)
    keep_mask[chosen] = False
    residual = float(defects[keep_mask].max()) if keep_mask.any() else 0.0
    return EgorovResult(cells=tuple(sorted(chosen)), removed_measure=removed, defect=residual)


def extract_measure_cauchy_subsequence(
    sequence: Sequence[GridFunction], tol: float
) -> list[int]:
    """Indices of a subsequence whose members pairwise sit within tol locally.

    Works cell by cell: the surviving members' values in a cell are binned
    at width tol/2 and only the most populated bin is kept (ties go to the
    lowest bin). Two members sharing every bin differ by less than tol/2 in
    sup norm, hence in every Ky Fan distance, hence their window-weighted
    distance stays below tol. Sweeping cells window by window is the finite
    version of a diagonal argument, and at least one member always survives.
    """
    if not tol > 0:
        raise DomainViolation(f"tol must be positive, got {tol}")
    if not sequence:
        raise DomainViolation("sequence must be nonempty")
    base = sequence[0]
    for f in sequence[1:]:
        _require_shared(f, base)
    width = tol / 2.0
    alive = np.arange(len(sequence))
    all_values = np.stack([f.values for f in sequence])
    for c in range(base.partition.cell_count):
        if alive.size == 1:
            break
        col = all_values[alive, c]
        bins = np.floor((col - col.min()) / width)
        ids, counts = np.unique(bins, return_counts=True)
        best = ids[np.argmax(counts)]  # argmax takes the first, i.e. lowest, bin on ties
        alive = alive[bins == best]
    return [int(i) for i in alive]
