"""Named function families used by experiments and diagnostics.

These builders pin down the recurring test subjects: the escaping spike
family whose mass concentrates near the origin, the two half-interval
indicators whose differences have disjoint supports, and a family
dominated by a bounded envelope (hence uniformly integrable at any
scale a finite grid can test).
"""

from __future__ import annotations

import numpy as np

from .errors import DomainViolation
from .grid_space import FunctionFamily, GridFunction, Partition
from .rng import STREAM_FAMILY, make_rng


def spike_partition(n_max: int) -> Partition:
    """[0,1] split at 1/k for k = n_max..2, plus the stub [0, 1/n_max].

    Every interval [0, 1/n] with n <= n_max is then a union of whole
    cells, so the spike members are exactly representable.
    """
    if n_max < 1:
        raise DomainViolation("n_max must be at least 1")
    edges = [0.0] + [1.0 / k for k in range(n_max, 0, -1)]
    return Partition.single_window(np.diff(edges))


def spike_family(n_max: int = 64) -> FunctionFamily:
    """Members n * indicator([0, 1/n]) for n = 1..n_max: unit mass escaping to a shrinking set."""
    partition = spike_partition(n_max)
    edges = np.concatenate(([0.0], np.cumsum(partition.cell_measures)))
    members = []
    for n in range(1, n_max + 1):
        # Cells covering [0, 1/n]: right edge at most 1/n (up to rounding).
        values = np.where(edges[1:] <= 1.0 / n + 1e-12, float(n), 0.0)
        members.append(GridFunction(partition, values))
    return FunctionFamily(members=tuple(members), label=f"spikes(n_max={n_max})")


def half_indicator_family() -> FunctionFamily:
    """{0, indicator of [0,1/2], indicator of (1/2,1]} on a two-cell grid."""
    partition = Partition.dyadic(1)
    zero = GridFunction(partition, [0.0, 0.0])
    left = GridFunction(partition, [1.0, 0.0])
    right = GridFunction(partition, [0.0, 1.0])
    return FunctionFamily(members=(zero, left, right), label="half indicators")


def dominated_family(
    seed: int, cells: int = 256, count: int = 12, bound: float = 2.0
) -> FunctionFamily:
    """Random members with |f| <= bound everywhere on a uniform grid.

    The constant envelope is integrable, so the family passes both
    integrability clauses at any scale the cell size can resolve.
    """
    if cells < 1 or count < 1:
        raise DomainViolation("cells and count must be at least 1")
    if not bound > 0:
        raise DomainViolation("bound must be positive")
    rng = make_rng(seed, STREAM_FAMILY)
    partition = Partition.uniform(cells)
    members = tuple(
        GridFunction(partition, rng.uniform(-bound, bound, size=cells)) for _ in range(count)
    )
    return FunctionFamily(members=members, label=f"dominated(|f|<={bound:g})")
