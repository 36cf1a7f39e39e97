"""Uniform-integrability diagnostics for families of grid functions.

A family is uniformly integrable when two things hold at every scale
``eps``: small sets carry little mass no matter which member you
integrate (clause i, witnessed by a ``delta``), and mass above a high
value threshold is small for every member (clause ii, witnessed by an
``M``). On a finite grid both clauses reduce to finite searches, so this
module certifies them by exhaustive greedy enumeration rather than by
estimation, and packages the outcome as a :class:`UICertificate`.

The module also builds the explicit convex gauge that upgrades the two
clauses into a single moment bound: a piecewise-linear
:class:`OrliczFunction` whose slope climbs one unit per breakpoint,
with breakpoints placed where the family's tail-measure profile drops
below ``2**-k``. The layer-cake estimate then gives a finite uniform
bound on ``integral(Phi(|f|))``, rechecked as a hard postcondition in
the tests.

Delta searches move on the grid of measures achievable as unions of
whole cells; fractional cells would need a tie-breaking convention the
underlying model does not supply. Searches that exhaust their range
return ``None``, and the certificate records the failing clause.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainViolation
from .grid_space import FunctionFamily, GridFunction, l1_norm

LADDER_CAP = 60


@dataclass(frozen=True, eq=False)
class OrliczFunction:
    """Convex piecewise-linear gauge with unit slope increments.

    The derivative is 1 on ``[0, s_1)`` and ``k`` on ``[s_k, s_+1})``
    for breakpoints ``s_1 < s_2 < ...``; beyond the last stored
    breakpoint the final slope continues. ``Phi(0) = 0`` and the
    function is continuous, so each knot value is the previous knot
    plus slope times gap.
    """

    breakpoints: tuple[float, ...]

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        if bp.size == 0:
            raise DomainViolation("an Orlicz gauge needs at least one breakpoint")
        if not np.all(bp > 0) or not np.all(np.diff(bp) > 0):
            raise DomainViolation("breakpoints must be positive and strictly increasing")
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in bp))
        knots = np.empty(bp.size)
        knots[0] = bp[0]
        for k in range(1, bp.size):
            knots[k] = knots[k - 1] + k * (bp[k] - bp[k - 1])
        bp.flags.writeable = False
        knots.flags.writeable = False
        object.__setattr__(self, "_bp", bp)
        object.__setattr__(self, "_knots", knots)

    @property
    def slopes(self) -> tuple[int, ...]:
        """Slope per linear piece, starting with the region below s_1."""
        return (1,) + tuple(range(1, len(self.breakpoints) + 1))

    def evaluate(self, t):
        """Phi(t), elementwise for arrays; t below 0 is rejected."""
        arr = np.asarray(t, dtype=float)
        if np.any(arr < 0):
            raise DomainViolation("the gauge is defined for nonnegative arguments")
        piece = np.searchsorted(self._bp, arr, side="right")
        below = piece == 0
        idx = np.maximum(piece - 1, 0)
        out = np.where(below, arr, self._knots[idx] + piece * (arr - self._bp[idx]))
        return float(out) if np.isscalar(t) else out


@dataclass(frozen=True, eq=False)
class UICertificate:
    """Per-scale witnesses for both integrability clauses plus the gauge.

    ``delta_of_eps`` and ``M_of_eps`` line up with ``eps_grid``; a None
    entry means the search range held no witness at that scale and the
    corresponding (eps, clause) appears in ``failures``.
    """

    eps_grid: tuple[float, ...]
    delta_of_eps: tuple[float | None, ...]
    M_of_eps: tuple[float | None, ...]
    orlicz: OrliczFunction | None
    orlicz_bound: float | None
    verdict: str
    failures: tuple[tuple[float, str], ...] = ()

    @property
    def passed(self) -> bool:
        return self.verdict == "UI_AT_TESTED_SCALES"


# ---------------------------------------------------------------------------
# tail and concentration searches


def tail_profile(family: FunctionFamily, t: float) -> float:
    """Worst-case measure of {|f| > t} over the family; nonincreasing in t."""
    if t < 0:
        raise DomainViolation(f"threshold must be nonnegative, got {t}")
    measures = family.partition.cell_measures
    return max(float(measures[np.abs(f.values) > t].sum()) for f in family)


def _greedy_prefixes(f: GridFunction) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative (measure, mass) along cells ordered by |value| descending.

    Prefix j of this ordering is the most mass-concentrated cell union of
    its measure, which is exactly the extremal set clause i quantifies over.
    """
    mags = np.abs(f.values)
    order = np.argsort(-mags, kind="stable")
    m = f.partition.cell_measures[order]
    return np.cumsum(m), np.cumsum(mags[order] * m)


def _concentration_at(f: GridFunction, deltas: np.ndarray) -> np.ndarray:
    """Greatest mass of |f| on a whole-cell union of measure <= each delta."""
    pm, pv = _greedy_prefixes(f)
    idx = np.searchsorted(pm, deltas, side="right")
    padded = np.concatenate(([0.0], pv))
    return padded[idx]


def absolute_continuity_delta(family: FunctionFamily, eps: float) -> float | None:
    """Largest achievable delta with every member's concentration below eps.

    Candidate deltas are the measures of greedy cell-union prefixes across
    all members (the only measures where any concentration function can
    jump). Returns None when even the smallest positive candidate fails.
    """
    if not eps > 0:
        raise DomainViolation(f"eps must be positive, got {eps}")
    candidates = np.unique(np.concatenate([_greedy_prefixes(f)[0] for f in family]))
    candidates = candidates[candidates > 0]
    worst = np.max([_concentration_at(f, candidates) for f in family], axis=0)
    admissible = candidates[worst < eps]
    return float(admissible[-1]) if admissible.size else None


def _tail_mass(f: GridFunction, thresholds: np.ndarray) -> np.ndarray:
    """Mass of |f| strictly above each threshold."""
    mags = np.abs(f.values)
    order = np.argsort(mags, kind="stable")
    sorted_mags = mags[order]
    contrib = sorted_mags * f.partition.cell_measures[order]
    suffix = np.concatenate((np.cumsum(contrib[::-1])[::-1], [0.0]))
    idx = np.searchsorted(sorted_mags, thresholds, side="right")
    return suffix[idx]


def tail_threshold(family: FunctionFamily, eps: float, cap: float | None = None) -> float | None:
    """Smallest member-value threshold M with every tail mass below eps.

    Candidates are the distinct |values| across the family, scanned in
    ascending order. Without a cap the search cannot fail (the largest
    value always has empty tail); with a cap, None reports that every
    admissible threshold was exhausted.
    """
    if not eps > 0:
        raise DomainViolation(f"eps must be positive, got {eps}")
    candidates = np.unique(np.concatenate([np.abs(f.values) for f in family]))
    if cap is not None:
        candidates = candidates[candidates <= cap]
        if candidates.size == 0:
            return None
    worst = np.max([_tail_mass(f, candidates) for f in family], axis=0)
    admissible = np.flatnonzero(worst < eps)
    return float(candidates[admissible[0]]) if admissible.size else None


# ---------------------------------------------------------------------------
# the de la Vallee-Poussin style gauge


def build_orlicz(family: FunctionFamily) -> OrliczFunction:
    """Place breakpoints where the family tail profile drops below 2**-k.

    Step k finds t_k, the smallest member |value| with tail profile at most
    2**-k, then sets s_k = max(t_k, s_{k-1} + 2**-2k) so the ladder strictly
    increases while keeping tail_profile(s_k) <= 2**-k (the profile is
    nonincreasing). The ladder stops once the profile hits zero, where
    further rungs would multiply empty tails, or at a fixed cap.
    """
    values = np.unique(np.concatenate([np.abs(f.values) for f in family]))
    profile = np.max([_measure_above(f, values) for f in family], axis=0)
    breakpoints: list[float] = []
    prev = 0.0
    for k in range(1, LADDER_CAP + 1):
        idx = int(np.argmax(profile <= 2.0 ** (-k)))
        s_k = max(float(values[idx]), prev + 4.0 ** (-k))
        breakpoints.append(s_k)
        if profile[idx] == 0.0:
            break
        prev = s_k
    return OrliczFunction(breakpoints=tuple(breakpoints))


def _measure_above(f: GridFunction, thresholds: np.ndarray) -> np.ndarray:
    """Measure of {|f| > t} for each threshold, via one sort."""
    mags = np.abs(f.values)
    order = np.argsort(mags, kind="stable")
    sorted_mags = mags[order]
    meas = f.partition.cell_measures[order]
    suffix = np.concatenate((np.cumsum(meas[::-1])[::-1], [0.0]))
    return suffix[np.searchsorted(sorted_mags, thresholds, side="right")]


def orlicz_integral(phi: OrliczFunction, f: GridFunction) -> float:
    """Integral of Phi(|f|) over the partition."""
    return float(phi.evaluate(np.abs(f.values)) @ f.partition.cell_measures)


def layer_cake_bound(phi: OrliczFunction, family: FunctionFamily) -> float:
    """Uniform upper bound on the gauge integrals of the family.

    Slicing Phi(|f|) by level sets gives the worst member norm for the
    unit-slope region, plus k * (s_{k+1} - s_k) * 2**-k per ladder rung
    (the tail measure above s_k is capped at 2**-k by construction), plus
    a final-slope term for mass above the last rung. That last term is
    zero whenever the ladder terminated because the tail profile vanished,
    which is every case except a ladder stopped at the hard cap.
    """
    bp = np.asarray(phi.breakpoints)
    top_slope = bp.size
    gaps = np.diff(bp)
    rungs = float(np.sum(np.arange(1, bp.size) * gaps * 2.0 ** (-np.arange(1, bp.size))))
    max_norm = max(l1_norm(f) for f in family)
    overflow = max(
        float(np.clip(np.abs(f.values) - bp[-1], 0.0, None) @ f.partition.cell_measures)
        for f in family
    )
    return max_norm + rungs + top_slope * overflow


# ---------------------------------------------------------------------------
# stability transforms


def family_scale(family: FunctionFamily, a: float) -> FunctionFamily:
    """Members multiplied by a positive constant."""
    if not a > 0:
        raise DomainViolation(f"scale factor must be positive, got {a}")
    return FunctionFamily(
        members=tuple(a * f for f in family),
        label=f"{a:g}*{family.label or 'family'}",
    )


def family_difference(family: FunctionFamily) -> FunctionFamily:
    """All ordered member differences, value-deduplicated, zero kept once.

    The diagonal contributes the zero function, so a singleton family maps
    to {0} and an n-member family to at most n*(n-1)+1 members.
    """
    members: list[GridFunction] = []
    seen: set[bytes] = set()
    for f in family:
        for g in family:
            diff = f - g
            key = diff.values.tobytes()
            if key not in seen:
                seen.add(key)
                members.append(diff)
    return FunctionFamily(
        members=tuple(members),
        label=f"differences of {family.label or 'family'}",
    )


# ---------------------------------------------------------------------------
# certificate assembly


def ui_certificate(
    family: FunctionFamily,
    eps_grid,
    m_cap: float | None = None,
) -> UICertificate:
    """Run both clause searches on each scale and attach the gauge bound.

    ``m_cap`` restricts the threshold search for clause ii, which is how a
    genuinely non-integrable escaping family can be made to show a FAILED
    verdict on a finite grid (uncapped, finite grids always pass clause ii).
    """
    eps_values = tuple(float(e) for e in eps_grid)
    if not eps_values:
        raise DomainViolation("eps grid must be nonempty")
    if any(e <= 0 for e in eps_values):
        raise DomainViolation("eps grid entries must be positive")

    deltas = []
    thresholds = []
    failures: list[tuple[float, str]] = []
    for eps in eps_values:
        delta = absolute_continuity_delta(family, eps)
        deltas.append(delta)
        if delta is None:
            failures.append((eps, "clause i"))
        threshold = tail_threshold(family, eps, cap=m_cap)
        thresholds.append(threshold)
        if threshold is None:
            failures.append((eps, "clause ii"))

    phi = build_orlicz(family)
    bound = layer_cake_bound(phi, family)
    if failures:
        clauses = sorted({clause for _, clause in failures})
        verdict = "FAILED: " + " and ".join(clauses)
    else:
        verdict = "UI_AT_TESTED_SCALES"
    return UICertificate(
        eps_grid=eps_values,
        delta_of_eps=tuple(deltas),
        M_of_eps=tuple(thresholds),
        orlicz=phi,
        orlicz_bound=bound,
        verdict=verdict,
        failures=tuple(failures),
    )
