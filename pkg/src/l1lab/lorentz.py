"""The Lorentz (p,1) norm on finite real sequences.

The norm weights the decreasing rearrangement of absolute values by
n ** (1/p - 1): the largest entry counts fully, later entries count
less. Sequences are plain 1-d arrays or lists; trailing zeros never
change the value, so finite inputs stand in for eventually-zero
sequences without any wrapper type.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainViolation


def _weights(n: int, p: float) -> np.ndarray:
    return np.arange(1, n + 1, dtype=float) ** (1.0 / p - 1.0)


def lorentz_p1_norm(x, p: float) -> float:
    """Weighted sum over the decreasing rearrangement of |x|."""
    if not p > 1:
        raise DomainViolation(f"p must exceed 1, got {p}")
    arr = np.abs(np.asarray(x, dtype=float).ravel())
    arr = np.sort(arr)[::-1]
    arr = arr[arr > 0]
    if arr.size == 0:
        return 0.0
    return float(_weights(arr.size, p) @ arr)


def lorentz_norm_table(k_max: int, p: float) -> list[float]:
    """Norms of the all-ones vectors of length 1..k_max; strictly increasing."""
    if k_max < 1:
        raise DomainViolation(f"k_max must be at least 1, got {k_max}")
    if not p > 1:
        raise DomainViolation(f"p must exceed 1, got {p}")
    return [float(v) for v in np.cumsum(_weights(k_max, p))]
