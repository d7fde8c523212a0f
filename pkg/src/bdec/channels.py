"""
Erasure, stuck-at defect and combined channel models.

Defect states are int8 arrays: 0 and 1 for cells stuck at that value,
``NORMAL`` (-1) for working cells. Channel outputs with erasures are int8
arrays with ``ERASED`` (-1) in erased positions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORMAL = -1
ERASED = -1


@dataclass(frozen=True)
class ChannelParams:
    alpha: float = 0.0  # erasure probability of normal cells
    beta: float = 0.0  # defect probability

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    @property
    def capacity_bec(self) -> float:
        return 1.0 - self.alpha

    @property
    def capacity_bdc(self) -> float:
        return 1.0 - self.beta

    @property
    def capacity_bdec(self) -> float:
        return (1.0 - self.alpha) * (1.0 - self.beta)

    @property
    def erasure_mass(self) -> float:
        """Expected erased fraction in the combined channel: alpha * (1 - beta)."""
        return self.alpha * (1.0 - self.beta)


def sample_defects(n: int, beta: float, rng) -> np.ndarray:
    """Each cell independently stuck with probability beta, stuck value uniform."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    rng = np.random.default_rng(rng)
    defective = rng.random(n) < beta
    stuck = rng.integers(0, 2, size=n, dtype=np.int8)
    return np.where(defective, stuck, np.int8(NORMAL)).astype(np.int8)


def defect_positions(s) -> np.ndarray:
    return np.flatnonzero(np.asarray(s) != NORMAL)


def apply_circ(x, s) -> np.ndarray:
    """Cell-wise write: stuck cells output their stuck value, normal cells pass x."""
    x = np.asarray(x, dtype=np.uint8)
    s = np.asarray(s, dtype=np.int8)
    if x.shape != s.shape:
        raise ValueError(f"length mismatch: x has {x.shape}, state has {s.shape}")
    return np.where(s == NORMAL, x, s).astype(np.uint8)


def count_defect_errors(x, s) -> int:
    """Number of stuck cells whose stuck value differs from x."""
    x = np.asarray(x, dtype=np.uint8)
    s = np.asarray(s, dtype=np.int8)
    if x.shape != s.shape:
        raise ValueError(f"length mismatch: x has {x.shape}, state has {s.shape}")
    stuck = s != NORMAL
    return int(np.count_nonzero(x[stuck] != s[stuck]))


def apply_erasures(y, alpha: float, rng, protect=None) -> np.ndarray:
    """Erase each unprotected position independently with probability alpha.

    ``protect`` is an index array or boolean mask of positions that are never
    erased; the combined channel protects its defect cells.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    rng = np.random.default_rng(rng)
    y = np.asarray(y)
    erase = rng.random(y.shape[0]) < alpha
    if protect is not None:
        protect = np.asarray(protect)
        if protect.dtype == bool:
            erase &= ~protect
        else:
            erase[protect] = False
    return np.where(erase, np.int8(ERASED), y.astype(np.int8)).astype(np.int8)


def erased_positions(y) -> np.ndarray:
    return np.flatnonzero(np.asarray(y) == ERASED)


def unerased_positions(y) -> np.ndarray:
    return np.flatnonzero(np.asarray(y) != ERASED)
