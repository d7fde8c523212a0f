"""
Splitting n - k parity bits between defect masking (l) and erasure
correction (r) by minimizing the finite-length failure bound

    f(l, r) = 2^-l (1 + beta)^n + 2^-r {1 + alpha (1 - beta)}^n,   l + r = n - k.

A channel without defects (beta = 0) never fails to mask and a channel
without erasures (alpha = 0) never fails to decode, so the corresponding
term is dropped from the objective in those cases; otherwise the bound's
``2^-l`` floor would pull redundancy toward a failure mode that cannot occur.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .bounds import log2_erasure_term, log2_masking_term
from .codes import pbch_distances


class Regime(enum.Enum):
    ALL_ERASURE = "AllErasure"
    ALL_DEFECT = "AllDefect"
    INTERIOR = "Interior"


@dataclass(frozen=True)
class AllocationCandidate:
    l: int  # noqa: E741
    r: int
    d0: int | None = None
    d1: int | None = None
    objective: float | None = None  # log2 of the objective

    def with_objective(self, log2_obj: float) -> "AllocationCandidate":
        return AllocationCandidate(self.l, self.r, self.d0, self.d1, log2_obj)


@dataclass(frozen=True)
class AllocationSolution:
    l_hat: int
    r_hat: int
    l_tilde: float
    r_tilde: float
    regime: Regime
    candidates: tuple[AllocationCandidate, ...] = ()


def log2_objective(n: int, l: float, r: float, alpha: float, beta: float) -> float:
    """log2 of the allocation objective, with impossible failure modes dropped."""
    terms = []
    if beta > 0:
        terms.append(log2_masking_term(n, l, beta))
    if alpha > 0:
        terms.append(log2_erasure_term(n, r, alpha, beta))
    if not terms:
        return -math.inf
    return float(np.logaddexp2.reduce(terms)) if len(terms) > 1 else terms[0]


def candidate_table_1023() -> list[AllocationCandidate]:
    """The eleven [1023, 923, l] PBCH splits, l = 0, 10, ..., 100."""
    out = []
    for l in range(0, 101, 10):  # noqa: E741
        info = pbch_distances(1023, 923, l)
        out.append(AllocationCandidate(l, info["r"], info["d0"], info["d1"]))
    return out


def integer_candidates(n: int, k: int) -> list[AllocationCandidate]:
    return [AllocationCandidate(l, n - k - l) for l in range(n - k + 1)]  # noqa: E741


def allocate_discrete(candidates, n: int, alpha: float, beta: float) -> AllocationCandidate:
    """Candidate with the smallest objective; ties go to the larger l."""
    candidates = list(candidates)
    if not candidates:
        raise ValueError("no allocation candidates given")
    total = {c.l + c.r for c in candidates}
    if len(total) != 1:
        raise ValueError("candidates must share l + r = n - k")
    scored = [c.with_objective(log2_objective(n, c.l, c.r, alpha, beta)) for c in candidates]
    return min(scored, key=lambda c: (c.objective, -c.l))


def allocate_kkt(n: int, k: int, alpha: float, beta: float) -> tuple[float, float, Regime]:
    """Real-valued minimizer (l~, r~) and which KKT case produced it."""
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    budget = n - k
    if beta == 0:
        return 0.0, float(budget), Regime.ALL_ERASURE
    if alpha == 0:
        return float(budget), 0.0, Regime.ALL_DEFECT
    a = n * math.log2(1.0 + beta)
    b = n * math.log2(1.0 + alpha * (1.0 - beta))
    # both boundary tests compare 2^-l A with 2^-r B at the corner
    if a <= b - budget:
        return 0.0, float(budget), Regime.ALL_ERASURE
    if a - budget >= b:
        return float(budget), 0.0, Regime.ALL_DEFECT
    ratio = math.log2((1.0 + beta) / (1.0 + alpha * (1.0 - beta)))
    l_t = 0.5 * (n * (1.0 + ratio) - k)
    r_t = 0.5 * (n * (1.0 - ratio) - k)
    return l_t, r_t, Regime.INTERIOR


def allocate(n: int, k: int, alpha: float, beta: float, candidates=None) -> AllocationSolution:
    """Discrete and continuous allocations side by side.

    ``candidates`` defaults to the PBCH table when (n, k) = (1023, 923) and to
    every integer split otherwise.
    """
    if candidates is None:
        candidates = candidate_table_1023() if (n, k) == (1023, 923) else integer_candidates(n, k)
    best = allocate_discrete(candidates, n, alpha, beta)
    l_t, r_t, regime = allocate_kkt(n, k, alpha, beta)
    scored = tuple(c.with_objective(log2_objective(n, c.l, c.r, alpha, beta)) for c in candidates)
    return AllocationSolution(best.l, best.r, l_t, r_t, regime, scored)
