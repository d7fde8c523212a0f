"""
Closed-form failure probabilities and their finite-length bounds.

Everything is evaluated in the log domain: terms like C(1023, 500) overflow
a double long before the probabilities they feed do.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .channels import ChannelParams
from .codes import WeightDistribution


class BoundKind(enum.Enum):
    ZERO = "Zero"
    EXACT = "Exact"
    UPPER = "Upper"


@dataclass(frozen=True)
class BoundValue:
    kind: BoundKind
    value: float

    def __post_init__(self):
        if self.kind is BoundKind.ZERO and self.value != 0.0:
            raise ValueError("Zero bound must carry value 0")
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"bound value {self.value} outside [0, 1]")


def log_comb(n: int, k: int) -> float:
    """Natural log of C(n, k); -inf outside the support."""
    if k < 0 or k > n:
        return -math.inf
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _logsumexp(logs) -> float:
    logs = [x for x in logs if x != -math.inf]
    if not logs:
        return -math.inf
    top = max(logs)
    return top + math.log(math.fsum(math.exp(x - top) for x in logs))


def covering_fraction(n: int, wd: WeightDistribution, d: int, e: int) -> float:
    """sum_{w=d}^{e} A_w C(n-w, e-w) / C(n, e), the union-bound count of
    e-sets that contain the support of a nonzero codeword."""
    lo = max(d, 1)
    logs = []
    for w in range(lo, e + 1):
        a = wd[w]
        if a > 0:
            logs.append(math.log(a) + log_comb(n - w, e - w))
    return math.exp(_logsumexp(logs) - log_comb(n, e)) if logs else 0.0


def _profile(n: int, wd: WeightDistribution, d: int, e: int) -> BoundValue:
    if not 0 <= e <= n:
        raise ValueError(f"count {e} outside [0, {n}]")
    if e == 0 or e < d:
        return BoundValue(BoundKind.ZERO, 0.0)
    frac = covering_fraction(n, wd, d, e)
    t = (d - 1) // 2
    if d >= 1 and e <= d + t:
        return BoundValue(BoundKind.EXACT, min(1.0, 0.5 * frac))
    return BoundValue(BoundKind.UPPER, min(1.0, frac))


def bec_failure_profile(n: int, wd: WeightDistribution, d_min: int, e: int) -> BoundValue:
    """P(D = 0 | e erasures): zero below d_min, exact in [d_min, d_min + t], else an upper bound."""
    return _profile(n, wd, d_min, e)


def bdc_failure_profile(n: int, wd_dual: WeightDistribution, d0: int, u: int) -> BoundValue:
    """P(M = 0 | u defects) from the weight distribution of the masking dual.

    ``d0 = 0`` (no masking parity) has an empty exact window.
    """
    return _profile(n, wd_dual, d0, u)


@dataclass(frozen=True)
class FiniteBound:
    masking_term: float  # 2^-l (1 + beta)^n
    erasure_term: float  # 2^-r (1 + alpha (1 - beta))^n
    log2_value: float

    @property
    def value(self) -> float:
        """Unclamped bound; may exceed 1."""
        return self.masking_term + self.erasure_term

    @property
    def clamped(self) -> float:
        return min(1.0, self.value)


def _pow2(x: float) -> float:
    return 2.0**x if x < 1024 else math.inf


def log2_masking_term(n: int, l: float, beta: float) -> float:
    return -l + n * math.log2(1.0 + beta)


def log2_erasure_term(n: int, r: float, alpha: float, beta: float = 0.0) -> float:
    return -r + n * math.log2(1.0 + alpha * (1.0 - beta))


def bdec_finite_bound(n: int, k: int, l: int, r: int, alpha: float, beta: float) -> FiniteBound:
    """2^-l (1+beta)^n + 2^-r {1 + alpha (1-beta)}^n."""
    if l + r != n - k:
        raise ValueError(f"need l + r = n - k, got l={l}, r={r}, n-k={n - k}")
    ChannelParams(alpha, beta)
    a = log2_masking_term(n, l, beta)
    b = log2_erasure_term(n, r, alpha, beta)
    return FiniteBound(_pow2(a), _pow2(b), float(np.logaddexp2(a, b)))


def bec_finite_bound(n: int, r: int, alpha: float) -> float:
    return _pow2(log2_erasure_term(n, r, alpha))


def bdc_finite_bound(n: int, l: int, beta: float) -> float:
    return _pow2(log2_masking_term(n, l, beta))


def bec_log2_bound(n: int, rate: float, alpha: float) -> float:
    """n {R - 1 + log2(1 + alpha)}."""
    return n * (rate - 1.0 + math.log2(1.0 + alpha))


def bdc_log2_bound(n: int, rate: float, beta: float) -> float:
    return n * (rate - 1.0 + math.log2(1.0 + beta))


def zero_crossing_rate(p: float) -> float:
    """Rate at which the log-form bound crosses zero: 1 - log2(1 + p)."""
    return 1.0 - math.log2(1.0 + p)


@dataclass(frozen=True)
class RankDeficiency:
    exact: float
    approx: float


def rank_deficiency_prob(rows: int, cols: int) -> RankDeficiency:
    """P(uniform rows x cols binary matrix has rank < min(rows, cols)).

    ``exact`` is 1 - prod_{i<min} (1 - 2^(i - max)); ``approx`` is the
    simpler 2^(min - max) figure.
    """
    lo, hi = min(rows, cols), max(rows, cols)
    log_full = math.fsum(math.log1p(-(2.0 ** (i - hi))) for i in range(lo))
    return RankDeficiency(-math.expm1(log_full), 2.0 ** (lo - hi))


def capacity(params: ChannelParams, channel: str) -> float:
    channel = channel.lower()
    if channel == "bec":
        return params.capacity_bec
    if channel == "bdc":
        return params.capacity_bdc
    if channel == "bdec":
        return params.capacity_bdec
    raise ValueError(f"unknown channel {channel!r}")
