"""
Linear codes, narrow-sense binary BCH codes and partitioned linear block codes.

A :class:`LinearCode` is the pair (G, H) with ``H.T @ G = 0``. A
:class:`PartitionedCode` adds a masking part: codewords are
``G1 @ m + G0 @ d`` and ``H0`` is the message inverse (``H0.T @ G1 = I``,
``H0.T @ G0 = 0``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from . import gf2

# Conway/Lin-Costello primitive polynomials, bit i = coefficient of x^i
PRIMITIVE_POLYS = {
    3: 0b1011,  # x^3 + x + 1
    4: 0b10011,  # x^4 + x + 1
    5: 0b100101,  # x^5 + x^2 + 1
    6: 0b1000011,  # x^6 + x + 1
    7: 0b10001001,  # x^7 + x^3 + 1
    8: 0b100011101,  # x^8 + x^4 + x^3 + x^2 + 1
    9: 0b1000010001,  # x^9 + x^4 + 1
    10: 0b10000001001,  # x^10 + x^3 + 1
}

ENUMERATION_BUDGET = 24  # max dimension for exhaustive codeword enumeration


class UnrealizableCode(ValueError):
    """Requested code parameters cannot be built."""

    def __init__(self, message: str, nearest: list[int] | None = None):
        super().__init__(message)
        self.nearest = nearest or []


class BudgetExceeded(RuntimeError):
    """An exhaustive computation would exceed its enumeration budget."""


def poly_str(p: int) -> str:
    terms = []
    for i in range(p.bit_length() - 1, -1, -1):
        if p >> i & 1:
            terms.append("1" if i == 0 else ("x" if i == 1 else f"x^{i}"))
    return " + ".join(terms) or "0"


# ---------------------------------------------------------------------------
# GF(2^m) and BCH


@lru_cache(maxsize=None)
def _field_tables(m: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    if m not in PRIMITIVE_POLYS:
        raise UnrealizableCode(f"field degree m={m} unsupported; need 3 <= m <= 10")
    n = (1 << m) - 1
    exp = [0] * (2 * n)
    log = [0] * (n + 1)
    x = 1
    for i in range(n):
        exp[i] = exp[i + n] = x
        log[x] = i
        x <<= 1
        if x >> m:
            x ^= PRIMITIVE_POLYS[m]
    return tuple(exp), tuple(log)


def cyclotomic_coset(i: int, m: int) -> frozenset[int]:
    n = (1 << m) - 1
    out, j = set(), i % n
    while j not in out:
        out.add(j)
        j = 2 * j % n
    return frozenset(out)


@lru_cache(maxsize=None)
def minimal_polynomial(i: int, m: int) -> int:
    """Minimal polynomial of alpha^i over GF(2), as a coefficient bitmask."""
    exp, log = _field_tables(m)
    n = (1 << m) - 1

    def mul(a, b):
        if a == 0 or b == 0:
            return 0
        return exp[log[a] + log[b]]

    coeffs = [1]  # over GF(2^m), lowest degree first
    for j in sorted(cyclotomic_coset(i, m)):
        root = exp[j % n]
        nxt = [0] * (len(coeffs) + 1)
        for d, c in enumerate(coeffs):
            nxt[d + 1] ^= c
            nxt[d] ^= mul(c, root)
        coeffs = nxt
    assert all(c in (0, 1) for c in coeffs)
    return sum(c << d for d, c in enumerate(coeffs))


def bch_zeros(m: int, t: int) -> frozenset[int]:
    """Exponents j such that alpha^j is a root of the BCH(t) generator polynomial."""
    zs: set[int] = set()
    for i in range(1, 2 * t + 1):
        zs |= cyclotomic_coset(i, m)
    return frozenset(zs)


def _gf2_polymul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


@lru_cache(maxsize=None)
def bch_generator_poly(m: int, t: int) -> int:
    if t < 1:
        raise ValueError("designed error count t must be >= 1")
    _field_tables(m)
    g, seen = 1, set()
    for i in range(1, 2 * t + 1):
        rep = min(cyclotomic_coset(i, m))
        if rep not in seen:
            seen.add(rep)
            g = _gf2_polymul(g, minimal_polynomial(i, m))
    return g


def bch_redundancy(m: int, t: int) -> int:
    return bch_generator_poly(m, t).bit_length() - 1


@lru_cache(maxsize=None)
def bch_t_for_redundancy(m: int, rho: int) -> int | None:
    """Largest t whose BCH generator has degree ``rho`` (None if no t does)."""
    n = (1 << m) - 1
    best = None
    t = 1
    while 2 * t <= n:
        deg = bch_redundancy(m, t)
        if deg == rho:
            best = t
        elif deg > rho:
            break
        t += 1
    return best


def realizable_redundancies(m: int) -> list[int]:
    n = (1 << m) - 1
    out = {0}
    t = 1
    while 2 * t <= n:
        deg = bch_redundancy(m, t)
        if deg >= n:
            break
        out.add(deg)
        t += 1
    return sorted(out)


def bch_parity_check(m: int, t: int) -> np.ndarray:
    """n x deg(g) parity-check matrix of the narrow-sense BCH code.

    Row i holds the coefficients of ``x^i mod g(x)``, so ``H.T @ c = 0``
    exactly when g(x) divides c(x).
    """
    if not 3 <= m <= 10:
        raise UnrealizableCode(f"field degree m={m} unsupported; need 3 <= m <= 10")
    g = bch_generator_poly(m, t)
    deg = g.bit_length() - 1
    n = (1 << m) - 1
    H = np.zeros((n, deg), dtype=np.uint8)
    rem = 1
    for i in range(n):
        for j in range(deg):
            H[i, j] = rem >> j & 1
        rem <<= 1
        if rem >> deg & 1:
            rem ^= g
    return H


def field_degree(n: int) -> int:
    m = (n + 1).bit_length() - 1
    if (1 << m) - 1 != n or m not in PRIMITIVE_POLYS:
        raise UnrealizableCode(f"n={n} is not 2^m - 1 for a supported m in 3..10")
    return m


# ---------------------------------------------------------------------------
# code containers


@dataclass(frozen=True, eq=False)
class LinearCode:
    G: np.ndarray  # n x k
    H: np.ndarray  # n x (n - k)
    name: str = "custom"

    @property
    def n(self) -> int:
        return self.G.shape[0]

    @property
    def k(self) -> int:
        return self.G.shape[1]

    @cached_property
    def message_inverse(self) -> np.ndarray:
        """k x n matrix recovering m from c = G m."""
        return gf2.left_inverse(self.G)

    @cached_property
    def encoder(self) -> gf2.MatVec:
        return gf2.MatVec(self.G)

    @cached_property
    def syndrome(self) -> gf2.MatVec:
        return gf2.MatVec(self.H.T)

    @cached_property
    def unencoder(self) -> gf2.MatVec:
        return gf2.MatVec(self.message_inverse)


def from_generator(G, name: str = "custom") -> LinearCode:
    G = gf2.as_bits(G, ndim=2)
    if gf2.rank(G) != G.shape[1]:
        raise UnrealizableCode("generator matrix must have full column rank")
    return LinearCode(G, gf2.null_space(G.T), name)


def from_parity_check(H, name: str = "custom") -> LinearCode:
    H = gf2.as_bits(H, ndim=2)
    if gf2.rank(H) != H.shape[1]:
        raise UnrealizableCode("parity-check matrix must have full column rank")
    return LinearCode(gf2.null_space(H.T), H, name)


def hamming_7_4() -> LinearCode:
    P = np.array([[1, 1, 0, 1], [1, 0, 1, 1], [0, 1, 1, 1]], dtype=np.uint8)
    G = np.vstack([np.eye(4, dtype=np.uint8), P])
    H = np.vstack([P.T, np.eye(3, dtype=np.uint8)])
    return LinearCode(G, H, "hamming74")


def repetition(n: int) -> LinearCode:
    return from_generator(np.ones((n, 1), dtype=np.uint8), f"repetition{n}")


def bch_code(m: int, t: int) -> LinearCode:
    return from_parity_check(bch_parity_check(m, t), f"bch(m={m},t={t})")


@dataclass(frozen=True, eq=False)
class PartitionedCode:
    """[n, k, l] partitioned code with optional erasure parity ``Htilde``."""

    G1: np.ndarray  # n x k
    G0: np.ndarray  # n x l
    H0: np.ndarray  # n x k message inverse
    Htilde: np.ndarray  # n x r parity check of [G1 G0]
    d0: int = 0
    d1: int = 0
    t0: int = 0
    t1: int = 0
    name: str = "custom"
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.G1.shape[0]

    @property
    def k(self) -> int:
        return self.G1.shape[1]

    @property
    def l(self) -> int:  # noqa: E743
        return self.G0.shape[1]

    @property
    def r(self) -> int:
        return self.Htilde.shape[1]

    @cached_property
    def Gtilde(self) -> np.ndarray:
        return np.hstack([self.G1, self.G0])

    @cached_property
    def message_encoder(self) -> gf2.MatVec:
        return gf2.MatVec(self.G1)

    @cached_property
    def parity_encoder(self) -> gf2.MatVec:
        return gf2.MatVec(self.G0)

    @cached_property
    def message_reader(self) -> gf2.MatVec:
        return gf2.MatVec(self.H0.T)

    @cached_property
    def syndrome(self) -> gf2.MatVec:
        return gf2.MatVec(self.Htilde.T)

    def descriptor(self) -> dict:
        d = {"family": self.meta.get("family", "custom"), "n": self.n, "k": self.k, "l": self.l}
        d.update({k: v for k, v in self.meta.items() if k != "family"})
        d.update({"d0": self.d0, "d1": self.d1})
        return d


def partitioned_from_matrices(G0, Htilde=None, k: int | None = None, **kw) -> PartitionedCode:
    """Complete (G0, Htilde) to a partitioned code.

    G1 is chosen as a complement of span(G0) inside the null space of
    ``Htilde.T`` (the whole space when Htilde is absent), preferring unit
    vectors when that null space is the whole space.
    """
    G0 = gf2.as_bits(G0, ndim=2)
    n, l = G0.shape
    if Htilde is None:
        Htilde = np.zeros((n, 0), dtype=np.uint8)
    Htilde = gf2.as_bits(Htilde, ndim=2)
    if Htilde.shape[1]:
        if gf2.mat_mul(Htilde.T, G0).any():
            raise UnrealizableCode("masking code is not contained in the erasure code")
        full = gf2.null_space(Htilde.T)
    else:
        full = gf2.identity(n)
    if gf2.rank(G0) != l:
        raise UnrealizableCode("G0 must have full column rank")
    _, _, piv = gf2.rref(np.hstack([G0, full]))
    extra = [p - l for p in piv if p >= l]
    G1 = np.ascontiguousarray(full[:, extra])
    if k is not None and G1.shape[1] != k:
        raise UnrealizableCode(f"dimensions give k={G1.shape[1]}, requested k={k}")
    Gt = np.hstack([G1, G0])
    L = gf2.left_inverse(Gt)
    H0 = np.ascontiguousarray(L[: G1.shape[1]].T)
    return PartitionedCode(G1, G0, H0, Htilde, **kw)


def pbch_distances(n: int, k: int, l: int) -> dict:
    """Designed (t0, t1, d0, d1) of an [n, k, l] PBCH code, without building matrices.

    Raises :class:`UnrealizableCode` listing the nearest valid ``l`` values.
    """
    m = field_degree(n)
    r = n - k - l
    if k <= 0 or l < 0 or r < 0:
        raise UnrealizableCode(f"need k > 0 and k + l <= n, got n={n}, k={k}, l={l}")
    t0 = bch_t_for_redundancy(m, l) if l else 0
    t1 = bch_t_for_redundancy(m, r) if r else 0
    ok = t0 is not None and t1 is not None
    if ok and l and r:
        # span(G0) = dual of BCH(t0) must sit inside BCH(t1): the zeros of
        # BCH(t1) may not meet the negated zeros of BCH(t0)
        neg0 = {(-j) % n for j in bch_zeros(m, t0)}
        ok = not (bch_zeros(m, t1) & neg0)
    if not ok:
        valid = [
            cand
            for cand in range(0, n - k + 1)
            if _pbch_ok(n, k, cand, m)
        ]
        valid.sort(key=lambda c: (abs(c - l), c))
        raise UnrealizableCode(
            f"[n={n}, k={k}, l={l}] is not a realizable PBCH split", nearest=sorted(valid[:2])
        )
    return {
        "m": m,
        "t0": t0,
        "t1": t1,
        "d0": 2 * t0 + 1 if l else 0,
        "d1": 2 * t1 + 1 if r else 0,
        "r": r,
    }


def _pbch_ok(n, k, l, m) -> bool:
    r = n - k - l
    t0 = bch_t_for_redundancy(m, l) if l else 0
    t1 = bch_t_for_redundancy(m, r) if r else 0
    if t0 is None or t1 is None:
        return False
    if l and r:
        neg0 = {(-j) % n for j in bch_zeros(m, t0)}
        return not (bch_zeros(m, t1) & neg0)
    return True


def make_pbch(n: int, k: int, l: int) -> PartitionedCode:
    """Partitioned BCH code: G0 from the BCH(t0) parity check, Htilde from BCH(t1)."""
    info = pbch_distances(n, k, l)
    m = info["m"]
    G0 = bch_parity_check(m, info["t0"]) if l else np.zeros((n, 0), dtype=np.uint8)
    Ht = bch_parity_check(m, info["t1"]) if info["r"] else np.zeros((n, 0), dtype=np.uint8)
    meta = {
        "family": "pbch",
        "m": m,
        "t0": info["t0"],
        "t1": info["t1"],
        "primitive_poly": poly_str(PRIMITIVE_POLYS[m]),
    }
    return partitioned_from_matrices(
        G0,
        Ht,
        k=k,
        d0=info["d0"],
        d1=info["d1"],
        t0=info["t0"],
        t1=info["t1"],
        name=f"pbch[{n},{k},{l}]",
        meta=meta,
    )


def masking_dual_of(code: LinearCode) -> PartitionedCode:
    """BDC code whose masking dual equals ``code``: G0 = H, so B_w = A_w."""
    d = minimum_distance(code)
    return partitioned_from_matrices(
        code.H, None, d0=d.value, t0=(d.value - 1) // 2, name=f"masking-dual({code.name})"
    )


# ---------------------------------------------------------------------------
# weight distributions and distances


@dataclass(frozen=True)
class WeightDistribution:
    n: int
    counts: dict  # weight -> count (int for exact, float for approximations)
    kind: str  # "exact" or "binomial"

    def __getitem__(self, w: int):
        return self.counts.get(w, 0)

    def total(self):
        return sum(self.counts.values())

    def min_nonzero_weight(self) -> int | None:
        ws = [w for w, c in self.counts.items() if w > 0 and c > 0]
        return min(ws) if ws else None


def weight_distribution_exact(G) -> WeightDistribution:
    """Exact codeword weight counts of span(G) by enumeration (dimension <= 24)."""
    G = gf2.as_bits(G, ndim=2)
    n, k = G.shape
    if k > ENUMERATION_BUDGET:
        raise BudgetExceeded(f"dimension {k} exceeds enumeration budget {ENUMERATION_BUDGET}")
    cols = gf2.pack_rows(np.ascontiguousarray(G.T))
    k_lo = k // 2
    lo = np.zeros((1, cols.shape[1]), dtype=np.uint64)
    for i in range(k_lo):
        lo = np.vstack([lo, lo ^ cols[i]])
    hist = np.zeros(n + 1, dtype=np.int64)
    hi = np.zeros((1, cols.shape[1]), dtype=np.uint64)
    for i in range(k_lo, k):
        hi = np.vstack([hi, hi ^ cols[i]])
    for h in hi:
        w = np.bitwise_count(lo ^ h).sum(axis=1)
        hist += np.bincount(w, minlength=n + 1)
    return WeightDistribution(n, {int(w): int(c) for w, c in enumerate(hist) if c}, "exact")


def weight_distribution_binomial(n: int, redundancy: int) -> WeightDistribution:
    """Random-code approximation: A_w = 2^(-redundancy) * C(n, w)."""
    scale = 2.0 ** (-redundancy)
    counts = {w: math.comb(n, w) * scale for w in range(n + 1)}
    return WeightDistribution(n, counts, "binomial")


@dataclass(frozen=True)
class Distance:
    value: int
    how: str  # "exact" or "designed"


def minimum_distance(code) -> Distance:
    """Smallest nonzero codeword weight; designed distance for large BCH codes.

    Accepts a LinearCode, a PartitionedCode (its masking distance d0 is the
    distance of {c : G0.T c = 0}), or a bare generator matrix.
    """
    if isinstance(code, PartitionedCode):
        if code.l == 0:
            return Distance(0, "designed")
        inner = code.n - code.l
        if inner <= ENUMERATION_BUDGET:
            wd = weight_distribution_exact(gf2.null_space(code.G0.T))
            return Distance(wd.min_nonzero_weight() or 0, "exact")
        return Distance(code.d0, "designed")
    if isinstance(code, LinearCode):
        G, name = code.G, code.name
    else:
        G, name = gf2.as_bits(code, ndim=2), "custom"
    if G.shape[1] <= ENUMERATION_BUDGET:
        wd = weight_distribution_exact(G)
        return Distance(wd.min_nonzero_weight() or 0, "exact")
    if name.startswith("bch("):
        t = int(name.split("t=")[1].rstrip(")"))
        return Distance(2 * t + 1, "designed")
    raise BudgetExceeded(f"dimension {G.shape[1]} too large for exact minimum distance")


# ---------------------------------------------------------------------------
# descriptors


def build_code(desc: dict):
    """Construct a code from a JSON-style descriptor.

    ``family`` is one of hamming74, repetition, bch (m and t, or n and k),
    pbch (n, k, l), or masking_dual (``of``: another descriptor), the defect
    code whose masking dual is the given linear code.
    """
    family = desc.get("family")
    if family == "hamming74":
        return hamming_7_4()
    if family == "repetition":
        return repetition(int(desc["n"]))
    if family == "bch":
        if "m" in desc:
            m = int(desc["m"])
        else:
            m = field_degree(int(desc["n"]))
        if "t" in desc:
            t = int(desc["t"])
        else:
            t = bch_t_for_redundancy(m, (1 << m) - 1 - int(desc["k"]))
            if t is None:
                raise UnrealizableCode(f"no BCH code of length {(1 << m) - 1} with k={desc['k']}")
        return bch_code(m, t)
    if family == "pbch":
        return make_pbch(int(desc["n"]), int(desc["k"]), int(desc.get("l", 0)))
    if family == "masking_dual":
        inner = build_code(desc["of"])
        if not isinstance(inner, LinearCode):
            raise UnrealizableCode("masking_dual needs a linear code")
        return masking_dual_of(inner)
    raise UnrealizableCode(f"unknown code family {family!r}")


def describe(code) -> dict:
    if isinstance(code, PartitionedCode):
        return code.descriptor()
    out = {"family": code.name.split("(")[0], "n": code.n, "k": code.k, "l": 0}
    if code.name.startswith("bch("):
        m = field_degree(code.n)
        out.update({"m": m, "t": int(code.name.split("t=")[1].rstrip(")")),
                    "primitive_poly": poly_str(PRIMITIVE_POLYS[m])})
    return out
