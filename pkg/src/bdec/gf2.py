"""
Dense GF(2) linear algebra.

Matrices and vectors are plain ``numpy.uint8`` arrays holding 0/1 entries.
Elimination packs rows into 64-bit words and runs a compiled kernel, so
systems with a thousand unknowns reduce in milliseconds.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

import numba
import numpy as np

WORD = 64


class DimensionError(ValueError):
    """Raised when operand shapes do not conform."""


def as_bits(x, ndim: int | None = None) -> np.ndarray:
    """Coerce an array-like of 0/1 entries to a uint8 array, validating values."""
    a = np.asarray(x)
    if a.dtype == bool:
        a = a.astype(np.uint8)
    if ndim is not None and a.ndim != ndim:
        raise DimensionError(f"expected {ndim}-d bit array, got shape {a.shape}")
    if a.size and (a.min() < 0 or a.max() > 1):
        raise ValueError("bit arrays must contain only 0 and 1")
    return a.astype(np.uint8, copy=False)


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.uint8)


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=np.uint8)


def random_matrix(rows: int, cols: int, seed) -> np.ndarray:
    """Uniform random 0/1 matrix; deterministic given ``seed``."""
    return np.random.default_rng(seed).integers(0, 2, size=(rows, cols), dtype=np.uint8)


def weight(x) -> int:
    return int(np.count_nonzero(x))


# ---------------------------------------------------------------------------
# packing


def pack_rows(M: np.ndarray, extra_cols: int = 0) -> np.ndarray:
    """Pack each row of a 0/1 matrix into little-endian uint64 words.

    ``extra_cols`` reserves zero bit positions after the last column, which
    the solver uses for augmented right-hand sides.
    """
    rows, cols = M.shape
    nwords = max(1, -(-(cols + extra_cols) // WORD))
    buf = np.zeros((rows, nwords * 8), dtype=np.uint8)
    if cols:
        packed = np.packbits(M, axis=1, bitorder="little")
        buf[:, : packed.shape[1]] = packed
    return buf.view("<u8")


def unpack_rows(W: np.ndarray, cols: int) -> np.ndarray:
    bits = np.unpackbits(np.ascontiguousarray(W).view(np.uint8), axis=1, bitorder="little")
    return bits[:, :cols]


@numba.njit(cache=True)
def _rref_packed(W, pivot_cols):
    """In-place reduced row echelon form of packed rows.

    Only the first ``pivot_cols`` bit positions are eligible as pivots; the
    remaining positions are carried along (augmented columns).
    Returns (rank, pivots).
    """
    rows, nwords = W.shape
    pivots = np.empty(min(rows, pivot_cols), dtype=np.int64)
    rank = 0
    for col in range(pivot_cols):
        if rank == rows:
            break
        w = col >> 6
        mask = np.uint64(1) << np.uint64(col & 63)
        found = -1
        for i in range(rank, rows):
            if W[i, w] & mask:
                found = i
                break
        if found < 0:
            continue
        if found != rank:
            for j in range(nwords):
                tmp = W[rank, j]
                W[rank, j] = W[found, j]
                W[found, j] = tmp
        for i in range(rows):
            if i != rank and (W[i, w] & mask):
                for j in range(w, nwords):
                    W[i, j] ^= W[rank, j]
        pivots[rank] = col
        rank += 1
    return rank, pivots[:rank]


@numba.njit(cache=True)
def _batch_rank_words(A, nbits):
    """Rank of many small matrices at once; each row is a single uint64."""
    count, rows = A.shape
    out = np.zeros(count, dtype=np.int64)
    for c in range(count):
        r = 0
        for col in range(nbits):
            mask = np.uint64(1) << np.uint64(col)
            found = -1
            for i in range(r, rows):
                if A[c, i] & mask:
                    found = i
                    break
            if found < 0:
                continue
            tmp = A[c, r]
            A[c, r] = A[c, found]
            A[c, found] = tmp
            for i in range(r + 1, rows):
                if A[c, i] & mask:
                    A[c, i] ^= A[c, r]
            r += 1
            if r == rows:
                break
        out[c] = r
    return out


# ---------------------------------------------------------------------------
# elimination


def rref(M) -> tuple[np.ndarray, int, list[int]]:
    """Reduced row-echelon form over GF(2).

    Returns ``(R, rank, pivots)`` with pivot column indices strictly increasing.
    """
    M = as_bits(M, ndim=2)
    rows, cols = M.shape
    W = pack_rows(M)
    r, piv = _rref_packed(W, cols)
    return unpack_rows(W, cols), int(r), [int(p) for p in piv]


def rank(M) -> int:
    M = as_bits(M, ndim=2)
    rows, cols = M.shape
    if rows == 0 or cols == 0:
        return 0
    # eliminate along the shorter side
    if cols > rows:
        M = M.T
        rows, cols = cols, rows
    W = pack_rows(np.ascontiguousarray(M))
    r, _ = _rref_packed(W, cols)
    return int(r)


def batch_rank(mats) -> np.ndarray:
    """Ranks of a stack of matrices, shape (count, rows, cols), min side <= 64."""
    mats = as_bits(mats, ndim=3)
    count, rows, cols = mats.shape
    if min(rows, cols) > WORD:
        raise DimensionError("batch_rank needs min(rows, cols) <= 64")
    if cols > rows:
        mats = mats.transpose(0, 2, 1)
        rows, cols = cols, rows
    weights = np.uint64(1) << np.arange(cols, dtype=np.uint64)
    words = (mats.astype(np.uint64) * weights).sum(axis=2, dtype=np.uint64)
    return _batch_rank_words(np.ascontiguousarray(words), cols)


class SolveTag(enum.Enum):
    UNIQUE = "Unique"
    MULTIPLE = "Multiple"
    INCONSISTENT = "Inconsistent"


@dataclass(frozen=True)
class SolveOutcome:
    tag: SolveTag
    solution: np.ndarray | None
    free_var_count: int
    rank: int

    @property
    def consistent(self) -> bool:
        return self.tag is not SolveTag.INCONSISTENT


def solve(A, b, rng=None) -> SolveOutcome:
    """Solve ``A x = b`` over GF(2).

    Free variables are set to zero when ``rng`` is None; otherwise each is
    drawn uniformly from ``rng`` (a numpy Generator or a seed), which yields
    a uniform pick among the ``2**free`` solutions.
    """
    A = as_bits(A, ndim=2)
    b = as_bits(b, ndim=1)
    rows, cols = A.shape
    if b.shape[0] != rows:
        raise DimensionError(f"right-hand side has length {b.shape[0]}, expected {rows}")
    W = pack_rows(A, extra_cols=1)
    if rows:
        bw, bb = divmod(cols, WORD)
        W[:, bw] |= b.astype(np.uint64) << np.uint64(bb)
    r, piv = _rref_packed(W, cols)
    r = int(r)
    R = unpack_rows(W, cols + 1)
    if r < rows and R[r:, cols].any():
        return SolveOutcome(SolveTag.INCONSISTENT, None, cols - r, r)

    free = cols - r
    x = np.zeros(cols, dtype=np.uint8)
    if free and rng is not None:
        rng = np.random.default_rng(rng)
        is_free = np.ones(cols, dtype=bool)
        is_free[piv] = False
        x[is_free] = rng.integers(0, 2, size=free, dtype=np.uint8)
    if r:
        # pivot rows: x_p = rhs + sum of free columns in that row
        Rp = R[:r, :cols]
        x[piv] = (R[:r, cols] ^ (Rp @ x)) & 1
    tag = SolveTag.UNIQUE if free == 0 else SolveTag.MULTIPLE
    return SolveOutcome(tag, x, free, r)


@numba.njit(cache=True)
def _greedy_consistent(W, cols):
    # W holds rows with the rhs bit at column `cols`; basis kept fully reduced
    rows, words = W.shape
    basis = np.zeros((min(rows, cols + 1), words), dtype=np.uint64)
    bpiv = np.zeros(basis.shape[0], dtype=np.int64)
    nb = 0
    keep = np.zeros(rows, dtype=np.bool_)
    one = np.uint64(1)
    for i in range(rows):
        row = W[i].copy()
        for j in range(nb):
            p = bpiv[j]
            if (row[p >> 6] >> np.uint64(p & 63)) & one:
                for w in range(words):
                    row[w] ^= basis[j, w]
        p = -1
        for c in range(cols - 1, -1, -1):
            if (row[c >> 6] >> np.uint64(c & 63)) & one:
                p = c
                break
        if p < 0:
            keep[i] = ((row[cols >> 6] >> np.uint64(cols & 63)) & one) == 0
            continue
        for j in range(nb):
            if (basis[j, p >> 6] >> np.uint64(p & 63)) & one:
                for w in range(words):
                    basis[j, w] ^= row[w]
        basis[nb] = row
        bpiv[nb] = p
        nb += 1
        keep[i] = True
    return keep


def consistent_subset(A, b) -> np.ndarray:
    """Greedy maximal consistent row subset of ``A x = b``.

    Rows are admitted in order; a row is dropped when it would contradict the
    rows admitted before it. Returns a boolean keep-mask.
    """
    A = as_bits(A, ndim=2)
    b = as_bits(b, ndim=1)
    rows, cols = A.shape
    if b.shape[0] != rows:
        raise DimensionError(f"right-hand side has length {b.shape[0]}, expected {rows}")
    W = pack_rows(A, extra_cols=1)
    if rows:
        bw, bb = divmod(cols, WORD)
        W[:, bw] |= b.astype(np.uint64) << np.uint64(bb)
    return _greedy_consistent(W, cols)


def null_space(M) -> np.ndarray:
    """Basis of {x : M x = 0} as the columns of a (cols x nullity) matrix."""
    M = as_bits(M, ndim=2)
    rows, cols = M.shape
    R, r, piv = rref(M)
    free = [j for j in range(cols) if j not in set(piv)]
    N = np.zeros((cols, len(free)), dtype=np.uint8)
    for idx, f in enumerate(free):
        N[f, idx] = 1
        for i, p in enumerate(piv):
            N[p, idx] = R[i, f]
    return N


def inverse(S) -> np.ndarray:
    S = as_bits(S, ndim=2)
    n = S.shape[0]
    if S.shape != (n, n):
        raise DimensionError("inverse needs a square matrix")
    R, r, _ = rref(np.hstack([S, identity(n)]))
    if r < n or not np.array_equal(R[:, :n], identity(n)):
        raise np.linalg.LinAlgError("matrix is singular over GF(2)")
    return R[:, n:]


def left_inverse(M) -> np.ndarray:
    """A (cols x rows) matrix L with L @ M = I for full-column-rank M."""
    M = as_bits(M, ndim=2)
    rows, cols = M.shape
    _, r, piv = rref(M.T)
    if r < cols:
        raise np.linalg.LinAlgError("matrix does not have full column rank")
    L = np.zeros((cols, rows), dtype=np.uint8)
    L[:, piv] = inverse(M[piv, :])
    return L


def mat_vec(M, x) -> np.ndarray:
    M = as_bits(M, ndim=2)
    x = as_bits(x, ndim=1)
    if M.shape[1] != x.shape[0]:
        raise DimensionError(f"cannot multiply {M.shape} matrix by length-{x.shape[0]} vector")
    # uint8 wraparound is mod 256, so parity survives
    return (M @ x) & 1


@numba.njit(cache=True)
def _xor_columns(C, x):
    out = np.zeros(C.shape[1], dtype=np.uint64)
    for j in range(x.shape[0]):
        if x[j]:
            for w in range(C.shape[1]):
                out[w] ^= C[j, w]
    return out


class MatVec:
    """Repeated GF(2) products with one fixed matrix.

    Columns are stored bit-packed, so ``M x`` is the XOR of the columns
    selected by the ones of ``x``.
    """

    def __init__(self, M):
        M = as_bits(M, ndim=2)
        self.shape = M.shape
        self._cols = pack_rows(np.ascontiguousarray(M.T))

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x)
        if x.shape[0] != self.shape[1]:
            raise DimensionError(f"cannot multiply {self.shape} matrix by length-{x.shape[0]} vector")
        words = _xor_columns(self._cols, x.astype(np.uint8))
        return np.unpackbits(words.view(np.uint8), bitorder="little")[: self.shape[0]]


def mat_mul(A, B) -> np.ndarray:
    A = as_bits(A, ndim=2)
    B = as_bits(B, ndim=2)
    if A.shape[1] != B.shape[0]:
        raise DimensionError(f"cannot multiply {A.shape} by {B.shape}")
    return (A.astype(np.int64) @ B.astype(np.int64) & 1).astype(np.uint8)


# ---------------------------------------------------------------------------
# text format: "rows cols" header then one 0/1 string per row


def format_matrix(M) -> str:
    M = as_bits(M, ndim=2)
    lines = [f"{M.shape[0]} {M.shape[1]}"]
    lines += ["".join("1" if v else "0" for v in row) for row in M]
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    lines = [ln.strip() for ln in text.strip().splitlines()]
    try:
        rows, cols = (int(v) for v in lines[0].split())
    except (IndexError, ValueError):
        raise ValueError("matrix header must be 'rows cols'") from None
    body = lines[1:]
    if len(body) != rows:
        raise ValueError(f"expected {rows} matrix rows, found {len(body)}")
    M = np.zeros((rows, cols), dtype=np.uint8)
    for i, ln in enumerate(body):
        if len(ln) != cols or set(ln) - {"0", "1"}:
            raise ValueError(f"row {i} must be exactly {cols} characters of 0/1")
        M[i] = np.frombuffer(ln.encode(), dtype=np.uint8) - ord("0")
    return M


def load_matrix(path) -> np.ndarray:
    return parse_matrix(Path(path).read_text())


def save_matrix(path, M) -> None:
    Path(path).write_text(format_matrix(M))
