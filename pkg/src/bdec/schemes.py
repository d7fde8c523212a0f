"""
Encoders and decoders for the erasure, defect and combined channels.

Erasure decoding solves a linear system on the unerased positions, either
through the generator matrix (unknowns: message) or the parity-check matrix
(unknowns: erased bits). Defect masking solves the restricted system
``G0[U] d = G1[U] m + s[U]`` so the written codeword agrees with every stuck
cell.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np

from . import gf2
from .channels import ERASED, NORMAL, count_defect_errors
from .codes import LinearCode, PartitionedCode


class DecodeStatus(enum.Enum):
    SUCCESS = "Success"
    TIE = "TieBrokenRandomly"
    FAILED = "Failed"


@dataclass(frozen=True)
class DecodeResult:
    message: np.ndarray
    status: DecodeStatus
    candidate_count_log2: int = 0
    codeword: np.ndarray | None = None
    detail: str = ""


@dataclass(frozen=True)
class MaskResult:
    codeword: np.ndarray
    parity_d: np.ndarray
    masked: bool
    residual_errors: int


def _split(y):
    y = np.asarray(y, dtype=np.int8)
    erased = y == ERASED
    return np.flatnonzero(erased), np.flatnonzero(~erased), y


def _status(outcome: gf2.SolveOutcome) -> DecodeStatus:
    if outcome.tag is gf2.SolveTag.UNIQUE:
        return DecodeStatus.SUCCESS
    return DecodeStatus.TIE


# ---------------------------------------------------------------------------
# erasure channel


def bec_encode(code: LinearCode, m) -> np.ndarray:
    return code.encoder(gf2.as_bits(m, ndim=1))


def bec_decode_via_G(code: LinearCode, y, rng=None) -> DecodeResult:
    """Solve G[V] m = y[V]; ties are broken by a uniform random solution."""
    y = np.asarray(y)
    if y.shape[0] != code.n:
        raise gf2.DimensionError(f"received length {y.shape[0]}, code length {code.n}")
    _, V, y = _split(y)
    out = gf2.solve(code.G[V], y[V].astype(np.uint8), rng)
    if not out.consistent:
        return DecodeResult(
            np.zeros(code.k, dtype=np.uint8), DecodeStatus.FAILED, detail="no codeword matches"
        )
    return DecodeResult(out.solution, _status(out), out.free_var_count, gf2.mat_vec(code.G, out.solution))


def bec_decode_via_H(code: LinearCode, y, rng=None) -> DecodeResult:
    """Solve H[E].T c[E] = H[V].T y[V] for the erased bits, then read off m."""
    y = np.asarray(y)
    if y.shape[0] != code.n:
        raise gf2.DimensionError(f"received length {y.shape[0]}, code length {code.n}")
    E, V, y = _split(y)
    c = _fill_erasures(code.H, code.syndrome, E, V, y, rng)
    if c is None:
        return DecodeResult(
            np.zeros(code.k, dtype=np.uint8), DecodeStatus.FAILED, detail="no codeword matches"
        )
    c, out = c
    m = code.unencoder(c)
    return DecodeResult(m, _status(out), out.free_var_count, c)


def _fill_erasures(H, syndrome, E, V, y, rng):
    # erased cells read as 0, so the full syndrome equals H[V].T y[V]
    c = np.where(y == ERASED, 0, y).astype(np.uint8)
    q = syndrome(c)
    out = gf2.solve(np.ascontiguousarray(H[E].T), q, rng)
    if not out.consistent:
        return None
    c[E] = out.solution
    return c, out


# ---------------------------------------------------------------------------
# defect channel


def _stuck(s):
    s = np.asarray(s, dtype=np.int8)
    U = np.flatnonzero(s != NORMAL)
    return U, s[U].astype(np.uint8)


def bdc_encode_additive(pcode: PartitionedCode, m, s) -> MaskResult:
    """Additive masking: pick d with G0[U] d = G1[U] m + s[U].

    When no such d exists the encoder falls back to the greedy maximal
    consistent subset of defect rows, so a codeword is still produced.
    """
    m = gf2.as_bits(m, ndim=1)
    s = np.asarray(s, dtype=np.int8)
    if s.shape[0] != pcode.n:
        raise gf2.DimensionError(f"state length {s.shape[0]}, code length {pcode.n}")
    U, su = _stuck(s)
    c1 = pcode.message_encoder(m)
    b = c1[U] ^ su
    A = pcode.G0[U]
    out = gf2.solve(A, b)
    masked = out.consistent
    if masked:
        d = out.solution
    else:
        keep = gf2.consistent_subset(A, b)
        d = gf2.solve(A[keep], b[keep]).solution
    c = c1 ^ pcode.parity_encoder(d) if pcode.l else c1
    resid = count_defect_errors(c, s)
    return MaskResult(c, d, resid == 0, resid)


def bdc_encode_optimal(pcode: PartitionedCode, m, s) -> MaskResult:
    """Brute force over all 2^l parities; minimizes the defect-error count."""
    if pcode.l > 20:
        raise ValueError("brute-force masking limited to l <= 20")
    m = gf2.as_bits(m, ndim=1)
    U, su = _stuck(s)
    c1 = gf2.mat_vec(pcode.G1, m)
    b = c1[U] ^ su
    A = pcode.G0[U].astype(np.int64)
    best_d, best = np.zeros(pcode.l, dtype=np.uint8), None
    for bits in itertools.product((0, 1), repeat=pcode.l):
        d = np.array(bits, dtype=np.int64)
        errs = int(np.count_nonzero(((A @ d) & 1) ^ b)) if len(U) else 0
        if best is None or errs < best:
            best, best_d = errs, d.astype(np.uint8)
            if errs == 0:
                break
    c = c1 ^ gf2.mat_vec(pcode.G0, best_d) if pcode.l else c1
    return MaskResult(c, best_d, best == 0, best)


def bdc_decode(pcode: PartitionedCode, y) -> np.ndarray:
    """m_hat = H0.T y."""
    return pcode.message_reader(gf2.as_bits(y, ndim=1))


def bdc_encode_binning(pcode: PartitionedCode, m, s) -> MaskResult:
    """Random-binning encoder: choose c agreeing with every stuck cell.

    Solves ``H0[W].T c[W] = m + H0[U].T s[U]`` on the normal cells W; when
    the code also carries erasure parity, ``Htilde.T c = 0`` is imposed too so
    c stays inside span([G1 G0]).
    """
    m = gf2.as_bits(m, ndim=1)
    s = np.asarray(s, dtype=np.int8)
    U, su = _stuck(s)
    W = np.flatnonzero(s == NORMAL)
    checks = np.hstack([pcode.H0, pcode.Htilde])
    target = np.concatenate([m, np.zeros(pcode.r, dtype=np.uint8)])
    if len(U):
        target = target ^ gf2.mat_vec(np.ascontiguousarray(checks[U].T), su)
    out = gf2.solve(np.ascontiguousarray(checks[W].T), target)
    if not out.consistent:
        # no vector of the bin fits the stuck cells; emit the additive fallback
        return bdc_encode_additive(pcode, m, s)
    c = np.zeros(pcode.n, dtype=np.uint8)
    c[U] = su
    c[W] = out.solution
    d = gf2.solve(pcode.Gtilde, c).solution[pcode.k:]
    return MaskResult(c, d, True, 0)


# ---------------------------------------------------------------------------
# combined channel


def bdec_encode(pcode: PartitionedCode, m, s) -> MaskResult:
    """c = G1 m + G0 d with d from the additive masking system."""
    return bdc_encode_additive(pcode, m, s)


def bdec_decode(pcode: PartitionedCode, y, rng=None, method: str = "H") -> DecodeResult:
    """Recover (m, d) from the unerased cells; the decoder never sees defects.

    ``method="G"`` solves Gtilde[V] [m; d] = y[V]; ``method="H"`` fills the
    erased bits through Htilde and reads the message with H0.
    """
    y = np.asarray(y)
    if y.shape[0] != pcode.n:
        raise gf2.DimensionError(f"received length {y.shape[0]}, code length {pcode.n}")
    E, V, y = _split(y)
    fail = DecodeResult(np.zeros(pcode.k, dtype=np.uint8), DecodeStatus.FAILED, detail="no codeword matches")
    if method == "G":
        out = gf2.solve(pcode.Gtilde[V], y[V].astype(np.uint8), rng)
        if not out.consistent:
            return fail
        c = gf2.mat_vec(pcode.Gtilde, out.solution)
        return DecodeResult(out.solution[: pcode.k], _status(out), out.free_var_count, c)
    if method != "H":
        raise ValueError(f"unknown decoding method {method!r}")
    res = _fill_erasures(pcode.Htilde, pcode.syndrome, E, V, y, rng)
    if res is None:
        return fail
    c, out = res
    return DecodeResult(bdc_decode(pcode, c), _status(out), out.free_var_count, c)
