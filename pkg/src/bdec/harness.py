"""
Monte-Carlo runner, exhaustive small-code oracles, duality check and table
reproduction.

Every trial draws its randomness from ``default_rng([seed, trial])``, so a
run's tallies depend only on (config, seed) and never on how trials were
split across workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import stats

from . import alloc, bounds, codes, gf2, schemes
from .channels import NORMAL, ChannelParams, apply_circ, apply_erasures, sample_defects
from .codes import LinearCode, PartitionedCode

CHANNELS = ("bec", "bdc", "bdec")

# Channels of constant capacity 0.95 used for the allocation study
TABLE_CHANNELS = [
    (1, 0.0500, 0.0),
    (2, 0.0404, 0.0100),
    (3, 0.0306, 0.0200),
    (4, 0.0253, 0.0253),
    (5, 0.0200, 0.0306),
    (6, 0.0100, 0.0404),
    (7, 0.0, 0.0500),
]

RESULT_COLUMNS = [
    "run_id", "channel", "alpha", "beta", "n", "k", "l", "r", "rate", "trials",
    "fail_M", "fail_D", "fail_msg", "p_hat", "ci_lo", "ci_hi", "bound", "seed",
]


# ---------------------------------------------------------------------------
# configuration and results


@dataclass
class ExperimentConfig:
    channel: str
    code: dict
    alpha: float = 0.0
    beta: float = 0.0
    trials: int = 100_000
    seed: int = 0
    workers: int = 1
    encoder: str = "additive"  # or "binning" (defect channel only)
    decoder: str = "H"  # or "G"
    output: str | None = None

    def __post_init__(self):
        self.channel = self.channel.lower()
        if self.channel not in CHANNELS:
            raise ValueError(f"channel must be one of {CHANNELS}, got {self.channel!r}")
        ChannelParams(self.alpha, self.beta)
        if self.channel == "bec" and self.beta:
            raise ValueError("the erasure channel has no defects; beta must be 0")
        if self.channel == "bdc" and self.alpha:
            raise ValueError("the defect channel has no erasures; alpha must be 0")
        if self.trials < 0:
            raise ValueError("trials must be nonnegative")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.encoder not in ("additive", "binning"):
            raise ValueError(f"unknown encoder {self.encoder!r}")
        if self.decoder not in ("G", "H"):
            raise ValueError(f"unknown decoder {self.decoder!r}")

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls(**json.loads(text))

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


@dataclass(frozen=True)
class Interval:
    level: float
    lo: float
    hi: float


@dataclass
class SimResult:
    channel: str
    alpha: float
    beta: float
    n: int
    k: int
    l: int  # noqa: E741
    r: int
    trials: int
    failures_M: int
    failures_D: int
    failures_msg: int
    message_errors: int  # raw count of m_hat != m
    seed: int
    bound: float
    wall_time: float = 0.0
    ci_level: float = 0.95
    p_hat: dict = field(default_factory=dict)
    ci: dict = field(default_factory=dict)

    @property
    def rate_R(self) -> float:
        return self.k / self.n

    def tallies(self) -> tuple[int, int, int, int]:
        return (self.failures_M, self.failures_D, self.failures_msg, self.message_errors)

    def sigma(self, event: str = "msg") -> float:
        p = self.p_hat[event]
        return math.sqrt(p * (1 - p) / self.trials) if self.trials else 0.0

    def row(self, run_id: str = "") -> dict:
        ci = self.ci["msg"]
        return {
            "run_id": run_id, "channel": self.channel, "alpha": self.alpha, "beta": self.beta,
            "n": self.n, "k": self.k, "l": self.l, "r": self.r, "rate": f"{self.rate_R:.6f}",
            "trials": self.trials, "fail_M": self.failures_M, "fail_D": self.failures_D,
            "fail_msg": self.failures_msg, "p_hat": f"{self.p_hat['msg']:.6g}",
            "ci_lo": f"{ci.lo:.6g}", "ci_hi": f"{ci.hi:.6g}", "bound": f"{self.bound:.6g}",
            "seed": self.seed,
        }


def proportion_ci(failures: int, trials: int, level: float = 0.95) -> Interval:
    """Normal-approximation interval; exact Clopper-Pearson below 30 failures."""
    if trials == 0:
        return Interval(level, 0.0, 1.0)
    p = failures / trials
    if failures < 30 or trials - failures < 30:
        a = 1 - level
        lo = stats.beta.ppf(a / 2, failures, trials - failures + 1) if failures else 0.0
        hi = stats.beta.ppf(1 - a / 2, failures + 1, trials - failures) if failures < trials else 1.0
        return Interval(level, float(lo), float(hi))
    z = stats.norm.ppf(0.5 + level / 2)
    half = z * math.sqrt(p * (1 - p) / trials)
    return Interval(level, max(0.0, p - half), min(1.0, p + half))


def write_results_csv(rows, path=None) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=RESULT_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


# ---------------------------------------------------------------------------
# simulation


@lru_cache(maxsize=8)
def _cached_code(desc_json: str):
    return codes.build_code(json.loads(desc_json))


def _code_for(config: ExperimentConfig):
    code = _cached_code(json.dumps(config.code, sort_keys=True))
    if config.channel == "bec":
        if isinstance(code, PartitionedCode):
            if code.l:
                raise codes.UnrealizableCode("erasure channel needs a code without masking parity")
            code = LinearCode(code.G1, code.Htilde, code.name)
        return code
    if not isinstance(code, PartitionedCode):
        raise codes.UnrealizableCode(f"{config.channel} channel needs a partitioned code")
    if config.channel == "bdc" and code.r:
        raise codes.UnrealizableCode("defect channel code must have k + l = n")
    return code


def _bound_for(config: ExperimentConfig, code) -> float:
    n, k = code.n, code.k
    if config.channel == "bec":
        return bounds.bec_finite_bound(n, n - k, config.alpha)
    if config.channel == "bdc":
        return bounds.bdc_finite_bound(n, code.l, config.beta)
    return bounds.bdec_finite_bound(n, k, code.l, code.r, config.alpha, config.beta).value


def _one_trial(config: ExperimentConfig, code, trial: int) -> tuple[bool, bool, bool, bool]:
    """Returns (masking failed, decoding failed, message failed, m_hat != m)."""
    rng = np.random.default_rng([config.seed, trial])
    m = rng.integers(0, 2, size=code.k, dtype=np.uint8)
    if config.channel == "bec":
        c = schemes.bec_encode(code, m)
        y = apply_erasures(c, config.alpha, rng)
        dec = schemes.bec_decode_via_H if config.decoder == "H" else schemes.bec_decode_via_G
        wrong = bool((dec(code, y, rng).message != m).any())
        return False, wrong, wrong, wrong

    s = sample_defects(code.n, config.beta, rng)
    if config.channel == "bdc":
        enc = schemes.bdc_encode_binning if config.encoder == "binning" else schemes.bdc_encode_additive
        res = enc(code, m, s)
        wrong = bool((schemes.bdc_decode(code, apply_circ(res.codeword, s)) != m).any())
        return not res.masked, False, not res.masked, wrong

    res = schemes.bdec_encode(code, m, s)
    y = apply_erasures(apply_circ(res.codeword, s), config.alpha, rng, protect=s != NORMAL)
    wrong = bool((schemes.bdec_decode(code, y, rng, method=config.decoder).message != m).any())
    fail_d = res.masked and wrong
    return not res.masked, fail_d, (not res.masked) or fail_d, wrong


def _run_chunk(config: ExperimentConfig, start: int, stop: int) -> tuple[int, int, int, int]:
    code = _code_for(config)
    tally = np.zeros(4, dtype=np.int64)
    for trial in range(start, stop):
        tally += _one_trial(config, code, trial)
    return tuple(int(v) for v in tally)


def run_trials(config: ExperimentConfig, chunk: int = 2000) -> SimResult:
    """Simulate ``config.trials`` independent encode/channel/decode rounds."""
    code = _code_for(config)  # rejects unrealizable codes before any trial
    t0 = time.perf_counter()
    spans = [(a, min(a + chunk, config.trials)) for a in range(0, config.trials, chunk)]
    if config.workers > 1 and len(spans) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(_run_chunk, [config] * len(spans), *zip(*spans)))
    else:
        parts = [_run_chunk(config, a, b) for a, b in spans]
    fM, fD, fmsg, merr = (sum(p[i] for p in parts) for i in range(4))
    l = code.l if isinstance(code, PartitionedCode) else 0  # noqa: E741
    r = code.r if isinstance(code, PartitionedCode) else code.n - code.k
    out = SimResult(
        config.channel, config.alpha, config.beta, code.n, code.k, l, r, config.trials,
        fM, fD, fmsg, merr, config.seed, _bound_for(config, code),
        wall_time=time.perf_counter() - t0,
    )
    for event, count in (("M", fM), ("D", fD), ("msg", fmsg)):
        out.p_hat[event] = count / config.trials if config.trials else 0.0
        out.ci[event] = proportion_ci(count, config.trials, out.ci_level)
    return out


# ---------------------------------------------------------------------------
# exhaustive oracles


ORACLE_MAX_N = 20


def subset_ranks(M) -> np.ndarray:
    """rank(M[rows in mask]) for every row subset mask in [0, 2^rows)."""
    M = gf2.as_bits(M, ndim=2)
    n, cols = M.shape
    if n > ORACLE_MAX_N:
        raise codes.BudgetExceeded(f"subset enumeration needs n <= {ORACLE_MAX_N}, got {n}")
    total = 1 << n
    if cols == 0:
        return np.zeros(total, dtype=np.int64)
    out = np.empty(total, dtype=np.int64)
    step = 1 << 14
    bitpos = np.arange(n)
    for a in range(0, total, step):
        masks = np.arange(a, min(a + step, total))
        sel = ((masks[:, None] >> bitpos) & 1).astype(np.uint8)
        out[a : a + len(masks)] = gf2.batch_rank(sel[:, :, None] * M[None, :, :])
    return out


def _popcounts(n: int) -> np.ndarray:
    return np.bitwise_count(np.arange(1 << n, dtype=np.uint64)).astype(np.int64)


@dataclass(frozen=True)
class ExactResult:
    p_D: float  # P(M = 1, D = 0) for the combined channel
    p_M: float
    p_msg: float
    conditional: dict  # count -> P(failure | count) for the channel's own event


def _pattern_probs(n: int, p: float) -> np.ndarray:
    w = _popcounts(n)
    return p**w * (1 - p) ** (n - w)


def _conditional(weights: np.ndarray, fail: np.ndarray) -> dict:
    out = {}
    for e in range(int(weights.max()) + 1):
        sel = weights == e
        out[e] = float(fail[sel].mean())
    return out


def exact_failure_small(code, channel: str, params: ChannelParams, stuck_values: str = "auto") -> ExactResult:
    """Failure probabilities by enumerating every erasure and defect pattern.

    Random tie-breaks are credited analytically: with j free variables the
    decoder is right with probability 2^-j. For the defect channel the stuck
    values are enumerated outright when n <= 10 (``stuck_values="enumerate"``)
    and otherwise credited as the 2^-j fraction of consistent right-hand
    sides.
    """
    channel = channel.lower()
    n = code.n
    if n > ORACLE_MAX_N:
        raise codes.BudgetExceeded(f"exact oracle needs n <= {ORACLE_MAX_N}, got n={n}")
    weights = _popcounts(n)
    full = (1 << n) - 1

    if channel == "bec":
        G = code.G if isinstance(code, LinearCode) else code.G1
        # rank over unerased rows: mask of V = complement of E
        rk = subset_ranks(G)
        fail_by_E = 1.0 - 2.0 ** -(G.shape[1] - rk[full ^ np.arange(1 << n)])
        p = float(np.dot(_pattern_probs(n, params.alpha), fail_by_E))
        return ExactResult(p, 0.0, p, _conditional(weights, fail_by_E))

    if not isinstance(code, PartitionedCode):
        raise TypeError(f"{channel} oracle needs a PartitionedCode")
    if channel == "bdc":
        fail_by_U = masking_failure_by_pattern(code, stuck_values)
        p = float(np.dot(_pattern_probs(n, params.beta), fail_by_U))
        return ExactResult(0.0, p, p, _conditional(weights, fail_by_U))

    if channel != "bdec":
        raise ValueError(f"unknown channel {channel!r}")
    if n > 14:
        raise codes.BudgetExceeded("combined-channel oracle needs n <= 14")
    fail_M = masking_failure_by_pattern(code, "analytic")
    rk_t = subset_ranks(code.Gtilde)
    rk_0 = subset_ranks(code.G0)
    kl = code.k + code.l
    # unerased set V: message ambiguity = free dims of Gtilde[V] beyond those of G0[V]
    fail_D_by_V = 1.0 - 2.0 ** -((kl - rk_t) - (code.l - rk_0))
    masks = np.arange(1 << n)
    pU = _pattern_probs(n, params.beta)
    p_M = float(np.dot(pU, fail_M))
    p_D = 0.0
    for U in range(1 << n):
        E = masks[(masks & U) == 0]  # erasures only on normal cells
        pe = params.alpha ** weights[E] * (1 - params.alpha) ** (n - weights[U] - weights[E])
        p_D += pU[U] * (1.0 - fail_M[U]) * float(np.dot(pe, fail_D_by_V[full ^ E]))
    return ExactResult(p_D, p_M, p_M + p_D, {})


def masking_failure_by_pattern(code: PartitionedCode, stuck_values: str) -> np.ndarray:
    n = code.n
    rk = subset_ranks(code.G0)
    u = _popcounts(n)
    if stuck_values == "auto":
        stuck_values = "enumerate" if n <= 10 else "analytic"
    if stuck_values == "analytic":
        return 1.0 - 2.0 ** -(u - rk)
    if stuck_values != "enumerate":
        raise ValueError(f"unknown stuck-value mode {stuck_values!r}")
    # every stuck assignment s on U: masking fails iff rank([G0[U] | s]) > rank(G0[U])
    out = np.empty(1 << n)
    for U in range(1 << n):
        rows = [i for i in range(n) if U >> i & 1]
        if not rows:
            out[U] = 0.0
            continue
        A = code.G0[rows]
        svals = ((np.arange(1 << len(rows))[:, None] >> np.arange(len(rows))) & 1).astype(np.uint8)
        aug = np.concatenate([np.broadcast_to(A, (len(svals),) + A.shape), svals[:, :, None]], axis=2)
        out[U] = float(np.mean(gf2.batch_rank(aug) > rk[U]))
    return out


# ---------------------------------------------------------------------------
# duality


@dataclass(frozen=True)
class DualityRow:
    name: str
    n: int
    k: int
    p: float  # alpha = beta
    method: str  # "exact" or "monte-carlo"
    p_decode_fail: float
    p_mask_fail: float
    ci_decode: Interval | None = None
    ci_mask: Interval | None = None

    @property
    def agree(self) -> bool:
        if self.method == "exact":
            return abs(self.p_decode_fail - self.p_mask_fail) <= 1e-12
        return self.ci_decode.lo <= self.ci_mask.hi and self.ci_mask.lo <= self.ci_decode.hi


DUALITY_CODES = {
    "hamming74": {"family": "hamming74"},
    "hamming15": {"family": "bch", "m": 4, "t": 1},
    "bch1023": {"family": "bch", "m": 10, "t": 10},
}


def duality_check(sizes=("hamming74", "hamming15"), p: float = 0.1, trials: int = 100_000,
                  seed: int = 0, workers: int = 1) -> list[DualityRow]:
    """Compare P(D = 0) of a code on the erasure channel with P(M = 0) of
    the matched defect code (G0 = H, so both see the same weights) at alpha = beta = p."""
    rows = []
    for name in sizes:
        desc = DUALITY_CODES[name] if isinstance(name, str) else name
        label = name if isinstance(name, str) else json.dumps(name)
        bec_code = codes.build_code(desc)
        if bec_code.n <= ORACLE_MAX_N:
            pdc = codes.masking_dual_of(bec_code)
            a = exact_failure_small(bec_code, "bec", ChannelParams(alpha=p)).p_D
            b = exact_failure_small(pdc, "bdc", ChannelParams(beta=p)).p_M
            rows.append(DualityRow(label, bec_code.n, bec_code.k, p, "exact", a, b))
            continue
        cfg_a = ExperimentConfig("bec", desc, alpha=p, trials=trials, seed=seed, workers=workers)
        cfg_b = ExperimentConfig("bdc", {"family": "masking_dual", "of": desc}, beta=p,
                                 trials=trials, seed=seed + 1, workers=workers)
        ra, rb = run_trials(cfg_a), run_trials(cfg_b)
        rows.append(DualityRow(label, bec_code.n, bec_code.k, p, "monte-carlo",
                               ra.p_hat["D"], rb.p_hat["M"], ra.ci["D"], rb.ci["M"]))
    return rows


# ---------------------------------------------------------------------------
# table reproduction


def reproduce_tables(trials: int = 0, seed: int = 0, workers: int = 1, n: int = 1023, k: int = 923) -> dict:
    """CSV texts for the capacity-0.95 channel study.

    Keys: ``channels`` (capacity check), ``objective`` (per-candidate bound
    curve), ``allocation`` (l_hat, l_tilde, regime per channel) and, when
    ``trials > 0``, ``simulation`` (simulated failure rate per candidate).
    """
    cands = alloc.candidate_table_1023() if (n, k) == (1023, 923) else alloc.integer_candidates(n, k)
    out = {}

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["channel", "alpha", "beta", "capacity"])
    for ch, a, b in TABLE_CHANNELS:
        w.writerow([ch, a, b, f"{ChannelParams(a, b).capacity_bdec:.6f}"])
    out["channels"] = buf.getvalue()

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["channel", "l", "r", "d0", "d1", "log2_objective", "bound"])
    alloc_rows = []
    for ch, a, b in TABLE_CHANNELS:
        sol = alloc.allocate(n, k, a, b, cands)
        alloc_rows.append((ch, a, b, sol))
        for c in sol.candidates:
            fb = bounds.bdec_finite_bound(n, k, c.l, c.r, a, b)
            w.writerow([ch, c.l, c.r, c.d0, c.d1, f"{c.objective:.6f}", f"{fb.value:.6g}"])
    out["objective"] = buf.getvalue()

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["channel", "alpha", "beta", "l_hat", "r_hat", "l_tilde", "r_tilde", "regime"])
    for ch, a, b, sol in alloc_rows:
        w.writerow([ch, a, b, sol.l_hat, sol.r_hat, f"{sol.l_tilde:.1f}", f"{sol.r_tilde:.1f}", sol.regime.value])
    out["allocation"] = buf.getvalue()

    if trials > 0:
        rows = []
        for ch, a, b in TABLE_CHANNELS:
            for c in cands:
                cfg = ExperimentConfig("bdec", {"family": "pbch", "n": n, "k": k, "l": c.l},
                                       alpha=a, beta=b, trials=trials, seed=seed, workers=workers)
                rows.append(run_trials(cfg).row(run_id=f"ch{ch}-l{c.l}"))
        out["simulation"] = write_results_csv(rows)
    return out
