"""Acceptance checks, one per criterion.

Each check prints a single ``criterion N: PASS|FAIL ...`` line. Run under
pytest, or directly with ``python tests/test_acceptance.py`` for just the
summary lines.
"""

import itertools
import math
import sys
import time

import numpy as np
import pytest

from bdec import alloc, bounds, codes, gf2, harness, schemes
from bdec.channels import ERASED, NORMAL, ChannelParams, apply_circ
from bdec.harness import ExperimentConfig

TABLE_L_TILDE = [0.0, 28.4, 42.8, 50.5, 58.1, 72.2, 100.0]
TABLE_L_HAT = [0, 30, 40, 50, 60, 70, 100]
TABLE_D = [(0, 21), (3, 19), (5, 17), (7, 15), (9, 13), (11, 11), (13, 9), (15, 7), (17, 5), (19, 3), (21, 0)]


def _report(num, ok, detail, capsys=None):
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}"
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line, flush=True)
    return ok


# ---------------------------------------------------------------------------


def check_allocation_table():
    t0 = time.perf_counter()
    cands = alloc.candidate_table_1023()
    got = [alloc.allocate(1023, 923, a, b, cands) for _, a, b in harness.TABLE_CHANNELS]
    dt = time.perf_counter() - t0
    ok_hat = [s.l_hat for s in got] == TABLE_L_HAT
    ok_tilde = all(abs(s.l_tilde - want) <= 0.05 for s, want in zip(got, TABLE_L_TILDE))
    detail = (f"l_hat={[s.l_hat for s in got]} l_tilde={[round(s.l_tilde, 2) for s in got]} "
              f"time={dt:.3f}s")
    return ok_hat and ok_tilde and dt < 1.0, detail


def check_pbch_structure():
    t0 = time.perf_counter()
    got = []
    for l in range(0, 101, 10):
        p = codes.make_pbch(1023, 923, l)
        assert gf2.rank(p.Gtilde) == 923 + l
        got.append((p.d0, p.d1))
    dt = time.perf_counter() - t0
    return got == TABLE_D and dt < 10.0, f"(d0,d1)={got} time={dt:.2f}s"


def _masking_profile_truth(code):
    """P(M=0 | u) by enumerating every defect set and every stuck assignment."""
    fail = harness.masking_failure_by_pattern(code, "enumerate" if code.n <= 10 else "analytic")
    u = np.bitwise_count(np.arange(1 << code.n, dtype=np.uint64)).astype(int)
    return {w: float(fail[u == w].mean()) for w in range(code.n + 1)}


def check_exact_window():
    t0 = time.perf_counter()
    worst_exact, worst_upper, checked = 0.0, 0.0, 0
    for lin in (codes.hamming_7_4(), codes.bch_code(4, 1)):
        n = lin.n
        wd = codes.weight_distribution_exact(lin.G)
        d = wd.min_nonzero_weight()
        t = (d - 1) // 2
        erase_truth = harness.exact_failure_small(lin, "bec", ChannelParams(alpha=0.1)).conditional
        mask_truth = _masking_profile_truth(codes.masking_dual_of(lin))
        for truth, profile in ((erase_truth, bounds.bec_failure_profile),
                               (mask_truth, bounds.bdc_failure_profile)):
            for e in range(n + 1):
                bv = profile(n, wd, d, e)
                if d <= e <= d + t:
                    worst_exact = max(worst_exact, abs(bv.value - truth[e]))
                    checked += 1
                elif e > d + t:
                    worst_upper = max(worst_upper, truth[e] - bv.value)
                else:
                    worst_exact = max(worst_exact, abs(truth[e]))
    wd7 = codes.weight_distribution_exact(codes.hamming_7_4().G)
    p3 = bounds.bec_failure_profile(7, wd7, 3, 3).value
    p4 = bounds.bec_failure_profile(7, wd7, 3, 4).value
    dt = time.perf_counter() - t0
    ok = worst_exact <= 1e-12 and worst_upper <= 1e-12 and abs(p3 - 0.1) <= 1e-12 and abs(p4 - 0.5) <= 1e-12
    return ok and dt < 30, (f"[7,4] e=3 -> {p3:.15f}, e=4 -> {p4:.15f}; max exact gap {worst_exact:.1e} over "
                            f"{checked} window points; max upper violation {worst_upper:.1e}; time={dt:.2f}s")


def check_duality(trials=100_000):
    t0 = time.perf_counter()
    rows = harness.duality_check(("hamming74", "hamming15", "bch1023"), p=0.1, trials=trials, seed=2024)
    dt = time.perf_counter() - t0
    parts = []
    for r in rows:
        if r.method == "exact":
            parts.append(f"{r.name}: {r.p_decode_fail:.15g} vs {r.p_mask_fail:.15g}")
        else:
            parts.append(f"{r.name}: [{r.ci_decode.lo:.4f},{r.ci_decode.hi:.4f}] vs "
                         f"[{r.ci_mask.lo:.4f},{r.ci_mask.hi:.4f}] ({trials} trials)")
    ok = all(r.agree for r in rows) and [r.method for r in rows] == ["exact", "exact", "monte-carlo"]
    return ok and dt < 300, "; ".join(parts) + f"; time={dt:.1f}s"


def _erase(c, E):
    y = c.astype(np.int8)
    y[list(E)] = ERASED
    return y


def _states(n, U):
    for vals in itertools.product((0, 1), repeat=len(U)):
        s = np.full(n, NORMAL, np.int8)
        s[list(U)] = vals
        yield s


def check_distance_guarantees():
    t0 = time.perf_counter()
    bad = 0
    cases = 0
    rng = np.random.default_rng(0)
    h = codes.hamming_7_4()
    for m in itertools.product((0, 1), repeat=4):
        m = np.array(m, np.uint8)
        c = schemes.bec_encode(h, m)
        for e in range(3):
            for E in itertools.combinations(range(7), e):
                for dec in (schemes.bec_decode_via_G, schemes.bec_decode_via_H):
                    cases += 1
                    bad += not (dec(h, _erase(c, E), rng).message == m).all()
    hd = codes.masking_dual_of(h)
    for u in range(hd.d0):
        for U in itertools.combinations(range(7), u):
            for s in _states(7, U):
                cases += 1
                bad += not schemes.bdc_encode_additive(hd, np.zeros(hd.k, np.uint8), s).masked
    p = codes.make_pbch(15, 7, 4)
    msgs = [rng.integers(0, 2, p.k, dtype=np.uint8) for _ in range(4)]
    for m in msgs:
        for u in range(p.d0):
            for U in itertools.combinations(range(15), u):
                for s in _states(15, U):
                    res = schemes.bdec_encode(p, m, s)
                    cases += 1
                    bad += not res.masked
                    x = apply_circ(res.codeword, s)
                    normal = [i for i in range(15) if i not in U]
                    for e in range(p.d1):
                        for E in itertools.combinations(normal, e):
                            cases += 1
                            out = schemes.bdec_decode(p, _erase(x, E), rng, method="H")
                            bad += not (out.message == m).all()
    dt = time.perf_counter() - t0
    return bad == 0, f"{cases} cases, {bad} counterexamples; time={dt:.1f}s"


def check_bound_domination(trials=20_000):
    t0 = time.perf_counter()
    p = 0.1
    points, worst = 0, -math.inf
    lines = []
    for m, ts in ((4, (1, 2, 3)), (5, (1, 2, 3, 5))):
        for t in ts:
            lin = codes.bch_code(m, t)
            desc = {"family": "bch", "m": m, "t": t}
            ra = harness.run_trials(ExperimentConfig("bec", desc, alpha=p, trials=trials, seed=7))
            rb = harness.run_trials(ExperimentConfig("bdc", {"family": "masking_dual", "of": desc}, beta=p,
                                                     trials=trials, seed=8))
            for res, event in ((ra, "D"), (rb, "M")):
                slack = res.p_hat[event] - 3 * res.sigma(event) - res.bound
                worst = max(worst, slack)
                points += 1
            lines.append(f"R={lin.k / lin.n:.3f}")
    for k, l in ((45, 6), (39, 12), (33, 12)):
        desc = {"family": "pbch", "n": 63, "k": k, "l": l}
        res = harness.run_trials(ExperimentConfig("bdec", desc, alpha=p, beta=p, trials=trials, seed=9))
        worst = max(worst, res.p_hat["msg"] - 3 * res.sigma("msg") - res.bound)
        points += 1
    slope_err = 0.0
    for rate in (0.3, 0.5, 0.7, 0.9):
        for n in (15, 63, 255, 1023):
            for f in (bounds.bec_log2_bound, bounds.bdc_log2_bound):
                diff = f(n + 1, rate, p) - f(n, rate, p)
                slope_err = max(slope_err, abs(diff - (rate - 1 + math.log2(1.1))))
    dt = time.perf_counter() - t0
    ok = worst <= 0 and slope_err <= 1e-9
    return ok, (f"{points} grid points ({', '.join(lines)} plus 3 combined), max(p_hat - 3 sigma - bound)="
                f"{worst:.3g}; slope error {slope_err:.1e}; time={dt:.1f}s")


def check_rank_deficiency(samples=100_000):
    t0 = time.perf_counter()
    rng = np.random.default_rng(77)
    parts, ok = [], True
    z = 2.5758293035489004  # two-sided 99%
    for v, k in ((20, 10), (12, 10), (3, 2)):
        mats = rng.integers(0, 2, size=(samples, v, k), dtype=np.uint8)
        freq = float(np.mean(gf2.batch_rank(mats) < k))
        rd = bounds.rank_deficiency_prob(v, k)
        half = z * math.sqrt(rd.exact * (1 - rd.exact) / samples)
        inside = abs(freq - rd.exact) <= half
        ok &= inside
        parts.append(f"{v}x{k}: empirical {freq:.5f}, exact {rd.exact:.5f} (+/-{half:.5f}), "
                     f"approx 2^(k-v) {rd.approx:.5f}")
    dt = time.perf_counter() - t0
    return ok, "; ".join(parts) + f"; time={dt:.1f}s"


def check_kkt_stationarity(instances=100):
    rng = np.random.default_rng(5)
    worst, found, tried = 0.0, 0, 0
    while found < instances:
        tried += 1
        n = int(rng.integers(31, 4096))
        k = int(rng.integers(1, n))
        a, b = float(rng.uniform(1e-4, 0.3)), float(rng.uniform(1e-4, 0.3))
        l_t, r_t, regime = alloc.allocate_kkt(n, k, a, b)
        if regime is not alloc.Regime.INTERIOR:
            continue
        found += 1
        lhs = -l_t + n * math.log2(1 + b)
        rhs = -r_t + n * math.log2(1 + a * (1 - b))
        worst = max(worst, abs(2.0 ** (lhs - rhs) - 1.0))
    return worst <= 1e-9, f"{found} interior instances ({tried} drawn), max relative gap {worst:.2e}"


def check_performance(trials=10_000):
    desc = {"family": "pbch", "n": 1023, "k": 923, "l": 50}
    harness.run_trials(ExperimentConfig("bdec", desc, alpha=0.0253, beta=0.0253, trials=5, seed=0))
    cfg = ExperimentConfig("bdec", desc, alpha=0.0253, beta=0.0253, trials=trials, seed=1, workers=1)
    t0 = time.perf_counter()
    serial = harness.run_trials(cfg)
    dt = time.perf_counter() - t0
    small = dict(channel="bdec", code=desc, alpha=0.03, beta=0.03, trials=2000, seed=3)
    one = harness.run_trials(ExperimentConfig(**small, workers=1))
    two = harness.run_trials(ExperimentConfig(**small, workers=2), chunk=250)
    same = one.tallies() == two.tallies()
    return dt < 60 and same, (f"{trials} trials in {dt:.1f}s single-threaded "
                              f"(p_hat={serial.p_hat['msg']:.2e}); 1 vs 2 workers tallies "
                              f"{one.tallies()} / {two.tallies()}")


CHECKS = [
    (1, check_allocation_table),
    (2, check_pbch_structure),
    (3, check_exact_window),
    (4, check_duality),
    (5, check_distance_guarantees),
    (6, check_bound_domination),
    (7, check_rank_deficiency),
    (8, check_kkt_stationarity),
    (9, check_performance),
]


@pytest.mark.parametrize("num,check", CHECKS, ids=[f"criterion_{n}" for n, _ in CHECKS])
def test_criterion(num, check, capsys):
    ok, detail = check()
    assert _report(num, ok, detail, capsys), detail


if __name__ == "__main__":
    results = [_report(num, *check()) for num, check in CHECKS]
    sys.exit(0 if all(results) else 1)
