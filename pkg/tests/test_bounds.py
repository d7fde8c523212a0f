import itertools
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bdec import bounds, codes
from bdec.bounds import BoundKind
from bdec.channels import ChannelParams
from oracles import naive_rank


def brute_bec_conditional(G, e):
    """Average over e-sets of 1 - 2^-(k - rank G[V]) by direct elimination."""
    n, k = G.shape
    total = Fraction(0)
    sets = list(itertools.combinations(range(n), e))
    for E in sets:
        V = [i for i in range(n) if i not in E]
        j = k - naive_rank(G[V].tolist())
        total += 1 - Fraction(1, 2**j)
    return total / len(sets)


@pytest.mark.parametrize("code", [codes.hamming_7_4(), codes.bch_code(4, 1)], ids=["7_4", "15_11"])
def test_exact_window_and_upper_domination(code):
    n = code.n
    wd = codes.weight_distribution_exact(code.G)
    d = wd.min_nonzero_weight()
    t = (d - 1) // 2
    for e in range(n + 1):
        truth = brute_bec_conditional(code.G, e)
        bv = bounds.bec_failure_profile(n, wd, d, e)
        if e < d:
            assert bv.kind is BoundKind.ZERO and truth == 0
        elif e <= d + t:
            assert bv.kind is BoundKind.EXACT
            assert bv.value == pytest.approx(float(truth), abs=1e-12)
        else:
            assert bv.kind is BoundKind.UPPER
            assert bv.value >= float(truth) - 1e-12


def test_hamming_exact_values():
    wd = codes.weight_distribution_exact(codes.hamming_7_4().G)
    assert bounds.bec_failure_profile(7, wd, 3, 3).value == pytest.approx(0.1, abs=1e-12)
    assert bounds.bec_failure_profile(7, wd, 3, 4).value == pytest.approx(0.5, abs=1e-12)


def test_profile_rejects_bad_count():
    wd = codes.weight_distribution_binomial(7, 3)
    with pytest.raises(ValueError):
        bounds.bec_failure_profile(7, wd, 3, 8)


def test_profile_monotone_in_distance():
    n = 63
    for e in range(1, n + 1):
        vals = [bounds.bec_failure_profile(n, codes.weight_distribution_binomial(n, r), d, e).value
                for r, d in [(6, 3), (12, 5), (18, 7)]]
        assert vals[0] >= vals[1] >= vals[2]


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2048), st.data())
def test_log_comb_matches_exact(n, data):
    k = data.draw(st.integers(0, n))
    exact = math.log(math.comb(n, k)) if n < 1000 else float(mpmath.log(mpmath.binomial(n, k)))
    assert bounds.log_comb(n, k) == pytest.approx(exact, rel=1e-9, abs=1e-9)


def test_finite_bound_exact_rational():
    n, k, l, r = 15, 7, 4, 4
    a, b = Fraction(1, 10), Fraction(1, 5)
    truth = Fraction(1, 2**l) * (1 + b) ** n + Fraction(1, 2**r) * (1 + a * (1 - b)) ** n
    fb = bounds.bdec_finite_bound(n, k, l, r, 0.1, 0.2)
    assert fb.value == pytest.approx(float(truth), rel=1e-12)
    assert fb.clamped == 1.0


def test_finite_bound_high_precision_1023():
    mpmath.mp.dps = 50
    a = b = mpmath.mpf("0.0253")
    truth = mpmath.mpf(2) ** -50 * (1 + b) ** 1023 + mpmath.mpf(2) ** -50 * (1 + a * (1 - b)) ** 1023
    fb = bounds.bdec_finite_bound(1023, 923, 50, 50, 0.0253, 0.0253)
    assert abs(fb.value - float(truth)) <= 1e-9 * float(truth)
    assert fb.log2_value == pytest.approx(float(mpmath.log(truth, 2)), rel=1e-12)


def test_finite_bound_reductions():
    n, r, l = 255, 30, 20
    fb = bounds.bdec_finite_bound(n, n - l - r, l, r, 0.05, 0.0)
    assert fb.erasure_term == pytest.approx(bounds.bec_finite_bound(n, r, 0.05), rel=1e-12)
    fb = bounds.bdec_finite_bound(n, n - l - r, l, r, 0.0, 0.05)
    assert fb.masking_term == pytest.approx(bounds.bdc_finite_bound(n, l, 0.05), rel=1e-12)
    assert bounds.bec_finite_bound(n, r, 0.0) == 2.0**-r


def test_finite_bound_all_zero_probabilities():
    fb = bounds.bdec_finite_bound(1023, 923, 50, 50, 0, 0)
    assert fb.value == pytest.approx(2.0**-49, rel=1e-12)


def test_finite_bound_checks_budget():
    with pytest.raises(ValueError):
        bounds.bdec_finite_bound(1023, 923, 50, 40, 0.1, 0.1)


def test_finite_bound_may_exceed_one():
    fb = bounds.bdec_finite_bound(1023, 923, 0, 100, 0.0404, 0.01)
    assert fb.value > 1 and fb.clamped == 1.0


def test_log_forms_and_slope():
    rate = 0.7
    for n in (100, 500, 1022):
        diff = bounds.bec_log2_bound(n + 1, rate, 0.1) - bounds.bec_log2_bound(n, rate, 0.1)
        assert diff == pytest.approx(rate - 1 + math.log2(1.1), abs=1e-9)
    assert bounds.zero_crossing_rate(0.1) == pytest.approx(0.8625, abs=5e-5)
    assert bounds.bdc_log2_bound(10, 0.5, 0.1) == bounds.bec_log2_bound(10, 0.5, 0.1)


def test_rank_deficiency_exhaustive_3x2():
    deficient = sum(
        naive_rank(np.array(bits).reshape(3, 2).tolist()) < 2 for bits in itertools.product((0, 1), repeat=6)
    )
    rd = bounds.rank_deficiency_prob(3, 2)
    assert rd.exact == pytest.approx(deficient / 64) == pytest.approx(0.34375)
    assert rd.approx == 0.5


def test_rank_deficiency_square_and_symmetry():
    assert bounds.rank_deficiency_prob(1, 1).exact == 0.5
    assert bounds.rank_deficiency_prob(10, 20).exact == bounds.rank_deficiency_prob(20, 10).exact
    rd = bounds.rank_deficiency_prob(10, 20)
    assert rd.exact <= rd.approx


def test_capacity_dispatch():
    p = ChannelParams(0.1, 0.2)
    assert bounds.capacity(p, "BEC") == pytest.approx(0.9)
    assert bounds.capacity(p, "bdc") == pytest.approx(0.8)
    assert bounds.capacity(p, "bdec") == pytest.approx(0.72)
    with pytest.raises(ValueError):
        bounds.capacity(p, "bsc")


def test_bound_value_validation():
    with pytest.raises(ValueError):
        bounds.BoundValue(BoundKind.ZERO, 0.1)
    with pytest.raises(ValueError):
        bounds.BoundValue(BoundKind.UPPER, 1.5)
