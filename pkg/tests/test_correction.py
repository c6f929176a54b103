import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

import sparsegof.correction as corr
from oracles import (
    bisect_a_max,
    bisect_a_min,
    likelihood_instances,
    random_sparse_instance,
    raw_estimator,
    small_partitions,
)
from sparsegof.correction import (
    EmptyInterval,
    InvalidH,
    MismatchError,
    UniformNonzero,
    admissible_a_interval,
    check_likelihood_condition,
    choose_parameters,
    compute_b_min,
    corrected_estimator,
    corrected_g,
    corrected_q,
    fit_correction,
    order_stats,
    partition_zeros,
    verify_inequality_bruteforce,
)
from sparsegof.datasets import load
from sparsegof.statistics import kullback_g, pearson_q
from sparsegof.tables import independence_null, preprocess

CAMARGUE = preprocess(load("camargue"))
CAMARGUE_X = CAMARGUE.flatten()
CAMARGUE_NULL = independence_null(CAMARGUE)[0]


@st.composite
def sparse_counts(draw, max_R=40, max_count=30):
    R = draw(st.integers(3, max_R))
    x = np.array(draw(st.lists(st.integers(0, max_count), min_size=R, max_size=R)))
    c = int(np.sum(x == 0))
    nz = x[x > 0]
    assume(0 < c < R and nz.min() < nz.max())
    return x


def test_partition_examples():
    part = partition_zeros([0, 0, 3, 1])
    assert part.zero_indices == (0, 1) and part.c == 2
    assert partition_zeros([5, 2, 1]).c == 0
    assert partition_zeros(CAMARGUE_X).c == 7
    with pytest.raises(ValueError):
        partition_zeros([0, 0, 0])


def test_order_stats_camargue():
    os_ = order_stats(CAMARGUE_X, partition_zeros(CAMARGUE_X))
    assert sorted(CAMARGUE_X[CAMARGUE_X > 0].tolist()) == sorted([3, 3, 2, 2, 1, 2, 1, 2, 3, 1, 1])
    assert (os_.n_lo, os_.n_hi, os_.n_lolo, os_.n_hihi) == (1, 3, 10, 12)


def test_order_stats_small():
    x = [0, 1, 7]
    os_ = order_stats(x, partition_zeros(x))
    assert (os_.n_lo, os_.n_hi, os_.n_lolo, os_.n_hihi) == (1, 7, 6, 6)


def test_uniform_nonzero_rejected():
    with pytest.raises(UniformNonzero):
        order_stats([2, 2, 2, 2], partition_zeros([2, 2, 2, 2]))
    with pytest.raises(UniformNonzero):
        fit_correction([0, 3, 3, 0])


def test_b_min_camargue():
    os_ = order_stats(CAMARGUE_X, partition_zeros(CAMARGUE_X))
    expected = max(0, math.log(12 / 17), math.log(10), math.log(2)) / math.log(21)
    assert expected == math.log(10) / math.log(21)
    assert compute_b_min(21, 18, os_) == pytest.approx(expected, rel=1e-15)
    assert expected == pytest.approx(0.7563, abs=1e-4)


def test_b_min_clamps_at_zero():
    # n_lolo = 1, n_hi - n_lo = 1, n_hihi / (R - 1) = 1/2: every log term is <= 0
    x = [0, 1, 2]
    assert compute_b_min(3, 3, order_stats(x, partition_zeros(x))) == 0.0


@given(sparse_counts())
@settings(max_examples=300)
def test_b_min_below_one(x):
    part = partition_zeros(x)
    assert compute_b_min(int(x.sum()), x.size, order_stats(x, part)) < 1


def test_b_camargue():
    os_ = order_stats(CAMARGUE_X, partition_zeros(CAMARGUE_X))
    prm = choose_parameters(21, 18, 7, os_)
    assert prm.b == pytest.approx(0.1 + 0.9 * math.log(10) / math.log(21), rel=1e-14)
    assert prm.b == pytest.approx(0.78067, abs=1e-5)


def test_a_interval_camargue_against_bisection():
    os_ = order_stats(CAMARGUE_X, partition_zeros(CAMARGUE_X))
    b = 0.1 + 0.9 * math.log(10) / math.log(21)
    a_min, a_max = admissible_a_interval(21, 18, 7, os_, b)
    nb = 21**b
    assert nb == pytest.approx(10.77, abs=0.01)
    # hand evaluation: the likelihood-condition term binds, (n^b - 10) / (n^b (21*11 + 7))
    assert a_max == pytest.approx((nb - 10) / (nb * 238), rel=1e-14)
    assert a_max == pytest.approx(3.0045e-4, abs=1e-8)
    assert a_max == pytest.approx(bisect_a_max(CAMARGUE_X, b), rel=1e-9)
    assert a_min == 0.0 == bisect_a_min(CAMARGUE_X, b)


def test_printed_upper_bound_breaks_likelihood_condition():
    # using min count instead of n - min*(R-c) in the numerator gives ~0.003811,
    # for which empty cells are far more than 1/n of the smallest observed cell
    b = 0.1 + 0.9 * math.log(10) / math.log(21)
    nb = 21**b
    printed = min(1, (nb - 1) / (7 * nb), (nb - 1) / (nb * 238))
    assert printed == pytest.approx(0.003811, abs=1e-6)
    p = raw_estimator(CAMARGUE_X, printed * (1 - 1e-4), b)
    assert not check_likelihood_condition(p, partition_zeros(CAMARGUE_X), 21)


def test_bounds_match_bisection_on_random_instances():
    rng = np.random.default_rng(3)
    for _ in range(200):
        x, _ = random_sparse_instance(rng, r_range=(3, 60), n_range=(5, 300))
        part = partition_zeros(x)
        n = int(x.sum())
        os_ = order_stats(x, part)
        b_min = compute_b_min(n, x.size, os_)
        for b in (b_min + 0.1 * (1 - b_min), b_min + 0.5 * (1 - b_min)):
            a_min, a_max = admissible_a_interval(n, x.size, part.c, os_, b)
            assert a_max == pytest.approx(bisect_a_max(x, b), rel=1e-9, abs=1e-15)
            assert a_min == pytest.approx(bisect_a_min(x, b), rel=1e-9, abs=1e-12)


def test_empty_interval_below_b_min():
    os_ = order_stats(CAMARGUE_X, partition_zeros(CAMARGUE_X))
    # 21**0.5 < n_lolo = 10, so every upper bound is negative
    with pytest.raises(EmptyInterval) as err:
        admissible_a_interval(21, 18, 7, os_, 0.5)
    assert err.value.a_max < 0 and err.value.c == 7


def test_no_empty_interval_on_small_tables():
    """Exhaustive scan: every sparse, non-uniform count vector with n <= 50 and
    R <= 6 (up to cell order) admits a parameter choice."""
    checked = 0
    for R in range(2, 7):
        for n in range(1, 51):
            for x in small_partitions(n, R):
                if x[-1] != 0 or x[0] == x[R - 1 - x.count(0)]:
                    continue
                part = partition_zeros(x)
                os_ = order_stats(x, part)
                prm = choose_parameters(n, R, part.c, os_)
                assert prm.a_min < prm.a < prm.a_max
                checked += 1
    assert checked > 20_000


def test_choose_parameters_identity_for_c0():
    prm = choose_parameters(10, 3, 0, None, h=0.37)
    assert (prm.a, prm.b, prm.d) == (0.0, 1.0, 0.0)


@pytest.mark.parametrize("h", [0.0, 1.0, -0.1, 1.5])
def test_invalid_h(h):
    os_ = order_stats(CAMARGUE_X, partition_zeros(CAMARGUE_X))
    with pytest.raises(InvalidH):
        choose_parameters(21, 18, 7, os_, h=h)


def test_epsilon_override():
    est = fit_correction(CAMARGUE_X, epsilon=1e-5)
    assert est.params.a == pytest.approx(est.params.a_max - 1e-5, rel=1e-12)
    with pytest.raises(corr.CorrectionError):
        fit_correction(CAMARGUE_X, epsilon=1.0)


def test_estimator_c0_is_empirical():
    x = np.array([5, 2, 1, 4])
    est = fit_correction(x)
    assert np.array_equal(est.probs, x / 12)


def test_estimator_camargue():
    est = fit_correction(CAMARGUE_X)
    prm = est.params
    nb = 21**prm.b
    zero = CAMARGUE_X == 0
    assert np.all(est.probs[zero] == prm.a)
    assert np.allclose(est.probs[~zero], CAMARGUE_X[~zero] / nb - prm.d, rtol=0, atol=1e-15)
    assert prm.d == pytest.approx((prm.a * 7 + 21 ** (1 - prm.b) - 1) / 11, rel=1e-14)
    assert est.probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert prm.a == pytest.approx(3.0045e-4, abs=1e-7)


def test_corrected_statistics_reduce_at_c0():
    x = np.array([5, 2, 1, 4])
    null = np.array([0.3, 0.2, 0.2, 0.3])
    est = fit_correction(x)
    assert corrected_q(null, x, est).value == pearson_q(null, x / 12, 12)
    assert corrected_g(null, x, est).value == kullback_g(null, x / 12, 12)


def test_mismatch_detector(monkeypatch):
    est = fit_correction(CAMARGUE_X)
    real_f = corr.closed_form_f
    monkeypatch.setattr(corr, "closed_form_f", lambda p, e: real_f(p, e) + 1e-3)
    with pytest.raises(MismatchError):
        corrected_q(CAMARGUE_NULL, CAMARGUE_X, est)


def test_estimator_out_of_range_is_internal_error():
    part = partition_zeros(CAMARGUE_X)
    good = fit_correction(CAMARGUE_X).params
    bad = corr.CorrectionParams(**{**good.to_dict(), "a": 0.5, "d": (0.5 * 7 + 21 ** (1 - good.b) - 1) / 11})
    with pytest.raises(AssertionError):
        corrected_estimator(CAMARGUE_X, part, bad)


def test_random_corpus_invariants():
    """Estimator and closed-form properties on 500 random sparse instances."""
    rng = np.random.default_rng(20240607)
    for _ in range(500):
        x, null = random_sparse_instance(rng)
        n = int(x.sum())
        est = fit_correction(x)
        prm = est.params
        assert abs(est.probs.sum() - 1) <= 1e-12
        assert np.all((est.probs > 0) & (est.probs < 1))
        assert check_likelihood_condition(est.probs, est.partition, n)
        assert prm.b_min < prm.b < 1 and prm.a_min < prm.a < prm.a_max and prm.a > 0 and prm.d > 0
        q = corrected_q(null, x, est)
        g = corrected_g(null, x, est)
        assert math.isclose(q.value, q.closed_form, rel_tol=1e-9)
        assert math.isclose(g.value, g.closed_form, rel_tol=1e-9)


@given(sparse_counts(max_R=12, max_count=12), st.floats(0.01, 0.99))
@settings(max_examples=200, deadline=None)
def test_any_h_gives_valid_estimator(x, h):
    est = fit_correction(x, h=h)
    assert abs(est.probs.sum() - 1) <= 1e-12
    assert np.all((est.probs > 0) & (est.probs < 1))
    assert check_likelihood_condition(est.probs, est.partition, int(x.sum()))


# --- likelihood condition and its brute-force oracle ------------------------


def test_likelihood_condition_examples():
    assert check_likelihood_condition([0.2, 0.8], partition_zeros([3, 7]), 10)
    p = np.array([0.001, 0.05, 0.949])
    assert check_likelihood_condition(p, partition_zeros([0, 3, 7]), 10)
    assert not check_likelihood_condition(np.array([0.01, 0.05, 0.94]), partition_zeros([0, 3, 7]), 10)


def test_bruteforce_small_case():
    x = [0, 1, 7]
    p = np.array([0.005, 0.3, 0.695])
    part = partition_zeros(x)
    assert check_likelihood_condition(p, part, 8)
    assert verify_inequality_bruteforce(p, x, part)
    assert verify_inequality_bruteforce([0.2, 0.8], [2, 8], partition_zeros([2, 8]))


def test_bruteforce_detects_violation():
    # an empty cell carrying most of the mass makes moving counts into it more likely
    x = [0, 1, 7]
    assert not verify_inequality_bruteforce([0.9, 0.05, 0.05], x, partition_zeros(x))


def test_condition_is_sufficient_not_necessary():
    # the likelihood condition fails here (0.05 > 0.3 / 8) yet the observed vector is still the most likely
    x = [0, 1, 7]
    p = np.array([0.05, 0.3, 0.65])
    part = partition_zeros(x)
    assert not check_likelihood_condition(p, part, 8)
    assert verify_inequality_bruteforce(p, x, part)


def test_likelihood_inequality_small_tables():
    """Every count vector with n <= 8, R <= 3 and c >= 1, against a grid of
    probability vectors satisfying the condition (the R = 4 sweep runs in the
    acceptance suite)."""
    vectors = 0
    for x, p in likelihood_instances(max_R=3):
        part = partition_zeros(x)
        assert check_likelihood_condition(p, part, sum(x))
        assert verify_inequality_bruteforce(p, x, part), (x, p)
        vectors += 1
    assert vectors >= 50
