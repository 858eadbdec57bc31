import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pinchlab import CurvatureTuple, elem_sym, maclaurin_chain, normalized_Hk
from pinchlab.symfunc import power_sums


def elem_sym_bruteforce(kappa, k):
    """Oracle: explicit sum over all k-subsets."""
    if k == 0:
        return 1.0
    return float(sum(math.prod(c) for c in itertools.combinations(kappa, k)))


def test_e2_of_123_is_11():
    t = CurvatureTuple(np.array([1.0, 2.0, 3.0]))
    assert elem_sym_bruteforce([1.0, 2.0, 3.0], 2) == 11.0
    assert elem_sym(t, 2) == pytest.approx(11.0, rel=1e-14)


def test_constant_tuple_binomials():
    for n in (1, 3, 7):
        for c in (0.5, -2.0):
            t = CurvatureTuple(np.full(n, c))
            for k in range(n + 1):
                assert elem_sym(t, k) == pytest.approx(math.comb(n, k) * c ** k, rel=1e-12)


def test_e0_is_one_and_range_checks():
    t = CurvatureTuple(np.array([4.0, -1.0]))
    assert elem_sym(t, 0) == 1.0
    with pytest.raises(ValueError):
        elem_sym(t, 3)
    with pytest.raises(ValueError):
        elem_sym(t, -1)
    with pytest.raises(ValueError):
        normalized_Hk(t, 4)


def test_normalized_hk_sphere_tuple():
    for rr in (0.5, 1.0, 3.0):
        t = CurvatureTuple(np.full(4, 1.0 / rr))
        for k in range(1, 5):
            assert normalized_Hk(t, k) == pytest.approx(rr ** -k, rel=1e-12)


def test_normalized_hk_conventions():
    t = CurvatureTuple(np.array([1.0, 2.0]))
    assert normalized_Hk(t, 0) == 1.0
    assert normalized_Hk(t, 3) == 0.0
    assert normalized_Hk(t, 2) == pytest.approx(2.0, rel=1e-14)


def test_maclaurin_equal_tuple():
    res = maclaurin_chain(CurvatureTuple(np.full(5, 0.7)), 5)
    assert res.hypothesis_ok and res.monotone
    assert np.allclose(res.values, 0.7, rtol=1e-12)


def test_maclaurin_1_4():
    res = maclaurin_chain(CurvatureTuple(np.array([1.0, 4.0])), 2)
    assert res.hypothesis_ok and res.monotone
    assert res.values[0] == pytest.approx(2.5, rel=1e-14)
    assert res.values[1] == pytest.approx(2.0, rel=1e-14)


def test_maclaurin_hypothesis_violation():
    res = maclaurin_chain(CurvatureTuple(np.array([1.0, -2.0])), 2)
    assert not res.hypothesis_ok
    assert not res.monotone
    assert res.values.size == 0


@given(
    st.lists(st.floats(min_value=-3.0, max_value=3.0), min_size=1, max_size=10),
    st.randoms(use_true_random=False),
)
@settings(max_examples=200, deadline=None)
def test_permutation_invariance(kappa, rand):
    t = CurvatureTuple(np.array(kappa))
    shuffled = list(kappa)
    rand.shuffle(shuffled)
    ts = CurvatureTuple(np.array(shuffled))
    for k in range(len(kappa) + 1):
        assert elem_sym(t, k) == elem_sym(ts, k)


@given(
    st.lists(st.floats(min_value=-2.0, max_value=2.0), min_size=1, max_size=10),
    st.floats(min_value=0.1, max_value=5.0),
)
@settings(max_examples=200, deadline=None)
def test_homogeneity(kappa, c):
    t = CurvatureTuple(np.array(kappa))
    tc = CurvatureTuple(c * np.array(kappa))
    for k in range(len(kappa) + 1):
        ek = elem_sym(t, k)
        scale = max(abs(ek) * c ** k, 1e-30)
        assert abs(elem_sym(tc, k) - c ** k * ek) <= 1e-12 * scale


@given(st.lists(st.floats(min_value=-2.0, max_value=2.0), min_size=1, max_size=8))
@settings(max_examples=200, deadline=None)
def test_elem_sym_matches_bruteforce(kappa):
    t = CurvatureTuple(np.array(kappa))
    for k in range(len(kappa) + 1):
        oracle = elem_sym_bruteforce(kappa, k)
        scale = max(1.0, sum(abs(math.prod(c)) for c in itertools.combinations(kappa, k)))
        assert abs(elem_sym(t, k) - oracle) <= 1e-12 * scale


def test_newton_identities_random_tuples():
    # k e_k = sum_{i=1..k} (-1)^(i-1) e_{k-i} p_i on signed random tuples.
    # The relative scale uses absolute power sums so cancellation inside
    # e_k / p_i does not masquerade as an identity violation.
    gen = np.random.default_rng(7)
    for _ in range(1000):
        n = int(gen.integers(1, 13))
        kappa = gen.uniform(-2.0, 2.0, size=n)
        t = CurvatureTuple(kappa)
        t_abs = CurvatureTuple(np.abs(kappa))
        e = [elem_sym(t, k) for k in range(n + 1)]
        e_abs = [elem_sym(t_abs, k) for k in range(n + 1)]
        p = power_sums(t, n)
        p_abs = power_sums(t_abs, n)
        for k in range(1, n + 1):
            terms = [(-1) ** (i - 1) * e[k - i] * p[i - 1] for i in range(1, k + 1)]
            scale = max(
                sum(e_abs[k - i] * p_abs[i - 1] for i in range(1, k + 1)), 1e-30
            )
            assert abs(k * e[k] - sum(terms)) <= 1e-12 * scale


def test_maclaurin_positive_tuples():
    gen = np.random.default_rng(11)
    for _ in range(1000):
        n = int(gen.integers(1, 13))
        kappa = gen.uniform(0.05, 4.0, size=n)
        res = maclaurin_chain(CurvatureTuple(kappa), n)
        assert res.hypothesis_ok
        assert res.monotone
