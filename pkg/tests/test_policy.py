from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import chisquare

from sicta.analytic import compositions, multinomial_pmf
from sicta.policy import (
    DegeneratePolicyError,
    NegativeProbabilityError,
    PolicyError,
    ProbabilitySumError,
    SplittingFactorError,
    biased,
    custom,
    fair,
    from_name,
    sample_split,
)


def test_fair_is_uniform():
    assert fair(2).probs == (0.5, 0.5)
    assert fair(3).exact == (Fraction(1, 3),) * 3
    assert fair(3).probs == pytest.approx((1 / 3,) * 3)


@pytest.mark.parametrize("bad", [1, 0, -3])
def test_fair_rejects_small_d(bad):
    with pytest.raises(SplittingFactorError, match="d must be >= 2"):
        fair(bad)


def test_biased_matches_geometric_law():
    assert biased(2).probs == (0.5, 0.5)
    assert biased(3).probs == (0.5, 0.25, 0.25)
    assert biased(4).probs == (0.5, 0.25, 0.125, 0.125)
    with pytest.raises(SplittingFactorError):
        biased(1)


@pytest.mark.parametrize("d", range(2, 40))
def test_biased_sums_to_one_exactly(d):
    p = biased(d)
    assert sum(p.exact) == 1
    assert sum(p.probs) == 1.0


def test_custom_validation_errors_are_distinct():
    assert custom([0.7, 0.3]).exact == (Fraction(7, 10), Fraction(3, 10))
    with pytest.raises(DegeneratePolicyError):
        custom([1.0, 0.0])
    with pytest.raises(ProbabilitySumError):
        custom([0.5, 0.4])
    with pytest.raises(NegativeProbabilityError):
        custom([1.2, -0.2])
    with pytest.raises(SplittingFactorError):
        custom([1.0])


def test_custom_accepts_fractions_and_strings():
    p = custom(["1/2", Fraction(1, 4), "0.25"])
    assert p.exact == (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4))
    assert p.d == 3


def test_custom_float_thirds_renormalised_exactly():
    p = custom([1 / 3, 1 / 3, 1 / 3])
    assert sum(p.exact) == 1


def test_zero_groups_allowed():
    p = custom([0.5, 0.0, 0.5])
    assert p.cumulative.tolist() == [0.5, 0.5, 1.0]


def test_from_name():
    assert from_name("biased", 3) == biased(3)
    assert from_name("custom", None, ["0.5", "0.25", "0.25"]).d == 3
    with pytest.raises(PolicyError):
        from_name("custom", 2, None)
    with pytest.raises(PolicyError):
        from_name("custom", 2, ["0.5", "0.25", "0.25"])
    with pytest.raises(PolicyError):
        from_name("greedy", 2)


@given(st.integers(2, 30))
def test_constructors_pass_custom_validation(d):
    for p in (fair(d), biased(d)):
        assert custom(p.exact).exact == p.exact


@given(st.integers(0, 200), st.integers(2, 6), st.integers(0, 2**32 - 1), st.booleans())
def test_sample_split_conserves_users(n, d, seed, use_biased):
    policy = biased(d) if use_biased else fair(d)
    occ = sample_split(policy, n, np.random.default_rng(seed))
    assert occ.shape == (d,)
    assert occ.sum() == n
    assert (occ >= 0).all()


def test_sample_split_empty(rng):
    assert sample_split(fair(4), 0, rng).tolist() == [0, 0, 0, 0]


def test_single_user_is_a_fair_coin(rng):
    draws = np.array([sample_split(fair(2), 1, rng) for _ in range(100_000)])
    assert draws[:, 0].mean() == pytest.approx(0.5, abs=0.01)


def test_pair_split_frequency(rng):
    hits = sum(tuple(sample_split(fair(3), 2, rng)) == (1, 1, 0) for _ in range(100_000))
    assert hits / 100_000 == pytest.approx(2 / 9, abs=0.005)


def test_zero_probability_group_never_chosen(rng):
    policy = custom([0.5, 0.0, 0.5])
    for _ in range(2000):
        assert sample_split(policy, 5, rng)[1] == 0


@pytest.mark.parametrize("n,d", [(2, 2), (3, 3), (4, 2), (4, 3)])
@pytest.mark.parametrize("make", [fair, biased])
def test_sample_split_chi_square(n, d, make, rng):
    policy = make(d)
    comps = list(compositions(n, d))
    index = {c: k for k, c in enumerate(comps)}
    counts = np.zeros(len(comps))
    draws = 100_000
    for _ in range(draws):
        counts[index[tuple(int(x) for x in sample_split(policy, n, rng))]] += 1
    expected = np.array([float(multinomial_pmf(c, n, policy, exact=True)) for c in comps]) * draws
    assert chisquare(counts, expected).pvalue > 0.001
