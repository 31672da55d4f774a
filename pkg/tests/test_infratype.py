import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from setvalued.infratype import (
    estimate_constant,
    infratype_ratio,
    min_sign_norm,
    shevchenko_constant,
    shevchenko_rhs,
)
from setvalued.space import Space, SparseVector

X5 = [[1, 2, 0], [0, -1, 3], [2, 2, 2], [-1, 0, 1], [0.5, -0.5, 0]]

# frozen from the brute-force oracle (all 2^5 sign patterns)
FROZEN = [(1, 1.0), (2, 0.7071067811865476), (math.inf, 0.5), (Fraction(3, 2), 0.7937005259840998)]


@pytest.mark.parametrize("p, want", FROZEN)
def test_min_sign_norm_frozen(p, want):
    assert min_sign_norm(Space(3, p), X5) == pytest.approx(want, abs=1e-12)


def test_min_sign_norm_examples():
    sp = Space(2)
    assert min_sign_norm(sp, [[3, 4]]) == 5
    assert min_sign_norm(sp, [[3, 4], [3, 4]]) == 0
    assert min_sign_norm(sp, [[1, 0], [0, 1]]) == pytest.approx(math.sqrt(2))
    assert min_sign_norm(Space.sparse(), [SparseVector({0: 1}), SparseVector({5: 1})]) == pytest.approx(math.sqrt(2))


def test_min_sign_norm_errors():
    with pytest.raises(ValueError):
        min_sign_norm(Space(2), [])
    with pytest.raises(ValueError):
        min_sign_norm(Space(2), np.ones((21, 2)))
    with pytest.raises(ValueError):
        min_sign_norm(Space(2), [[1, 2, 3]])


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 10), st.sampled_from([1, 1.5, 2, 3, math.inf]))
def test_min_sign_norm_matches_oracle(seed, n, p):
    X = np.random.default_rng(seed).normal(size=(n, 3))
    got = min_sign_norm(Space(3, p), X)
    assert got == pytest.approx(oracles.min_sign_norm(X, p), rel=1e-9, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 12))
def test_hilbert_ratio_at_most_one(seed, n):
    # parallelogram law: some signing has ||sum||^2 <= sum ||x||^2
    X = np.random.default_rng(seed).normal(size=(n, 4)) * 3
    assert infratype_ratio(Space(4), X, 2) <= 1 + 1e-12


def test_l1_pair_ratio():
    assert infratype_ratio(Space(2, 1), [[1, 0], [0, 1]], 2) == pytest.approx(math.sqrt(2))
    assert infratype_ratio(Space(2), [[0, 0]], 2) == 0


def test_shevchenko_values():
    assert shevchenko_rhs(1, 2, 1, 1) == pytest.approx(2 / (math.sqrt(2) - 1), rel=1e-15)
    assert shevchenko_constant(1, math.inf) == 2
    assert shevchenko_rhs(1, 2, 0, 0.5) == 0
    a, b = shevchenko_rhs(1, 2, 1, 0.5), shevchenko_rhs(1, 2, 1, 0.25)
    assert b / a == pytest.approx(1 / math.sqrt(2))


@settings(max_examples=100)
@given(st.floats(1.01, 10), st.floats(1e-6, 1), st.floats(1e-6, 1))
def test_shevchenko_monotone_in_d(p, d1, d2):
    lo, hi = sorted((d1, d2))
    assert shevchenko_rhs(1, p, 1, lo) <= shevchenko_rhs(1, p, 1, hi)


def test_shevchenko_errors():
    for args in [(1, 1, 1, 1), (0, 2, 1, 1), (1, 2, -1, 1), (1, 2, 1, 0), (1, 2, 1, 1.5)]:
        with pytest.raises(ValueError):
            shevchenko_rhs(*args)


def test_estimate_constant():
    sp = Space(3)
    est = estimate_constant(sp, 2, n_max=6, trials=40, seed=7)
    again = estimate_constant(sp, 2, n_max=6, trials=40, seed=7)
    assert est.to_dict() == again.to_dict()
    assert 0 < est.C_hat <= 1 + 1e-12
    assert len(est.records) == 40
    rows = est.to_csv().strip().splitlines()
    assert rows[0] == "trial,n,ratio" and len(rows) == 41
    with pytest.raises(ValueError):
        estimate_constant(sp, 1, n_max=6, trials=1)
    with pytest.raises(ValueError):
        estimate_constant(sp, 2, n_max=30, trials=1)
    with pytest.raises(ValueError):
        estimate_constant(Space.sparse(), 2, n_max=3, trials=1)
