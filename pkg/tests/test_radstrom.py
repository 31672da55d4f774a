import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from oracles import hausdorff_hulls
from setvalued.estimator import SupportEmbedding
from setvalued.radstrom import (
    SupportSample,
    additivity_defect,
    convergence_curve,
    covering_radius_circle,
    embed,
    exact_polygon_distance,
    sample_distance,
    scale_property_check,
)
from setvalued.sets import ConvexPolytope, ESum, L1Model, PointCloud, hausdorff_distance
from setvalued.space import Space

seeds = st.integers(0, 2**32 - 1)
AXES = np.array([[1.0, 0], [-1, 0], [0, 1], [0, -1]])


def poly(rng, kmax=8, d=2):
    return ConvexPolytope(rng.random((int(rng.integers(1, kmax + 1)), d)))


def test_embed_examples():
    assert np.array_equal(embed(PointCloud([[0, 0]]), AXES).values, np.zeros(4))
    sq = ConvexPolytope([[0, 0], [1, 0], [0, 1], [1, 1]])
    assert np.array_equal(embed(sq, AXES).values, [1, 0, 1, 0])


def test_sample_distance_examples():
    A = ConvexPolytope([[0, 0], [2, 1], [1, 3]])
    assert sample_distance(embed(A, AXES), embed(A, AXES)) == 0
    v = np.array([3.0, 4.0])
    D = np.vstack([AXES, v / 5])
    assert sample_distance(embed(PointCloud([[0, 0]]), D), embed(PointCloud([v]), D)) == pytest.approx(5.0)
    with pytest.raises(ValueError):
        sample_distance(embed(A, AXES), embed(A, AXES[:3]))


def test_esum_embedding_is_exact():
    model = L1Model(4)
    E = ESum(model, [(1, (0, 1))])
    s = embed(E, [[1, -1, 1, -1], [0, 0, 0, 0]])
    assert s.values.tolist() == [0.5, 0.0]


def test_homogeneity_edge_cases():
    A = ConvexPolytope([[0, 1], [2, 0.5]])
    assert scale_property_check(A, 0, AXES) == 0
    assert scale_property_check(A, 1, AXES) == 0
    with pytest.raises(ValueError):
        scale_property_check(A, -1, AXES)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_additivity_and_homogeneity(seed):
    rng = np.random.default_rng(seed)
    D = Space(2).sample_directions(500, seed)
    A, B = poly(rng), poly(rng)
    assert additivity_defect(A, B, D) <= 1e-9
    assert scale_property_check(A, float(rng.uniform(0, 10)), D) <= 1e-9


@settings(max_examples=60, deadline=None)
@given(seeds, st.sampled_from([2, 3]))
def test_sample_distance_is_lower_bound(seed, d):
    rng = np.random.default_rng(seed)
    A, B = poly(rng, d=d), poly(rng, d=d)
    D = Space(d).sample_directions(300, seed)
    assert sample_distance(embed(A, D), embed(B, D)) <= hausdorff_distance(A, B) + 1e-9


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_more_directions_never_decrease(seed):
    rng = np.random.default_rng(seed)
    A, B = poly(rng), poly(rng)
    rows = convergence_curve(A, B, [4, 16, 64, 256, 1024], seed=seed)
    s = [r["sample_distance"] for r in rows]
    assert s == sorted(s)
    for r in rows:
        assert r["sample_distance"] <= r["exact"] + 1e-12 <= r["upper_bound"] + 2e-12


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_ten_thousand_directions_close_the_gap(seed):
    rng = np.random.default_rng(seed)
    A, B = poly(rng), poly(rng)
    D = Space(2).sample_directions(10_000, seed)
    gap = hausdorff_distance(A, B) - sample_distance(embed(A, D), embed(B, D))
    assert -1e-9 <= gap <= 1e-3


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_exact_polygon_mode(seed):
    rng = np.random.default_rng(seed)
    A, B = poly(rng), poly(rng)
    assert exact_polygon_distance(A, B) == pytest.approx(hausdorff_hulls(A.points, B.points), abs=1e-9)


def test_exact_mode_restrictions():
    with pytest.raises(ValueError):
        exact_polygon_distance(ConvexPolytope(np.eye(3)), ConvexPolytope(np.eye(3)))
    sp = Space(2, 1)
    with pytest.raises(ValueError):
        exact_polygon_distance(ConvexPolytope(np.eye(2), sp), ConvexPolytope(np.eye(2), sp))


def test_covering_radius():
    ang = np.linspace(0, 2 * math.pi, 8, endpoint=False)
    D = np.c_[np.cos(ang), np.sin(ang)]
    assert covering_radius_circle(D) == pytest.approx(2 * math.sin(math.pi / 16))


def test_support_sample_io():
    s = embed(ConvexPolytope([[0, 0], [1, 2]]), Space(2).sample_directions(10, 1))
    s.check_unit(Space(2))
    t = SupportSample.from_dict(s.to_dict())
    assert np.array_equal(t.values, s.values) and np.array_equal(t.directions, s.directions)
    lines = s.to_csv().strip().splitlines()
    assert lines[0] == "angle,value" and len(lines) == 11
    assert np.allclose((s + s).values, 2 * s.values)
    with pytest.raises(ValueError):
        SupportSample(2 * AXES, np.zeros(4)).check_unit(Space(2))


def test_support_embedding_estimator():
    sets = [ConvexPolytope(np.random.default_rng(i).random((4, 2))) for i in range(5)]
    est = SupportEmbedding(n_directions=64, seed=3)
    with pytest.raises(NotFittedError):
        est.transform(sets)
    X = est.fit_transform(sets)
    assert X.shape == (5, 64)
    assert clone(est).get_params() == {"n_directions": 64, "seed": 3}
    Y = SupportEmbedding(n_directions=64, seed=3).fit(sets).transform(sets)
    assert np.array_equal(X, Y)
    d = np.max(np.abs(X[0] - X[1]))
    assert d <= hausdorff_distance(sets[0], sets[1]) + 1e-9
    with pytest.raises(ValueError):
        SupportEmbedding().fit([ConvexPolytope(np.eye(2)), ConvexPolytope(np.eye(3))])
