import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import riemann_fold, sup_dist_polytope_grid
from setvalued.multifn import (
    biorthogonal_example,
    constant_set,
    conv_lift,
    l1_example,
    linear_singleton,
    random_step_multifunction,
    rational_indicator,
    step_multifunction,
)
from setvalued.partition import PartitionError, prime_partition, random_partition, schedule, uniform_partition
from setvalued.riemann import (
    compare_conv,
    converge,
    convex_combination_probe,
    empty_example_verifier,
    membership_probe,
    riemann_sum,
    separation_gap,
    star_probe,
    sum_support,
)
from setvalued.sets import (
    ConvexPolytope,
    ESum,
    L1Model,
    PointCloud,
    hausdorff_distance,
    is_convex_within,
    set_norm,
    support_function,
)

F = Fraction
E1 = PointCloud([[1.0, 0.0]])
ZERO = PointCloud([[0.0, 0.0]])


# -- sums -----------------------------------------------------------------------

def test_constant_singleton_sum():
    c = PointCloud([[0.25, -3.0]])
    for P in (uniform_partition(7), prime_partition(5), random_partition(0.2, 1)):
        assert hausdorff_distance(riemann_sum(constant_set(c), P), c) <= 1e-12


@pytest.mark.parametrize("n", range(1, 9))
def test_two_point_constant_fold(n):
    A = PointCloud([[0.0, 0.0], [1.0, 0.0]])
    u = np.random.default_rng(n).uniform(0, 1, n)
    P = uniform_partition(n, [(i + x) / n for i, x in enumerate(u)])
    S = riemann_sum(constant_set(A), P)
    want = riemann_fold(P.lengths, [A.points] * n)
    assert want == {(F(k, n), F(0)) for k in range(n + 1)}
    assert np.allclose(S.sorted_points(), np.array(sorted(want), dtype=float), atol=1e-15)


@pytest.mark.parametrize("n", [2, 3, 4, 7, 10])
def test_step_singleton_sum(n):
    G = step_multifunction([((0, F(1, 2)), ZERO), ((F(1, 2), 1), E1)])
    P = uniform_partition(n)
    hits = sum(1 for t in P.tags if t >= F(1, 2))
    assert np.allclose(riemann_sum(G, P).points, [[hits / n, 0.0]], atol=1e-15)


@pytest.mark.parametrize("n", [1, 2, 5, 16, 100])
def test_linear_singleton_right_tags(n):
    # sum_i (1/n)(i/n) = (n+1)/(2n)
    S = riemann_sum(linear_singleton(), uniform_partition(n, "right"))
    assert S.points[0, 0] == pytest.approx((n + 1) / (2 * n), abs=1e-14)


def test_l1_sums_on_prime_partitions():
    model = L1Model(2310)
    full = ESum(model, [(1, (0, 1))])
    G = l1_example(model)
    assert riemann_sum(G, prime_partition(2)).normalized() == full
    for p in (3, 5, 7, 11):
        # for odd p the middle tag (2n-1)/2p = 1/2 has lowest-terms denominator 2,
        # so the rule's otherwise branch gives {0} on the middle block
        S = riemann_sum(G, prime_partition(p)).normalized()
        k = (p - 1) // 2
        assert S == ESum(model, [(1, (0, F(k, p))), (1, (F(k + 1, p), 1))])
        assert hausdorff_distance(S, full) == F(1, p)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 8), st.sampled_from([2, 3]))
def test_support_is_additive_over_sums(seed, n, dim):
    G = conv_lift(random_step_multifunction(seed, dim=dim, pieces=3, max_points=3))
    P = random_partition(1 / n, seed)
    f = np.random.default_rng(seed).normal(size=dim)
    if P.n > 12:
        P = uniform_partition(n)
    assert support_function(riemann_sum(G, P), f) == pytest.approx(sum_support(G, P, f), abs=1e-9)


def test_sum_support_examples():
    assert sum_support(linear_singleton(), uniform_partition(4), np.zeros(2)) == 0
    model = L1Model(6)
    s = sum_support(l1_example(model), prime_partition(3), [1, -1, 1, 1, -1, 1])
    # 3E[0,1/3] and 3E[2/3,1] each take one positive bin: 2 * (1/3) * 3 * (1/6)
    assert s == F(1, 3)


# -- convergence ----------------------------------------------------------------

def test_linear_singleton_converges():
    est, trace = converge(linear_singleton(), schedule("uniform-doubling", 12, tag_rule="right"), tolerance=1e-3)
    assert est.verdict == "converged"
    assert est.cauchy_tail <= 1e-3
    assert hausdorff_distance(est.candidate, PointCloud([[0.5, 0.0]])) <= float(est.final_diameter)
    assert [e.n for e in trace.entries] == [2**k for k in range(1, 12)]


def test_constant_converges_in_first_window():
    A = ConvexPolytope([[0, 0], [1, 0], [0, 1]])
    est, trace = converge(constant_set(A), schedule("uniform-doubling", 8), window=3)
    assert est.verdict == "converged" and len(est.tails) == 1 and len(trace.entries) == 3


def test_biorthogonal_not_cauchy():
    est, trace = converge(biorthogonal_example(), schedule("uniform-doubling", 5))
    assert est.verdict == "not-cauchy"
    assert trace.distance_kind == "lower-bound"
    assert est.tails == [2.0, 2.0, 2.0]
    assert all(t >= 0.5 for t in est.tails)


def test_separation_gap_value():
    G = biorthogonal_example()
    assert separation_gap(G, uniform_partition(4), uniform_partition(8)) == 2.0
    assert separation_gap(G, uniform_partition(4), uniform_partition(4)) == 0.0


def test_converge_preconditions():
    with pytest.raises(PartitionError):
        converge(linear_singleton(), [uniform_partition(4), uniform_partition(2)])
    with pytest.raises(ValueError):
        converge(linear_singleton(), [uniform_partition(2)], window=1)


def test_budget_exhausted_verdict():
    est, _ = converge(linear_singleton(), schedule("uniform-doubling", 4, tag_rule="left"), tolerance=1e-9)
    assert est.verdict == "budget-exhausted"


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_converged_limits_are_convex_and_bounded(seed):
    G = conv_lift(random_step_multifunction(seed, dim=2))
    est, trace = converge(G, schedule("uniform-doubling", 7), tolerance=1e-6)
    if est.verdict == "converged":
        assert est.cauchy_tail <= 1e-6
    assert is_convex_within(est.candidate, 1e-6).convex
    assert set_norm(est.candidate) <= G.bound + 1e-9
    d = [e.diameter for e in trace.entries]
    assert all(b < a for a, b in zip(d, d[1:]))


def test_trace_exports():
    sched = schedule("uniform-doubling", 4, tag_rule="left")
    est, trace = converge(linear_singleton(), sched, tolerance=1e-9, target=PointCloud([[0.5, 0]]))
    rows = trace.to_csv().strip().splitlines()
    assert rows[0] == "index,n,diameter,d_prev,d_target" and len(rows) == 5
    d = est.to_dict()
    assert d["verdict"] in ("converged", "not-cauchy", "budget-exhausted")
    assert trace.to_dict()["entries"][0]["d_prev"] is None


# -- convexification bound ---------------------------------------------------------

def test_compare_conv_zero_cases():
    P = uniform_partition(16)
    d, _ = compare_conv(constant_set(ConvexPolytope([[0, 0], [1, 1], [1, 0]])), P)
    assert d == pytest.approx(0, abs=1e-12)
    d, _ = compare_conv(linear_singleton(), P)
    assert d == 0


def test_compare_conv_frozen():
    G = random_step_multifunction(5, dim=2)
    d, rhs = compare_conv(G, uniform_partition(64))
    assert d == pytest.approx(0.010887326647073798, abs=1e-12)
    # oracle: the cloud sum lies in its hull, so d_H is the sup over the hull
    # of the distance to the cloud
    P = uniform_partition(64)
    pts = np.array(sorted(riemann_fold(P.lengths, [G(t).points for t in P.tags])), dtype=float)
    grid = sup_dist_polytope_grid(pts, pts, n=800)
    assert grid - 1e-12 <= d <= grid + 2 * np.ptp(pts, axis=0).max() / 799
    assert rhs == pytest.approx(2 / (math.sqrt(2) - 1) * G.bound / 8, rel=1e-12)
    assert d <= rhs


# -- probes -----------------------------------------------------------------------------

SCHED = schedule("uniform-doubling", 4)


def test_membership_indicator_targets():
    G = rational_indicator()
    for target in (ZERO, E1, PointCloud([[0.5, 0.0]])):
        rep = membership_probe(G, target, SCHED, seed=0)
        assert rep.reached
        assert all(s["epsilon"] <= 2 * float(s["diameter"]) for s in rep.steps)
    rep = membership_probe(G, ZERO, SCHED, seed=0)
    assert rep.steps[-1]["epsilon"] == 0.0


def test_membership_of_integral():
    rep = membership_probe(linear_singleton(), PointCloud([[0.5, 0]]), SCHED, seed=3)
    assert rep.reached
    eps = [s["epsilon"] for s in rep.steps]
    assert eps[-1] <= 1e-12


def test_membership_unreachable():
    rep = membership_probe(linear_singleton(), PointCloud([[2.0, 0]]), SCHED, seed=0)
    assert not rep.reached
    assert rep.certificate == sorted(rep.certificate, reverse=True)


def test_membership_is_deterministic():
    a = membership_probe(rational_indicator(), PointCloud([[0.3, 0]]), SCHED, seed=5).to_dict()
    b = membership_probe(rational_indicator(), PointCloud([[0.3, 0]]), SCHED, seed=5).to_dict()
    assert a == b


def test_convex_combination_probe():
    G = rational_indicator()
    rep = convex_combination_probe(G, ZERO, E1, F(1, 2), SCHED)
    assert rep.reached and np.allclose(rep.target.points, [[0.5, 0]])
    for lam, want in ((0, E1), (1, ZERO)):
        r = convex_combination_probe(G, ZERO, E1, lam, SCHED)
        assert r.target == want and r.reached
    with pytest.raises(ValueError):
        convex_combination_probe(G, ZERO, E1, 1.5, SCHED)


def test_star_probe():
    G = rational_indicator()
    rep = star_probe(G, ZERO, [E1], partitions=SCHED)
    assert rep.all_reached and len(rep.probes) == 3
    same = star_probe(G, ZERO, [ZERO], lams=(0.5,), partitions=SCHED)
    assert same.all_reached


def test_star_probe_step_function():
    # limits of the {0}/{e1} step function at 1/2 form the segment between the
    # all-left and all-right tag choices on the straddling interval
    G = step_multifunction([((0, F(1, 2)), ZERO), ((F(1, 2), 1), E1)])
    sched = [uniform_partition(n) for n in (3, 5, 9, 17)]
    center = membership_probe(G, PointCloud([[0.5, 0]]), sched).reached
    assert center
    rep = star_probe(G, PointCloud([[0.5, 0]]), [PointCloud([[0.5, 0]])], partitions=sched)
    assert rep.all_reached


# -- empty-limit certificate ------------------------------------------------------------

def test_empty_certificate_frozen():
    cert = empty_example_verifier(uniform_partition(4), uniform_partition(16))
    assert cert.holds
    assert cert.support_n == 0 and cert.support_m == 1
    assert cert.lower_bound == 1 and cert.target_bound == F(3, 4)
    assert cert.base_sets == [(8, 0), (8, 2), (8, 4), (8, 6), (8, 8)]


@pytest.mark.parametrize("n", range(2, 9))
def test_empty_certificate_sizes(n):
    for Gm in (uniform_partition(2 * n + 1), random_partition(1 / (2 * n + 1), n, exact=True)):
        cert = empty_example_verifier(uniform_partition(n), Gm)
        assert cert.holds
        assert cert.lower_bound >= 1 - n * Gm.diameter > F(1, 2)


def test_empty_certificate_shared_tags():
    # tags of Gamma_n reappearing in Gamma_m carry no weight in the gap
    Gn = uniform_partition(2)
    Gm = uniform_partition(8, [F(2 * i + 1, 16) if i != 1 else F(1, 4) for i in range(8)])
    cert = empty_example_verifier(Gn, Gm)
    assert F(1, 4) not in cert.separated
    assert cert.support_m == F(7, 8) and cert.holds


def test_empty_certificate_precondition():
    with pytest.raises(PartitionError):
        empty_example_verifier(uniform_partition(4), uniform_partition(8))
