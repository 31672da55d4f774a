"""Property suite run by ``setvalued selftest``.

Each check draws seeded random instances and returns ``(name, passed,
detail)``.  The same properties are exercised more thoroughly by the pytest
suite; this module only needs numpy.
"""
from __future__ import annotations

import hashlib
import itertools
import math
from fractions import Fraction

import numpy as np

from . import _geometry as geo
from .infratype import min_sign_norm
from .multifn import conv_lift, l1_example, linear_singleton, random_step_multifunction
from .partition import prime_partition, uniform_partition
from .radstrom import additivity_defect, embed, exact_polygon_distance, sample_distance, scale_property_check
from .riemann import compare_conv, riemann_sum, sum_support
from .sets import (
    ConvexPolytope,
    ESum,
    L1Model,
    PointCloud,
    convex_hull,
    hausdorff_distance,
    minkowski_sum,
    set_norm,
    support_function,
)
from .space import Space, SparseVector, lp_norm, pair

TOL = 1e-9


def _cloud(rng, d, kmax=8):
    return PointCloud(rng.uniform(-1, 1, (int(rng.integers(1, kmax + 1)), d)), Space(d))


def check_norm_axioms(n=200, seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for p in (1, Fraction(3, 2), 2, 3, math.inf):
        sp = Space(3, p)
        for _ in range(n):
            x, y, f = rng.normal(size=(3, 3))
            worst = max(worst, sp.norm(x + y) - sp.norm(x) - sp.norm(y))
            worst = max(worst, abs(pair(f, x)) - sp.dual_norm(f) * sp.norm(x))
    return "norm triangle and Hoelder", worst <= 1e-12, worst


def check_sparse_dense(n=200, seed=1):
    rng = np.random.default_rng(seed)
    sp = Space(5)
    ok = True
    for _ in range(n):
        x, y = rng.normal(size=(2, 5))
        sx, sy = SparseVector.from_dense(x), SparseVector.from_dense(y)
        ok &= np.allclose((sx + sy).to_dense(5), x + y, atol=1e-15)
        ok &= abs(sx.dot(sy) - float(x @ y)) <= 1e-12
        ok &= abs(Space.sparse().norm(sx) - sp.norm(x)) <= 1e-12
    return "sparse/dense agreement", bool(ok), None


def check_hull_properties(n=200, seed=2):
    rng = np.random.default_rng(seed)
    worst_conv = worst_tri = worst_comm = 0.0
    for i in range(n):
        d = 2 + i % 2
        A, B, C = _cloud(rng, d), _cloud(rng, d), _cloud(rng, d)
        dab = hausdorff_distance(A, B)
        worst_conv = max(worst_conv, hausdorff_distance(convex_hull(A), convex_hull(B)) - dab)
        worst_tri = max(worst_tri, hausdorff_distance(A, C) - dab - hausdorff_distance(B, C))
        lhs = convex_hull(minkowski_sum(A, B))
        rhs = minkowski_sum(convex_hull(A), convex_hull(B))
        worst_comm = max(worst_comm, hausdorff_distance(lhs, rhs))
    ok = worst_conv <= TOL and worst_tri <= TOL and worst_comm <= TOL
    return "hull contraction, triangle, hull/sum commutation", ok, (worst_conv, worst_tri, worst_comm)


def check_embedding(n=100, seed=3):
    rng = np.random.default_rng(seed)
    sp = Space(2)
    D = sp.sample_directions(10_000, seed)
    worst_add = worst_hom = worst_lb = worst_gap = 0.0
    for _ in range(n):
        A = ConvexPolytope(rng.random((int(rng.integers(1, 9)), 2)), sp)
        B = ConvexPolytope(rng.random((int(rng.integers(1, 9)), 2)), sp)
        worst_add = max(worst_add, additivity_defect(A, B, D))
        worst_hom = max(worst_hom, scale_property_check(A, float(rng.uniform(0, 3)), D))
        s = sample_distance(embed(A, D), embed(B, D))
        ex = hausdorff_distance(A, B)
        worst_lb = max(worst_lb, s - ex)
        worst_gap = max(worst_gap, ex - s)
    ok = worst_add <= TOL and worst_hom <= TOL and worst_lb <= TOL and worst_gap <= 1e-3
    return "embedding additivity, homogeneity, lower bound", ok, (worst_add, worst_hom, worst_lb, worst_gap)


def check_polygon_exact_mode(n=100, seed=4):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        A = ConvexPolytope(rng.normal(size=(int(rng.integers(1, 8)), 2)))
        B = ConvexPolytope(rng.normal(size=(int(rng.integers(1, 8)), 2)))
        worst = max(worst, abs(exact_polygon_distance(A, B) - hausdorff_distance(A, B)))
    return "planar exact mode equals polytope d_H", worst <= TOL, worst


def check_esum_support(seed=5):
    ok = True
    for m in range(1, 9):
        model = L1Model(m)
        rng = np.random.default_rng(seed + m)
        f = [Fraction(int(x)) for x in rng.integers(-3, 4, m)]
        for a, b in itertools.combinations(range(m + 1), 2):
            E = ESum(model, [(1, (Fraction(a, m), Fraction(b, m)))])
            brute = max(
                model.pair(f, [Fraction(s) if a <= j < b else Fraction(0) for j, s in enumerate(bits)])
                for bits in itertools.product((0, 1), repeat=m)
            )
            ok &= support_function(E, f) == brute
    return "ESum support closed form", bool(ok), None


def check_infratype(n=200, seed=6):
    rng = np.random.default_rng(seed)
    worst = -math.inf
    sp = Space(4)
    for _ in range(n):
        X = rng.normal(size=(int(rng.integers(1, 11)), 4))
        worst = max(worst, min_sign_norm(sp, X) - float(np.sqrt(np.sum(lp_norm(X, 2) ** 2))))
    r = min_sign_norm(Space(2, 1), np.eye(2)) / math.sqrt(2)
    ok = worst <= TOL and abs(r - math.sqrt(2)) <= 1e-12
    return "Hilbert infratype and l1 pair", ok, (worst, r)


def check_support_additivity(n=30, seed=7):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n):
        F = conv_lift(random_step_multifunction((seed, i), dim=2))
        G = uniform_partition(int(rng.integers(1, 9)))
        S = riemann_sum(F, G)
        f = rng.normal(size=2)
        worst = max(worst, abs(support_function(S, f) - sum_support(F, G, f)))
    return "support of sums is additive", worst <= TOL, worst


def check_shevchenko(n=20, seed=8):
    worst = -math.inf
    for i in range(n):
        F = random_step_multifunction((seed, i), dim=2 + i % 2)
        for m in (4, 16, 64):
            d, rhs = compare_conv(F, uniform_partition(m))
            worst = max(worst, d - rhs)
    return "Riemann sums vs convexified sums", worst <= 0, worst


def check_l1_tiling():
    model = L1Model(60)
    F = l1_example(model)
    ok = True
    for p in (2, 3, 5):
        S = riemann_sum(F, prime_partition(p))
        # a tag in lowest terms k/(2p) carries a norm-one set; 1/2 reduces and carries {0}
        tags = [t for t in prime_partition(p).tags if t.denominator == 2 * p]
        ok &= set_norm(S) <= 1 and all(set_norm(F(t)) == 1 for t in tags)
    return "l1 example values have norm 1", bool(ok), None


def check_linear_baseline():
    F = linear_singleton()
    G = uniform_partition(64, "right")
    S = riemann_sum(F, G)
    err = abs(S.points[0, 0] - 0.5)
    return "linear singleton sum", err <= float(G.diameter), err


def check_sup_distance(n=60, seed=9):
    rng = np.random.default_rng(seed)
    worst = -math.inf
    for _ in range(n):
        d = int(rng.integers(1, 4))
        V = rng.normal(size=(int(rng.integers(2, 7)), d))
        C = rng.normal(size=(int(rng.integers(1, 10)), d))
        exact = geo.sup_distance_hull_to_points(V, C)
        mc = geo.sup_distance_hull_to_points_sampled(V, C, 5000, seed=0)
        worst = max(worst, mc - exact)
    return "hull-to-cloud sup distance dominates sampling", worst <= TOL, worst


CHECKS = [
    check_norm_axioms,
    check_sparse_dense,
    check_hull_properties,
    check_embedding,
    check_polygon_exact_mode,
    check_esum_support,
    check_infratype,
    check_support_additivity,
    check_shevchenko,
    check_l1_tiling,
    check_linear_baseline,
    check_sup_distance,
]


def run_checks() -> list:
    out = []
    for check in CHECKS:
        try:
            out.append(check())
        except Exception as exc:  # a crash is a failed property
            out.append((check.__name__, False, f"{type(exc).__name__}: {exc}"))
    return out


def digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()
