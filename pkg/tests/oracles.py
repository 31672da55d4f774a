"""Brute-force reference implementations.

Nothing here imports the package: each oracle is a direct transcription of a
definition, slow but easy to check by eye.
"""
import itertools
import math
from fractions import Fraction

import numpy as np


def norm(x, p):
    x = np.asarray(x, dtype=float)
    if p == math.inf:
        return float(np.max(np.abs(x)))
    return float(np.sum(np.abs(x) ** float(p)) ** (1.0 / float(p)))


def hausdorff_pairs(P, Q, p=2):
    """max(sup_a inf_b, sup_b inf_a) by an explicit double loop."""
    def directed(X, Y):
        return max(min(norm(np.subtract(x, y), p) for y in Y) for x in X)
    return max(directed(P, Q), directed(Q, P))


def dist_to_hull(y, V):
    """Euclidean distance from y to conv(V) by Caratheodory enumeration.

    The nearest point lies in the relative interior of some simplex spanned
    by at most d+1 vertices; project onto every such affine hull and keep the
    projections with non-negative barycentric weights.
    """
    y = np.asarray(y, dtype=float)
    V = np.asarray(V, dtype=float)
    d = V.shape[1]
    best = min(float(np.linalg.norm(y - v)) for v in V)
    for k in range(2, min(len(V), d + 1) + 1):
        for S in itertools.combinations(range(len(V)), k):
            A = V[list(S)]
            D = (A[1:] - A[0]).T
            c, *_ = np.linalg.lstsq(D, y - A[0], rcond=None)
            w = np.concatenate([[1 - c.sum()], c])
            if np.all(w >= -1e-12):
                best = min(best, float(np.linalg.norm(y - w @ A)))
    return best


def hausdorff_hulls(V, W):
    """d_H of two polytopes: the sup of a convex function is at a vertex."""
    return max(max(dist_to_hull(v, W) for v in V), max(dist_to_hull(w, V) for w in W))


def min_sign_norm(X, p=2):
    X = np.asarray(X, dtype=float)
    return min(norm(np.asarray(s) @ X, p) for s in itertools.product((1, -1), repeat=len(X)))


def esum_support(bins, terms, f):
    """sup over all 0/1 choices inside each weighted interval of <f, v>."""
    cells = []
    for w, (a, b) in terms:
        cells += [(j, w) for j in range(int(a * bins), int(b * bins))]
    best = None
    for choice in itertools.product((0, 1), repeat=len(cells)):
        v = [Fraction(0)] * bins
        for (j, w), c in zip(cells, choice):
            v[j] = w * c
        val = sum(Fraction(fj) * vj for fj, vj in zip(f, v)) / bins
        best = val if best is None else max(best, val)
    return best


def dist_point_to_esum(bins, terms, v):
    """L1 distance from per-bin values v to the set, by subset enumeration."""
    cells = []
    for w, (a, b) in terms:
        cells += [(j, w) for j in range(int(a * bins), int(b * bins))]
    best = None
    for choice in itertools.product((0, 1), repeat=len(cells)):
        u = [Fraction(0)] * bins
        for (j, w), c in zip(cells, choice):
            u[j] = w * c
        d = sum(abs(Fraction(x) - y) for x, y in zip(v, u)) / bins
        best = d if best is None else min(best, d)
    return best


def riemann_fold(lengths, clouds):
    """All points sum_i lengths[i] * x_i with x_i chosen from clouds[i], exactly.

    Coordinates become Fractions, so the fold can deduplicate after every
    summand without rounding.
    """
    acc = {tuple(Fraction(0) for _ in clouds[0][0])}
    for l, cloud in zip(lengths, clouds):
        l = Fraction(l)
        acc = {tuple(a + l * Fraction(float(c)) for a, c in zip(s, x)) for s in acc for x in cloud}
    return acc


def base_sets():
    """Base intervals ((k-1)/q, (k+1)/q) in enumeration order q = 1, 2, ...; k = 0..q."""
    q = 1
    while True:
        for k in range(q + 1):
            yield Fraction(k - 1, q), Fraction(k + 1, q)
        q += 1


def first_separating_base(a, avoid):
    """Position of the first base interval holding a and no avoid point."""
    for j, (lo, hi) in enumerate(base_sets()):
        if lo < a < hi and not any(lo < x < hi for x in avoid):
            return j


def sup_dist_polytope_grid(V, C, n=600):
    """Lower bound for sup over conv(V) of the distance to the cloud C (planar V).

    Full-dimensional hulls are covered by a grid, degenerate ones by sampling
    every segment between two points of V.
    """
    from scipy.spatial import Delaunay

    V = np.asarray(V, dtype=float)
    if len(V) >= 3 and np.linalg.matrix_rank(V - V[0], tol=1e-12) == 2:
        lo, hi = V.min(axis=0), V.max(axis=0)
        g = np.stack(np.meshgrid(np.linspace(lo[0], hi[0], n), np.linspace(lo[1], hi[1], n)), -1).reshape(-1, 2)
        g = g[Delaunay(V).find_simplex(g) >= 0]
    else:
        t = np.linspace(0, 1, n)[:, None]
        g = np.vstack([V[i] + t * (V[j] - V[i]) for i in range(len(V)) for j in range(i + 1, len(V))] or [V])
    g = np.vstack([g, V])
    d = np.min(np.linalg.norm(g[:, None, :] - np.asarray(C)[None], axis=2), axis=1)
    return float(d.max())


def dist_to_polygon(y, P, p, samples=100001):
    """l_p distance from y to a planar polygon: 0 inside, else the closest edge point."""
    from scipy.spatial import ConvexHull, Delaunay

    P = np.asarray(P, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(P) >= 3:
        if Delaunay(P).find_simplex(y[None])[0] >= 0:
            return 0.0
        P = P[ConvexHull(P).vertices]
    t = np.linspace(0.0, 1.0, samples)[:, None]
    best = math.inf
    for i in range(len(P)):
        seg = P[i] + t * (P[(i + 1) % len(P)] - P[i])
        d = np.abs(y - seg)
        vals = d.max(axis=1) if p == math.inf else (d ** float(p)).sum(axis=1) ** (1 / float(p))
        best = min(best, float(vals.min()))
    return best
