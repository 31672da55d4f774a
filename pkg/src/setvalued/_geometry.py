"""Low-level geometry on dense point arrays, Euclidean unless a norm is passed.

Everything here works on ``(n, d)`` float arrays and knows nothing about the
set classes built on top of it.
"""
from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.spatial import ConvexHull, QhullError, cKDTree

DEDUP_TOL = 1e-12
RANK_TOL = 1e-10


def unique_rows(X: np.ndarray, tol: float = DEDUP_TOL) -> np.ndarray:
    """Drop rows that coincide after rounding to a ``tol`` grid.

    Keeps the first occurrence of each row, in original order.
    """
    X = np.asarray(X, dtype=float)
    if len(X) <= 1:
        return X.copy()
    keys = np.round(X / tol)
    # lexsort is stable, so the first row of each run is the first occurrence
    order = np.lexsort(keys.T[::-1])
    k = keys[order]
    first = np.ones(len(k), dtype=bool)
    first[1:] = np.any(k[1:] != k[:-1], axis=1)
    return X[np.sort(order[first])]


def affine_frame(X: np.ndarray, tol: float = RANK_TOL):
    """Orthonormal frame of the affine hull of the rows of ``X``.

    Returns ``(origin, basis)`` where ``basis`` has shape ``(k, d)`` and ``k``
    is the numerical affine dimension.
    """
    X = np.asarray(X, dtype=float)
    origin = X.mean(axis=0)
    Y = X - origin
    if len(X) == 1:
        return origin, np.zeros((0, X.shape[1]))
    _, s, vt = np.linalg.svd(Y, full_matrices=False)
    scale = max(s[0], 1e-300)
    k = int(np.sum(s > tol * scale)) if s[0] > 1e-14 else 0
    return origin, vt[:k]


def extreme_point_indices(X: np.ndarray) -> np.ndarray:
    """Indices of the extreme points of conv(X), sorted ascending."""
    X = np.asarray(X, dtype=float)
    n = len(X)
    if n == 1:
        return np.array([0])
    origin, basis = affine_frame(X)
    k = len(basis)
    if k == 0:
        return np.array([0])
    Z = (X - origin) @ basis.T
    if k == 1:
        z = Z[:, 0]
        return np.unique([int(np.argmin(z)), int(np.argmax(z))])
    hull = ConvexHull(Z)
    return np.sort(hull.vertices)


def extreme_points(X: np.ndarray) -> np.ndarray:
    X = unique_rows(X)
    return X[extreme_point_indices(X)]


def min_norm_point(P: np.ndarray, tol: float = 1e-14, max_iter: int = 1000) -> np.ndarray:
    """Point of minimum Euclidean norm in conv(rows of P) (Wolfe's algorithm)."""
    P = np.asarray(P, dtype=float)
    if len(P) == 1:
        return P[0].copy()
    sq = np.einsum("ij,ij->i", P, P)
    max_sq = float(sq.max())
    j = int(np.argmin(sq))
    S = [j]
    lam = np.array([1.0])
    x = P[j].copy()
    for _ in range(max_iter):
        g = P @ x
        j = int(np.argmin(g))
        if x @ x - g[j] <= tol * max_sq or j in S:
            break
        S.append(j)
        lam = np.append(lam, 0.0)
        while True:
            Q = P[S]
            if len(S) == 1:
                alpha = np.array([1.0])
            else:
                D = (Q[1:] - Q[0]).T
                c, *_ = np.linalg.lstsq(D, -Q[0], rcond=None)
                alpha = np.concatenate([[1.0 - c.sum()], c])
            if np.all(alpha > 1e-15):
                lam = alpha
                x = lam @ Q
                break
            mask = (alpha <= 1e-15) & (lam - alpha > 0)
            if not mask.any():
                lam = np.clip(alpha, 0, None)
                lam /= lam.sum()
                x = lam @ Q
                break
            theta = float(np.min(lam[mask] / (lam[mask] - alpha[mask])))
            lam = lam + theta * (alpha - lam)
            keep = lam > 1e-15
            S = [s for s, k in zip(S, keep) if k]
            lam = lam[keep]
            lam /= lam.sum()
            x = lam @ P[S]
    return x


def _segment_distances(Y: np.ndarray, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Distances from each row of Y to each segment [A_j, B_j]; shape (len(Y), len(A))."""
    AB = B - A
    L2 = np.einsum("ij,ij->i", AB, AB)
    AY = Y[:, None, :] - A[None, :, :]
    t = np.einsum("nij,ij->ni", AY, AB) / np.where(L2 > 0, L2, 1.0)
    t = np.clip(t, 0.0, 1.0)
    proj = A[None] + t[..., None] * AB[None]
    return np.linalg.norm(Y[:, None, :] - proj, axis=2)


def distances_to_hull(Y: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Euclidean distance from each row of Y to conv(V)."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    V = np.asarray(V, dtype=float)
    if len(V) == 1:
        return np.linalg.norm(Y - V[0], axis=1)
    origin, basis = affine_frame(V)
    if len(basis) == 2:
        # planar hull: offset from the plane plus in-plane distance
        Vz = (V - origin) @ basis.T
        Yz = (Y - origin) @ basis.T
        off = (Y - origin) - Yz @ basis
        hull = ConvexHull(Vz)
        ring = Vz[hull.vertices]
        inside = np.all(Yz @ hull.equations[:, :2].T + hull.equations[:, 2] <= 0, axis=1)
        seg = _segment_distances(Yz, ring, np.roll(ring, -1, axis=0)).min(axis=1)
        inplane = np.where(inside, 0.0, seg)
        return np.sqrt(inplane**2 + np.einsum("ij,ij->i", off, off))
    if len(basis) == 1:
        z = (V - origin) @ basis[0]
        a = origin + z.min() * basis[0]
        b = origin + z.max() * basis[0]
        return _segment_distances(Y, a[None], b[None])[:, 0]
    # points whose projection falls inside the hull only pay the offset
    Vz = (V - origin) @ basis.T
    Yz = (Y - origin) @ basis.T
    off = np.linalg.norm((Y - origin) - Yz @ basis, axis=1)
    eqs = ConvexHull(Vz).equations
    scale = max(np.ptp(Vz, axis=0).max(), 1e-300)
    inside = np.all(Yz @ eqs[:, :-1].T + eqs[:, -1] <= -1e-12 * scale, axis=1)
    out = off.copy()
    for r in np.nonzero(~inside)[0]:
        out[r] = np.linalg.norm(min_norm_point(V - Y[r]))
    return out


def distances_to_hull_lp(Y: np.ndarray, V: np.ndarray, p) -> np.ndarray:
    """l_1 or l_inf distance from each row of Y to conv(V), by linear programming."""
    from scipy.optimize import linprog

    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    V = np.asarray(V, dtype=float)
    n, d = V.shape
    out = np.empty(len(Y))
    for r, y in enumerate(Y):
        # variables: lam (n), s (d) for l1 or t (1) for linf
        if p == 1:
            c = np.concatenate([np.zeros(n), np.ones(d)])
            A_ub = np.block([[V.T, -np.eye(d)], [-V.T, -np.eye(d)]])
        else:
            c = np.concatenate([np.zeros(n), [1.0]])
            A_ub = np.block([[V.T, -np.ones((d, 1))], [-V.T, -np.ones((d, 1))]])
        b_ub = np.concatenate([y, -y])
        A_eq = np.concatenate([np.ones(n), np.zeros(len(c) - n)])[None]
        res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=(0, None), method="highs")
        if not res.success:
            raise RuntimeError(f"LP projection failed: {res.message}")
        out[r] = res.fun
    return out


def distances_to_hull_lp_norm(Y: np.ndarray, V: np.ndarray, p: float) -> np.ndarray:
    """l_p distance (1 < p < inf) from each row of Y to conv(V).

    Minimizes the smooth convex ``||V^T lam - y||_p^p`` over the simplex with
    SLSQP.  The returned values come from feasible weights, so they are upper
    bounds, tight to the solver tolerance.
    """
    from scipy.optimize import minimize

    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    V = np.asarray(V, dtype=float)
    n = len(V)
    out = np.empty(len(Y))
    cons = ({"type": "eq", "fun": lambda lam: lam.sum() - 1.0, "jac": lambda lam: np.ones(n)},)

    for r, y in enumerate(Y):
        def f(lam):
            res = lam @ V - y
            a = np.abs(res)
            return float(np.sum(a ** p)), V @ (p * a ** (p - 1) * np.sign(res))

        start = np.zeros(n)
        start[int(np.argmin(np.sum(np.abs(V - y) ** p, axis=1)))] = 1.0
        best = f(start)[0]
        if n > 1 and best > 0:
            sol = minimize(f, start, jac=True, method="SLSQP", bounds=[(0, 1)] * n, constraints=cons,
                           options={"ftol": 1e-15, "maxiter": 500})
            lam = np.clip(sol.x, 0, None)
            lam /= lam.sum()
            best = min(best, f(lam)[0])
        out[r] = best ** (1.0 / p)
    return out


# -- sup over a polytope of the distance to a finite set ----------------------

def _lower_faces(L: np.ndarray):
    """Simplices of the lower convex hull of lifted points L (last axis = height).

    Returns an int array of shape (m, k+1) or ``None`` when qhull cannot build
    the hull.
    """
    n, kp1 = L.shape
    span = np.ptp(L, axis=0).max() + 1.0
    apex = L.mean(axis=0)
    apex[-1] = L[:, -1].max() + 10.0 * span
    pts = np.vstack([L, apex])
    try:
        hull = ConvexHull(pts)
    except (QhullError, ValueError):
        return None
    lower = (hull.equations[:, -2] < -1e-12) & ~np.any(hull.simplices == n, axis=1)
    return hull.simplices[lower]


def _faces_of(simplices: np.ndarray, size: int) -> np.ndarray:
    """All distinct ``size``-subsets of the rows of ``simplices``."""
    if len(simplices) == 0:
        return np.zeros((0, size), dtype=int)
    s = np.sort(simplices, axis=1)
    cols = itertools.combinations(range(s.shape[1]), size)
    faces = np.concatenate([s[:, list(c)] for c in cols])
    return np.unique(faces, axis=0)


def sup_distance_hull_to_points(V: np.ndarray, C: np.ndarray) -> float:
    """Exact ``sup_{x in conv V} min_{c in C} |x - c|`` in the Euclidean norm.

    On conv V intersected with the power cell of a site the distance is convex,
    so the sup is attained at a vertex of such a cell.  Those vertices are
    enumerated from the lower hull of the lifted sites (power diagram) and the
    faces of conv V, then evaluated exactly with a k-d tree.  Supported when
    conv V has affine dimension at most 3.
    """
    V = unique_rows(V)
    C = unique_rows(C)
    origin, basis = affine_frame(V)
    k = len(basis)
    tree = cKDTree(C)
    if k == 0:
        return float(tree.query(V[0])[0])
    if k > 3:
        raise NotImplementedError("sup distance is implemented for hulls of affine dimension <= 3")

    def value(Xk):
        Xk = np.atleast_2d(Xk)
        if len(Xk) == 0:
            return 0.0
        return float(tree.query(origin + Xk @ basis)[0].max())

    Vk = (V - origin) @ basis.T
    a = (C - origin) @ basis.T
    resid = (C - origin) - a @ basis
    z = np.einsum("ij,ij->i", a, a) + np.einsum("ij,ij->i", resid, resid)
    best = value(Vk)  # vertices of conv V

    if k == 1:
        lo, hi = Vk[:, 0].min(), Vk[:, 0].max()
        order = np.lexsort((z, a[:, 0]))
        a1, z1 = a[order, 0], z[order]
        # breakpoints of the 1-D power diagram: all adjacent pairs of the lower hull
        hull_idx = []
        for i in range(len(a1)):
            while len(hull_idx) >= 2:
                i0, i1 = hull_idx[-2], hull_idx[-1]
                cross = (a1[i1] - a1[i0]) * (z1[i] - z1[i0]) - (z1[i1] - z1[i0]) * (a1[i] - a1[i0])
                if cross <= 0:
                    hull_idx.pop()
                else:
                    break
            hull_idx.append(i)
        cands = []
        for i0, i1 in zip(hull_idx[:-1], hull_idx[1:]):
            if a1[i1] != a1[i0]:
                x = (z1[i1] - z1[i0]) / (2.0 * (a1[i1] - a1[i0]))
                if lo <= x <= hi:
                    cands.append(x)
        if cands:
            best = max(best, value(np.array(cands)[:, None]))
        return best

    hull = ConvexHull(Vk)
    eqs = hull.equations
    scale = max(np.ptp(Vk, axis=0).max(), 1e-300)
    in_tol = 1e-11 * scale

    def inside(X):
        return np.all(X @ eqs[:, :-1].T + eqs[:, -1] <= in_tol, axis=1)

    L = np.column_stack([a, z])
    if len(C) >= k + 2:
        lower = _lower_faces(L)
    else:
        lower = None
    if lower is None or len(lower) == 0:
        if len(C) > 40:
            raise RuntimeError("degenerate power diagram for a large site set")
        # brute force: every subset of at most k+1 sites is a potential face
        pairs = np.array(list(itertools.combinations(range(len(C)), 2)), dtype=int).reshape(-1, 2)
        triples = np.array(list(itertools.combinations(range(len(C)), 3)), dtype=int).reshape(-1, 3)
        quads = np.array(list(itertools.combinations(range(len(C)), 4)), dtype=int).reshape(-1, 4)
        full = {2: triples, 3: quads}[k]
    else:
        full = lower
        pairs = _faces_of(lower, 2)
        triples = _faces_of(lower, 3) if k == 3 else None

    cands = []
    # power-diagram vertices: equal power to k+1 sites
    if len(full):
        A = 2.0 * (a[full[:, 1:]] - a[full[:, :1]])  # (m, k, k)
        rhs = z[full[:, 1:]] - z[full[:, :1]]
        det = np.linalg.det(A)
        ok = np.abs(det) > 1e-14 * scale ** k
        if ok.any():
            X = np.linalg.solve(A[ok], rhs[ok][..., None])[..., 0]
            cands.append(X[inside(X)])

    # edges of conv V in k-coordinates
    if k == 2:
        ring = Vk[hull.vertices]
        E0, E1 = ring, np.roll(ring, -1, axis=0)
    else:
        edges = _faces_of(hull.simplices, 2)
        E0, E1 = Vk[edges[:, 0]], Vk[edges[:, 1]]

    # bisector hyperplanes of site pairs against edges of conv V
    if len(pairs):
        nrm = 2.0 * (a[pairs[:, 1]] - a[pairs[:, 0]])  # (m, k)
        off = z[pairs[:, 1]] - z[pairs[:, 0]]
        num = off[:, None] - nrm @ E0.T  # (m, e)
        den = nrm @ (E1 - E0).T
        with np.errstate(divide="ignore", invalid="ignore"):
            t = num / den
        hit = (np.abs(den) > 1e-300) & (t >= 0) & (t <= 1)
        mi, ei = np.nonzero(hit)
        if len(mi):
            X = E0[ei] + t[mi, ei][:, None] * (E1[ei] - E0[ei])
            cands.append(X)

    # k == 3: equal-power lines of site triples against facet planes
    if k == 3 and triples is not None and len(triples):
        i0, i1, i2 = triples.T
        n1 = 2.0 * (a[i1] - a[i0])
        n2 = 2.0 * (a[i2] - a[i0])
        r1 = z[i1] - z[i0]
        r2 = z[i2] - z[i0]
        direc = np.cross(n1, n2)
        good = np.linalg.norm(direc, axis=1) > 1e-14 * scale**2
        n1, n2, r1, r2, direc = n1[good], n2[good], r1[good], r2[good], direc[good]
        # a point on each line: least-norm solution of the 2x3 system
        M = np.stack([n1, n2], axis=1)  # (m, 2, 3)
        MMt = M @ np.transpose(M, (0, 2, 1))
        lamb = np.linalg.solve(MMt, np.stack([r1, r2], axis=1)[..., None])
        base = (np.transpose(M, (0, 2, 1)) @ lamb)[..., 0]
        fn, fo = eqs[:, :3], eqs[:, 3]
        num = -(base @ fn.T + fo)  # (m, f)
        den = direc @ fn.T
        with np.errstate(divide="ignore", invalid="ignore"):
            t = num / den
        hit = np.abs(den) > 1e-300
        mi, fi = np.nonzero(hit)
        if len(mi):
            X = base[mi] + t[mi, fi][:, None] * direc[mi]
            cands.append(X[inside(X)])

    for X in cands:
        if len(X):
            best = max(best, value(X))
    return best


GRID_STEPS = {0: 1, 1: 4000, 2: 200, 3: 40}


def _barycentric_grid(r: int, k: int) -> np.ndarray:
    """All weight vectors in the r-simplex with coordinates in (1/k) Z."""
    if r == 0:
        return np.ones((1, 1))
    rows = [c for c in itertools.product(range(k + 1), repeat=r) if sum(c) <= k]
    W = np.array(rows, dtype=float).reshape(-1, r) / k
    return np.hstack([1.0 - W.sum(axis=1, keepdims=True), W])


def sup_distance_hull_to_points_grid(V: np.ndarray, C: np.ndarray, p, steps: int | None = None):
    """``sup_{x in conv V} d_p(x, C)`` on a barycentric grid, any l_p.

    Returns ``(value, resolution)``: the true sup lies in
    ``[value, value + resolution]`` because ``d_p(., C)`` is 1-Lipschitz and
    every hull point is within ``resolution`` (max simplex diameter / steps)
    of a grid point.
    """
    from scipy.spatial import Delaunay

    V = extreme_points(np.asarray(V, dtype=float))
    C = np.asarray(C, dtype=float)
    pf = math.inf if p == math.inf else float(p)
    origin, B = affine_frame(V)
    r = len(B)
    k = steps or GRID_STEPS.get(r, 12)
    if r == 0:
        simplices = [V[:1]]
    elif r == 1:
        t = (V - origin) @ B[0]
        simplices = [V[[int(np.argmin(t)), int(np.argmax(t))]]]
    else:
        simplices = [V[s] for s in Delaunay((V - origin) @ B.T).simplices]
    W = _barycentric_grid(r, k)
    tree = cKDTree(C)
    value, res = 0.0, 0.0
    for S in simplices:
        value = max(value, float(tree.query(W @ S, p=pf)[0].max()))
        diam = max((np.linalg.norm(a - b, ord=pf) for a, b in itertools.combinations(S, 2)), default=0.0)
        res = max(res, diam / k)
    return value, res


def sup_distance_hull_to_points_sampled(V: np.ndarray, C: np.ndarray, n_samples: int, seed=0) -> float:
    """Monte Carlo lower estimate of the same quantity; for tests only."""
    rng = np.random.default_rng(seed)
    w = rng.dirichlet(np.full(len(V), 0.3), size=n_samples)
    X = np.vstack([w @ V, V])
    return float(cKDTree(C).query(X)[0].max())


def polygon_support_distance(A: np.ndarray, B: np.ndarray) -> float:
    """Exact ``sup_{|u|=1} |h_A(u) - h_B(u)|`` for planar point sets.

    Between consecutive edge normals of either hull the maximizing vertices
    are fixed, so the difference is ``<a - b, u>`` on an arc; its extreme on
    the arc is at an endpoint or at ``+/-(a - b)/|a - b|``.
    """
    A = extreme_points(A)
    B = extreme_points(B)

    def normals(P):
        if len(P) < 2:
            return np.zeros(0)
        if len(P) == 2:
            e = P[1] - P[0]
            ang = math.atan2(e[1], e[0])
            return np.array([ang + math.pi / 2, ang - math.pi / 2])
        hull = ConvexHull(P)
        return np.arctan2(hull.equations[:, 1], hull.equations[:, 0])

    angles = np.concatenate([normals(A), normals(B), [0.0]])
    angles = np.unique(np.mod(angles, 2 * math.pi))
    nxt = np.append(angles[1:], angles[0] + 2 * math.pi)
    best = 0.0
    for lo, hi in zip(angles, nxt):
        mid = 0.5 * (lo + hi)
        um = np.array([math.cos(mid), math.sin(mid)])
        a = A[int(np.argmax(A @ um))]
        b = B[int(np.argmax(B @ um))]
        w = a - b
        cand = [lo, hi]
        if np.any(w):
            phi = math.atan2(w[1], w[0])
            for ang in (phi, phi + math.pi):
                ang = lo + np.mod(ang - lo, 2 * math.pi)
                if ang <= hi:
                    cand.append(ang)
        for ang in cand:
            u = np.array([math.cos(ang), math.sin(ang)])
            best = max(best, abs(float(np.max(A @ u) - np.max(B @ u))))
    return best
