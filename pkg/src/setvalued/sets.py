"""Non-empty bounded sets and their calculus.

Four representations are available:

* :class:`PointCloud` -- a finite set of points in a dense space.
* :class:`ConvexPolytope` -- the convex hull of finitely many points.
* :class:`ESum` -- a weighted sum ``sum_k w_k E[I_k]`` of sets of characteristic
  functions over disjoint intervals, inside an :class:`L1Model` of ``L_1[0,1]``.
* :class:`IndexedHull` -- ``conv{s * e_n : n in N}`` in the sparse Hilbert model
  for an infinite, decidable index set ``N``.  Only its support function is
  computable.

Module-level functions (:func:`minkowski_sum`, :func:`hausdorff_distance`, ...)
dispatch on the representation and raise ``TypeError`` for combinations that
have no exact implementation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from . import _geometry as geo
from .space import Space, SparseVector, format_exponent, lp_norm, parse_exponent

MAX_POINTS = 10**6


class SetError(ValueError):
    """Raised when an operation's preconditions on its set operands fail."""


def _exact(x):
    """Fraction for ints/Fractions/strings, exact binary Fraction for floats."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


class CompactSet:
    """Common base; subclasses implement the actual representations."""

    space = None

    def support(self, f):
        return support_function(self, f)

    def norm(self):
        return set_norm(self)

    def __add__(self, other):
        return minkowski_sum(self, other)

    def __rmul__(self, lam):
        return scale(lam, self)


class _DenseSet(CompactSet):
    _kind = ""

    def __init__(self, points, space: Space | None = None):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.size == 0:
            raise SetError("sets must be non-empty")
        if pts.ndim != 2:
            raise SetError(f"points must form a 2-D array, got shape {pts.shape}")
        if space is None:
            space = Space(pts.shape[1])
        if space.is_sparse:
            raise SetError(f"{type(self).__name__} lives in a dense space")
        if pts.shape[1] != space.dim:
            raise SetError(f"points have dimension {pts.shape[1]}, space has {space.dim}")
        if not np.all(np.isfinite(pts)):
            raise SetError("points must be finite")
        self.space = space
        self._points = self._canonical(pts)
        self._points.setflags(write=False)

    def _canonical(self, pts):
        return geo.unique_rows(pts)

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def dim(self) -> int:
        return self.space.dim

    def __len__(self):
        return len(self._points)

    def sorted_points(self) -> np.ndarray:
        P = self._points
        return P[np.lexsort(P.T[::-1])]

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self.space == other.space and np.array_equal(self.sorted_points(), other.sorted_points())

    __hash__ = None

    def __repr__(self):
        return f"{type(self).__name__}({len(self)} points in {self.space})"


class PointCloud(_DenseSet):
    """Finite set of points; duplicates (within 1e-12) are merged."""

    _kind = "cloud"


class ConvexPolytope(_DenseSet):
    """Convex hull of finitely many points, stored by its extreme points."""

    _kind = "polytope"

    def _canonical(self, pts):
        return geo.extreme_points(pts)

    @property
    def vertices(self) -> np.ndarray:
        return self._points


@dataclass(frozen=True)
class L1Model:
    """Uniform discretization of ``L_1[0,1]`` into ``bins`` cells of width 1/bins.

    Vectors and functionals are per-bin value sequences of length ``bins``;
    a vector ``v`` stands for the step function equal to ``v[j]`` on bin ``j``.
    """

    bins: int

    def __post_init__(self):
        if int(self.bins) != self.bins or self.bins < 1:
            raise SetError(f"bins must be a positive integer, got {self.bins}")

    def aligned(self, x) -> bool:
        return (Fraction(x) * self.bins).denominator == 1

    def bin_range(self, a, b) -> range:
        return range(int(Fraction(a) * self.bins), int(Fraction(b) * self.bins))

    def _check(self, v):
        if len(v) != self.bins:
            raise SetError(f"expected {self.bins} bin values, got {len(v)}")
        return v

    def norm(self, v):
        return sum(abs(x) for x in self._check(v)) * Fraction(1, self.bins)

    def dual_norm(self, f):
        return max(abs(x) for x in self._check(f))

    def pair(self, f, v):
        return sum(a * b for a, b in zip(self._check(f), self._check(v))) * Fraction(1, self.bins)

    def indicator(self, a, b, weight=1) -> list:
        """Per-bin values of ``weight * 1_[a,b]``."""
        out = [Fraction(0)] * self.bins
        for j in self.bin_range(a, b):
            out[j] = Fraction(weight)
        return out

    def __str__(self):
        return f"L1[0,1] ({self.bins} bins)"


class ESum(CompactSet):
    """``sum_k w_k E[a_k, b_k]`` over pairwise disjoint, bin-aligned intervals.

    ``E[a, b]`` is the set of characteristic functions of measurable subsets of
    ``[a, b]``.  The empty term list is the singleton ``{0}``.
    """

    def __init__(self, model: L1Model, terms: Sequence = ()):
        clean = []
        for w, (a, b) in terms:
            w, a, b = _exact(w), _exact(a), _exact(b)
            if w <= 0:
                raise SetError(f"ESum weights must be positive, got {w}")
            if not 0 <= a < b <= 1:
                raise SetError(f"invalid interval [{a}, {b}]")
            if not (model.aligned(a) and model.aligned(b)):
                raise SetError(f"interval [{a}, {b}] is not aligned with {model}")
            clean.append((w, (a, b)))
        clean.sort(key=lambda t: t[1])
        for (_, (_, b0)), (_, (a1, _)) in zip(clean, clean[1:]):
            if a1 < b0:
                raise SetError("ESum intervals overlap")
        self.space = model
        self.model = model
        self.terms = tuple(clean)

    def normalized(self) -> "ESum":
        """Merge adjacent intervals that carry the same weight."""
        merged = []
        for w, (a, b) in self.terms:
            if merged and merged[-1][0] == w and merged[-1][1][1] == a:
                merged[-1] = (w, (merged[-1][1][0], b))
            else:
                merged.append((w, (a, b)))
        return ESum(self.model, merged)

    def weight_profile(self) -> list:
        """Breakpoints and weights ``[(a, b, w), ...]`` covering [0,1], zeros included."""
        out, x = [], Fraction(0)
        for w, (a, b) in self.terms:
            if a > x:
                out.append((x, a, Fraction(0)))
            out.append((a, b, w))
            x = b
        if x < 1:
            out.append((x, Fraction(1), Fraction(0)))
        return out

    def bin_weights(self) -> list:
        out = [Fraction(0)] * self.model.bins
        for w, (a, b) in self.terms:
            for j in self.model.bin_range(a, b):
                out[j] = w
        return out

    def __eq__(self, other):
        if not isinstance(other, ESum):
            return NotImplemented
        return self.model == other.model and self.normalized().terms == other.normalized().terms

    def __hash__(self):
        return hash((self.model, self.normalized().terms))

    def __repr__(self):
        body = " + ".join(f"{w}*E[{a}, {b}]" for w, (a, b) in self.terms) or "{0}"
        return f"ESum({body}; bins={self.model.bins})"


class IndexedHull(CompactSet):
    """``conv{scale * e_n : member(n)}`` in the sparse l_2 model.

    ``member`` must hold for infinitely many ``n``; then for a finitely
    supported functional ``f`` the support value is
    ``max(0, max{scale * f_n : n in supp f, member(n)})``.
    """

    def __init__(self, member: Callable[[int], bool], scale=2, key=None):
        self.space = Space.sparse()
        self.member = member
        self.scale = scale
        self.key = key

    def members(self, limit: int) -> list:
        """Indices ``n < limit`` in the generating set (a finite materialization)."""
        return [n for n in range(limit) if self.member(n)]

    def __eq__(self, other):
        if not isinstance(other, IndexedHull):
            return NotImplemented
        if self.key is None or other.key is None:
            return self is other
        return self.key == other.key and self.scale == other.scale

    def __hash__(self):
        return hash((self.key, self.scale))

    def __repr__(self):
        return f"IndexedHull(key={self.key!r}, scale={self.scale})"


# -- operations -----------------------------------------------------------------

def _same_space(A, B):
    if A.space != B.space:
        raise SetError(f"sets live in different spaces: {A.space} vs {B.space}")


def _is_singleton_cloud(A) -> bool:
    return isinstance(A, PointCloud) and len(A) == 1


def minkowski_sum(A: CompactSet, B: CompactSet) -> CompactSet:
    """``A + B = {a + b}``.

    Clouds give all pairwise sums, polytopes the hull of pairwise vertex sums,
    ESums the concatenation of their term lists.  A one-point cloud may be
    added to a polytope (a translation).
    """
    if isinstance(A, ESum) and isinstance(B, ESum):
        _same_space(A, B)
        return ESum(A.model, A.terms + B.terms)
    if isinstance(A, _DenseSet) and isinstance(B, _DenseSet):
        _same_space(A, B)
        if type(A) is type(B):
            cls = type(A)
        elif _is_singleton_cloud(A) or _is_singleton_cloud(B):
            cls = ConvexPolytope
        else:
            raise TypeError("cannot add a multi-point cloud and a polytope; take the hull first")
        n = len(A) * len(B)
        if n > MAX_POINTS:
            raise SetError(f"Minkowski sum would materialize {n} points (cap {MAX_POINTS})")
        P = (A.points[:, None, :] + B.points[None, :, :]).reshape(-1, A.dim)
        return cls(P, A.space)
    raise TypeError(f"no Minkowski sum for {type(A).__name__} + {type(B).__name__}")


def scale(lam, A: CompactSet) -> CompactSet:
    """``lam * A``; ESum weights are scaled exactly and require ``lam >= 0``."""
    if isinstance(A, ESum):
        lam = _exact(lam)
        if lam < 0:
            raise SetError("ESum sets can only be scaled by non-negative numbers")
        if lam == 0:
            return ESum(A.model)
        return ESum(A.model, [(lam * w, iv) for w, iv in A.terms])
    if isinstance(A, _DenseSet):
        return type(A)(float(lam) * A.points, A.space)
    if isinstance(A, IndexedHull):
        if lam < 0:
            raise SetError("negative scaling is not supported for IndexedHull")
        return IndexedHull(A.member, A.scale * lam, A.key)
    raise TypeError(f"cannot scale {type(A).__name__}")


def convex_hull(A: CompactSet) -> ConvexPolytope:
    if isinstance(A, ConvexPolytope):
        return A
    if isinstance(A, PointCloud):
        return ConvexPolytope(A.points, A.space)
    raise TypeError(f"convex hull of {type(A).__name__} is only available through support functions")


def support_function(A: CompactSet, f):
    """``sup_{a in A} <f, a>``."""
    if isinstance(A, _DenseSet):
        f = A.space.check(f)
        return float(np.max(A.points @ f))
    if isinstance(A, ESum):
        m = A.model
        f = m._check(f)
        total = 0
        for w, (a, b) in A.terms:
            total += w * sum(max(f[j], 0) for j in m.bin_range(a, b))
        return total * Fraction(1, m.bins)
    if isinstance(A, IndexedHull):
        if not isinstance(f, SparseVector):
            raise TypeError("IndexedHull support needs a SparseVector functional")
        best = 0
        for n in f:
            if f[n] > 0 and A.member(n):
                best = max(best, A.scale * f[n])
        return best
    raise TypeError(f"no support function for {type(A).__name__}")


def set_norm(A: CompactSet):
    """``sup_{a in A} ||a||``."""
    if isinstance(A, _DenseSet):
        return float(np.max(lp_norm(A.points, A.space.p)))
    if isinstance(A, ESum):
        return sum((w * (b - a) for w, (a, b) in A.terms), Fraction(0))
    if isinstance(A, IndexedHull):
        return A.scale
    raise TypeError(f"no norm for {type(A).__name__}")


def _directed_cloud_cloud(P, Q, p) -> float:
    pf = math.inf if p == math.inf else float(p)
    return float(cKDTree(Q).query(P, p=pf)[0].max())


def _dist_to_hull(Y, V, p):
    if p == 2:
        return geo.distances_to_hull(Y, V)
    if p == 1 or p == math.inf:
        return geo.distances_to_hull_lp(Y, V, p)
    return geo.distances_to_hull_lp_norm(Y, V, float(p))


def _esum_directed(A: ESum, B: ESum):
    cuts = sorted({x for a, b, _ in A.weight_profile() + B.weight_profile() for x in (a, b)})
    total = Fraction(0)
    for lo, hi in zip(cuts, cuts[1:]):
        mid = (lo + hi) / 2
        wa = next(w for a, b, w in A.weight_profile() if a <= mid < b)
        wb = next(w for a, b, w in B.weight_profile() if a <= mid < b)
        total += (hi - lo) * min(abs(wa - wb), wa)
    return total


def hausdorff_distance(A: CompactSet, B: CompactSet):
    """Hausdorff distance ``max(sup_a d(a, B), sup_b d(b, A))``.

    Exact for cloud/cloud (any l_p), polytope/polytope (l_1, l_inf by LP,
    l_2), cloud/polytope in l_2 (hull of affine dimension <= 3) and ESum/ESum
    (closed form, returned as a Fraction).  Polytopes in other l_p use a
    convex solver; cloud/polytope outside l_2 takes the hull side on a
    barycentric grid, a lower bound within the grid resolution.
    """
    _same_space(A, B)
    if isinstance(A, ESum) and isinstance(B, ESum):
        return max(_esum_directed(A, B), _esum_directed(B, A))
    if not (isinstance(A, _DenseSet) and isinstance(B, _DenseSet)):
        raise TypeError(f"no Hausdorff distance for {type(A).__name__} and {type(B).__name__}")
    p = A.space.p
    if isinstance(A, PointCloud) and isinstance(B, PointCloud):
        return max(_directed_cloud_cloud(A.points, B.points, p), _directed_cloud_cloud(B.points, A.points, p))
    if isinstance(A, ConvexPolytope) and isinstance(B, ConvexPolytope):
        return float(max(_dist_to_hull(A.points, B.points, p).max(), _dist_to_hull(B.points, A.points, p).max()))
    cloud, poly = (A, B) if isinstance(A, PointCloud) else (B, A)
    into = float(_dist_to_hull(cloud.points, poly.points, p).max())
    if p == 2:
        out = geo.sup_distance_hull_to_points(poly.points, cloud.points)
    else:
        # grid over the hull; the exact value is at most `res` larger
        out, res = geo.sup_distance_hull_to_points_grid(poly.points, cloud.points, p)
    return max(into, out)


def dist_point_to_eset(v: Sequence, E: ESum, model: L1Model | None = None):
    """L_1 distance from the step function ``v`` (per-bin values) to ``E``.

    The set is a product over bins, so the distance separates: a bin covered
    with weight ``w`` costs ``min(|v_j - w|, |v_j|) / bins``, an uncovered bin
    costs ``|v_j| / bins``.
    """
    model = model or E.model
    if model != E.model:
        raise SetError("vector model and set model differ")
    model._check(v)
    w = E.bin_weights()
    total = sum(min(abs(vj - wj), abs(vj)) if wj else abs(vj) for vj, wj in zip(v, w))
    return total * Fraction(1, model.bins)


@dataclass
class ConvexityReport:
    convex: bool
    distance: float | Fraction
    witness: object = None

    def __bool__(self):
        return self.convex


def is_convex_within(A: CompactSet, eps) -> ConvexityReport:
    """Midpoint test: is every midpoint of two points of ``A`` within ``eps`` of ``A``?

    Reports the worst midpoint found and its distance.  For an ESum the worst
    midpoint is known in closed form: half the sum of all its terms' full
    indicators (the midpoint of ``0`` and the largest element).
    """
    if isinstance(A, ConvexPolytope):
        return ConvexityReport(True, 0.0)
    if isinstance(A, ESum):
        witness = [w / 2 for w in A.bin_weights()]
        d = dist_point_to_eset(witness, A)
        return ConvexityReport(d <= eps, d, witness)
    if isinstance(A, PointCloud):
        P = A.points
        tree = cKDTree(P)
        pf = math.inf if A.space.p == math.inf else float(A.space.p)
        best, wit = 0.0, None
        for i in range(len(P)):
            mids = 0.5 * (P[i] + P[i + 1:])
            if len(mids) == 0:
                continue
            d, _ = tree.query(mids, p=pf)
            j = int(np.argmax(d))
            if d[j] > best:
                best, wit = float(d[j]), mids[j]
        return ConvexityReport(best <= eps, best, wit)
    raise TypeError(f"convexity test not available for {type(A).__name__}")


# -- serialization ----------------------------------------------------------------

def _frac_str(x) -> str:
    return str(Fraction(x))


def space_to_dict(space: Space) -> dict:
    return {"dim": space.dim, "p": format_exponent(space.p)}


def space_from_dict(d: dict) -> Space:
    return Space(dim=d["dim"], p=parse_exponent(d["p"]))


def set_to_dict(A: CompactSet) -> dict:
    if isinstance(A, _DenseSet):
        key = "points" if isinstance(A, PointCloud) else "vertices"
        return {"repr": A._kind, "space": space_to_dict(A.space), key: A.sorted_points().tolist()}
    if isinstance(A, ESum):
        return {
            "repr": "esum",
            "bins": A.model.bins,
            "terms": [{"weight": _frac_str(w), "interval": [_frac_str(a), _frac_str(b)]} for w, (a, b) in A.terms],
        }
    raise TypeError(f"{type(A).__name__} has no JSON form")


def set_from_dict(d: dict) -> CompactSet:
    kind = d.get("repr")
    need = {"cloud": ("points", "space"), "polytope": ("vertices", "space"), "esum": ("bins", "terms")}.get(kind, ())
    missing = [k for k in need if k not in d]
    if missing:
        raise SetError(f"{kind} set is missing field(s): {', '.join(missing)}")
    if kind == "cloud":
        return PointCloud(d["points"], space_from_dict(d["space"]))
    if kind == "polytope":
        return ConvexPolytope(d["vertices"], space_from_dict(d["space"]))
    if kind == "esum":
        model = L1Model(int(d["bins"]))
        return ESum(model, [(Fraction(t["weight"]), tuple(Fraction(x) for x in t["interval"])) for t in d["terms"]])
    raise SetError(f"unknown set representation {kind!r}")
