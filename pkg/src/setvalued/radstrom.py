"""Support-function embedding of bounded convex sets, sampled on finite
direction sets.

``embed(A, D)[i] = sup <D[i], A>``.  The embedding is additive and positively
homogeneous, and the sup over the whole dual ball of ``|h_A - h_B|`` is the
Hausdorff distance of the convex hulls; a finite direction set only gives a
lower bound, reported as such.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from . import _geometry as geo
from .sets import CompactSet, _DenseSet, scale, set_norm, support_function
from .space import Space, lp_norm

UNIT_TOL = 1e-12


@dataclass
class SupportSample:
    """Support values of one set on a fixed direction list."""

    directions: np.ndarray  # (r, d)
    values: np.ndarray  # (r,)

    def __post_init__(self):
        self.directions = np.atleast_2d(np.asarray(self.directions, dtype=float))
        self.values = np.asarray(self.values, dtype=float)
        if len(self.directions) != len(self.values):
            raise ValueError("directions and values differ in length")

    def check_unit(self, space: Space) -> None:
        dn = lp_norm(self.directions, space.q)
        bad = np.abs(dn - 1.0) > UNIT_TOL
        if bad.any():
            raise ValueError(f"{int(bad.sum())} directions do not have unit dual norm")

    def __add__(self, other: "SupportSample") -> "SupportSample":
        _same_directions(self, other)
        return SupportSample(self.directions, self.values + other.values)

    def to_dict(self) -> dict:
        return {"directions": self.directions.tolist(), "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "SupportSample":
        return cls(np.array(d["directions"], dtype=float), np.array(d["values"], dtype=float))

    def to_csv(self) -> str:
        """``angle,value`` rows; planar directions only."""
        if self.directions.shape[1] != 2:
            raise ValueError("angle export needs planar directions")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["angle", "value"])
        for (x, y), v in zip(self.directions, self.values):
            w.writerow([repr(math.atan2(y, x)), repr(float(v))])
        return buf.getvalue()


def _same_directions(a: SupportSample, b: SupportSample):
    if a.directions.shape != b.directions.shape or not np.array_equal(a.directions, b.directions):
        raise ValueError("support samples use different direction lists")


def embed(A: CompactSet, directions) -> SupportSample:
    """Support values of ``A`` at every direction."""
    if isinstance(A, _DenseSet):
        D = A.space.check(np.atleast_2d(np.asarray(directions, dtype=float)))
        return SupportSample(D, np.max(D @ A.points.T, axis=1))
    D = list(directions)
    return SupportSample(np.array([np.asarray(f, dtype=float) for f in D]), [float(support_function(A, f)) for f in D])


def sample_distance(a: SupportSample, b: SupportSample) -> float:
    """``max_i |a_i - b_i|``: a lower bound for ``d_H`` of the convex hulls."""
    _same_directions(a, b)
    if len(a.values) == 0:
        return 0.0
    return float(np.max(np.abs(a.values - b.values)))


def scale_property_check(A: CompactSet, lam, directions) -> float:
    """``max_i |embed(lam A) - lam embed(A)|``."""
    if lam < 0:
        raise ValueError("positive homogeneity only holds for lam >= 0")
    lhs = embed(scale(lam, A), directions).values
    rhs = float(lam) * embed(A, directions).values
    return float(np.max(np.abs(lhs - rhs), initial=0.0))


def additivity_defect(A: CompactSet, B: CompactSet, directions) -> float:
    """``max_i |embed(A + B) - embed(A) - embed(B)|``."""
    lhs = embed(A + B, directions).values
    rhs = embed(A, directions).values + embed(B, directions).values
    return float(np.max(np.abs(lhs - rhs), initial=0.0))


def exact_polygon_distance(A: CompactSet, B: CompactSet) -> float:
    """Exact ``sup_{|u|=1} |h_A(u) - h_B(u)|`` in the Euclidean plane.

    Equals the Hausdorff distance of the convex hulls.
    """
    for X in (A, B):
        if not isinstance(X, _DenseSet) or X.space.dim != 2 or X.space.p != 2:
            raise ValueError("exact mode needs planar sets in the Euclidean norm")
    return geo.polygon_support_distance(A.points, B.points)


def covering_radius_circle(directions) -> float:
    """Largest Euclidean distance from a unit-circle point to the nearest direction."""
    ang = np.sort(np.mod(np.arctan2(directions[:, 1], directions[:, 0]), 2 * math.pi))
    gaps = np.diff(np.append(ang, ang[0] + 2 * math.pi))
    return 2.0 * math.sin(float(gaps.max()) / 4.0)


def convergence_curve(A: CompactSet, B: CompactSet, counts, seed=0) -> list:
    """``sample_distance`` as the direction count grows.

    Direction lists are prefixes of one seeded stream, so the curve is
    nondecreasing.  In the Euclidean plane each row also carries the exact
    value and a certified upper bound ``sample + (|A| + |B|) * r`` with ``r``
    the covering radius of the directions on the circle.
    """
    space = A.space
    counts = sorted(int(c) for c in counts)
    D_all = space.sample_directions(counts[-1], seed)
    planar = space.dim == 2 and space.p == 2
    exact = exact_polygon_distance(A, B) if planar else None
    lip = float(set_norm(A)) + float(set_norm(B))
    rows = []
    for c in counts:
        D = D_all[:c]
        s = sample_distance(embed(A, D), embed(B, D))
        row = {"count": c, "sample_distance": s}
        if planar:
            row["exact"] = exact
            row["upper_bound"] = s + lip * covering_radius_circle(D)
        rows.append(row)
    return rows
