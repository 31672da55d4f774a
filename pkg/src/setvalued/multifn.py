"""Multifunctions ``F: [0,1] -> non-empty bounded sets`` and built-in examples.

Tags are exact Fractions or floats.  Rules that depend on arithmetic
properties of the tag (rationality, denominators) go through
:func:`exact_tag`: a float counts as rational only if a fraction with
denominator at most 10**6 reproduces it exactly.
"""
from __future__ import annotations

import bisect
import functools
import math
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .partition import PartitionError, is_prime
from .sets import (
    CompactSet,
    ConvexPolytope,
    ESum,
    IndexedHull,
    L1Model,
    PointCloud,
    SetError,
    convex_hull,
    set_norm,
)
from .space import BigIndex, Space, SparseVector, canonical_index

DENOMINATOR_CAP = 10**6
BOUND_TOL = 1e-12


class BoundViolation(ValueError):
    """A value's norm exceeded the multifunction's declared bound."""


def exact_tag(t) -> Fraction | None:
    """Exact rational value of a tag, or ``None`` for a generic (irrational) tag."""
    if isinstance(t, Fraction):
        return t
    if isinstance(t, (int, np.integer)):
        return Fraction(int(t))
    t = float(t)
    fr = Fraction(t).limit_denominator(DENOMINATOR_CAP)
    return fr if float(fr) == t else None


class Multifunction:
    """A pure evaluation rule ``t -> CompactSet`` with a declared bound ``M``.

    Parameters
    ----------
    rule : callable
        Maps a tag to a set.
    bound : number
        Declared ``M(F)``; every evaluation is checked against it.
    space : Space or L1Model
        Where the values live.
    special_tags : callable, optional
        ``(a, b) -> list`` of tags in ``[a, b]`` that hit the rule's special
        branches.  Used to seed tag searches.
    """

    def __init__(
        self,
        rule: Callable,
        bound,
        space,
        *,
        convex_valued: bool = False,
        compact_valued: bool = True,
        singleton_valued: bool = False,
        special_tags: Callable | None = None,
        name: str = "F",
    ):
        self.rule = rule
        self.bound = bound
        self.space = space
        self.convex_valued = convex_valued
        self.compact_valued = compact_valued
        self.singleton_valued = singleton_valued
        self._special = special_tags
        self.name = name

    def __call__(self, t) -> CompactSet:
        if not 0 <= t <= 1:
            raise ValueError(f"tag {t} is outside [0, 1]")
        value = self.rule(t)
        nv = set_norm(value)
        if nv > self.bound + BOUND_TOL:
            raise BoundViolation(f"{self.name}({t}) has norm {nv} > declared bound {self.bound}")
        return value

    def special_tags(self, a, b) -> list:
        return list(self._special(a, b)) if self._special else []

    def __repr__(self):
        return f"Multifunction({self.name!r}, M={self.bound}, space={self.space})"


def constant_set(A: CompactSet) -> Multifunction:
    convex = isinstance(A, ConvexPolytope) or (isinstance(A, PointCloud) and len(A) == 1)
    return Multifunction(
        lambda t: A,
        set_norm(A),
        A.space,
        convex_valued=convex,
        singleton_valued=isinstance(A, PointCloud) and len(A) == 1,
        name="constant",
    )


def singleton_of(f: Callable, bound, space: Space, *, special_tags=None, name="singleton") -> Multifunction:
    """``F(t) = {f(t)}`` for a vector-valued rule ``f``."""
    return Multifunction(
        lambda t: PointCloud(np.asarray(f(t), dtype=float)[None, :], space),
        bound,
        space,
        convex_valued=True,
        singleton_valued=True,
        special_tags=special_tags,
        name=name,
    )


def linear_singleton(space: Space | None = None) -> Multifunction:
    """``F(t) = {t e_1}``."""
    space = space or Space(2)
    e1 = space.basis(0)
    return singleton_of(lambda t: float(t) * e1, 1.0, space, name="singleton:linear")


def polynomial_singleton(coefs: Sequence[float], space: Space | None = None) -> Multifunction:
    """``F(t) = {(c_0 + c_1 t + ...) e_1}``."""
    space = space or Space(2)
    e1 = space.basis(0)
    coefs = [float(c) for c in coefs]
    bound = sum(abs(c) for c in coefs)
    return singleton_of(
        lambda t: sum(c * float(t) ** k for k, c in enumerate(coefs)) * e1, bound, space, name="singleton:poly"
    )


def _rational_in(a, b) -> list:
    mid = (a + b) / 2
    if isinstance(mid, Fraction):
        return [mid]
    fr = Fraction(mid).limit_denominator(DENOMINATOR_CAP)
    return [fr] if a <= fr <= b else []


def rational_indicator(space: Space | None = None) -> Multifunction:
    """``F(t) = {e_1}`` for rational ``t`` and ``{0}`` otherwise."""
    space = space or Space(2)
    e1, zero = space.basis(0), space.zero()
    return singleton_of(
        lambda t: e1 if exact_tag(t) is not None else zero,
        1.0,
        space,
        special_tags=_rational_in,
        name="singleton:indicator",
    )


def step_multifunction(pieces: Sequence) -> Multifunction:
    """Piecewise constant ``F``; ``pieces`` is ``[((a, b), set), ...]`` tiling [0, 1].

    Segments are half-open ``[a, b)`` except the last, which contains 1.
    """
    if not pieces:
        raise PartitionError("need at least one piece")
    pieces = sorted(pieces, key=lambda pc: pc[0][0])
    starts = [a for (a, _), _ in pieces]
    if starts[0] != 0 or pieces[-1][0][1] != 1:
        raise PartitionError("pieces must cover [0, 1]")
    for ((_, b0), _), ((a1, _), _) in zip(pieces, pieces[1:]):
        if a1 != b0:
            raise PartitionError(f"pieces leave a gap or overlap at {b0} / {a1}")
    for (a, b), _ in pieces:
        if not a < b:
            raise PartitionError(f"empty piece [{a}, {b}]")
    values = [A for _, A in pieces]
    spaces = {A.space for A in values}
    if len(spaces) != 1:
        raise SetError("all pieces must live in one space")

    def rule(t):
        return values[bisect.bisect_right(starts, t) - 1]

    return Multifunction(
        rule,
        max(set_norm(A) for A in values),
        values[0].space,
        convex_valued=all(isinstance(A, ConvexPolytope) or (isinstance(A, PointCloud) and len(A) == 1) for A in values),
        singleton_valued=all(isinstance(A, PointCloud) and len(A) == 1 for A in values),
        special_tags=lambda a, b: [x for x in starts[1:] if a <= x <= b],
        name="step",
    )


def random_step_multifunction(seed, dim: int = 2, pieces: int = 2, max_points: int = 2, p=2) -> Multifunction:
    """Seeded piecewise-constant cloud-valued multifunction.

    Breakpoints are distinct multiples of 1/16; each piece is a cloud of
    1..``max_points`` points drawn uniformly from ``[-1, 1]^dim``.
    """
    rng = np.random.default_rng(seed)
    space = Space(dim, p)
    cuts = sorted(rng.choice(np.arange(1, 16), size=pieces - 1, replace=False).tolist())
    b = [Fraction(0)] + [Fraction(c, 16) for c in cuts] + [Fraction(1)]
    out = []
    for lo, hi in zip(b, b[1:]):
        k = int(rng.integers(1, max_points + 1))
        out.append(((lo, hi), PointCloud(rng.uniform(-1, 1, (k, dim)), space)))
    F = step_multifunction(out)
    F.name = f"step:random:{seed}"
    return F


def conv_lift(F: Multifunction) -> Multifunction:
    """``(conv F)(t) = conv F(t)``."""
    if isinstance(F.space, L1Model):
        raise TypeError("convex hulls of ESum values are not available")

    def rule(t):
        A = F(t)
        return A if isinstance(A, IndexedHull) else convex_hull(A)

    return Multifunction(
        rule,
        F.bound,
        F.space,
        convex_valued=True,
        compact_valued=F.compact_valued,
        singleton_valued=F.singleton_valued,
        special_tags=F._special,
        name=f"conv({F.name})",
    )


# -- the L_1 example --------------------------------------------------------------

def l1_tag_data(t):
    """``(p, n)`` if ``t = (2n-1)/(2p)`` in lowest terms with ``p`` prime, else ``None``."""
    e = exact_tag(t)
    if e is None or e.denominator % 2:
        return None
    p = e.denominator // 2
    if not is_prime(p):
        return None
    return p, (e.numerator + 1) // 2


def l1_example(model: L1Model) -> Multifunction:
    """``F(t) = p E[(2n-2)/2p, 2n/2p]`` at ``t = (2n-1)/2p`` (p prime), ``{0}`` elsewhere.

    A tag matches only when its lowest-terms denominator is exactly ``2p``.
    """

    def rule(t):
        hit = l1_tag_data(t)
        if hit is None:
            return ESum(model)
        p, n = hit
        a, b = Fraction(2 * n - 2, 2 * p), Fraction(2 * n, 2 * p)
        if not (model.aligned(a) and model.aligned(b)):
            raise SetError(f"tag {t} needs interval [{a}, {b}], not aligned with {model}")
        return ESum(model, [(p, (a, b))])

    def special(a, b):
        out = []
        for p in range(2, model.bins // 2 + 1):
            if not is_prime(p) or model.bins % p:
                continue
            for n in range(1, p + 1):
                t = Fraction(2 * n - 1, 2 * p)
                if a <= t <= b and t.denominator == 2 * p:
                    out.append(t)
        return sorted(set(out))[:8]

    return Multifunction(rule, Fraction(1), model, special_tags=special, name="l1")


# -- the biorthogonal example -------------------------------------------------------
#
# Countable base of [0, 1]: B(q, k) = ((k-1)/q, (k+1)/q) intersected with [0, 1]
# for q >= 1, 0 <= k <= q, numbered by q then k.  A finite union of base sets is
# encoded by the bit-set of its base indices; pi(n) is the union at the 1-bits
# of n.

def base_index(q: int, k: int) -> int:
    if q < 1 or not 0 <= k <= q:
        raise ValueError(f"no base interval for q={q}, k={k}")
    return (q - 1) * (q + 2) // 2 + k


def base_params(j: int) -> tuple:
    q = max(1, (math.isqrt(9 + 8 * j) - 1) // 2)
    while (q - 1) * (q + 2) // 2 > j:
        q -= 1
    while q * (q + 3) // 2 <= j:
        q += 1
    return q, j - (q - 1) * (q + 2) // 2


def base_interval(j: int) -> tuple:
    """Open endpoints ``(lo, hi)`` of base set ``j`` (before clipping to [0, 1])."""
    q, k = base_params(j)
    return Fraction(k - 1, q), Fraction(k + 1, q)


def in_base(t: Fraction, j: int) -> bool:
    lo, hi = base_interval(j)
    return lo < t < hi


def bits(n) -> list:
    """Positions of the 1-bits of an int or :class:`BigIndex`, ascending."""
    if isinstance(n, BigIndex):
        return list(n.bits)
    return list(BigIndex.from_int(n).bits)


@functools.lru_cache(maxsize=32)
def _decoded(n: int):
    """``(q, k)`` arrays for the 1-bits of ``n``; a pure cache for big indices."""
    if n <= 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    raw = np.unpackbits(np.frombuffer(n.to_bytes((n.bit_length() + 7) // 8, "little"), dtype=np.uint8), bitorder="little")
    js = np.nonzero(raw)[0].astype(np.int64)
    q = np.maximum(1, (np.floor(np.sqrt(9.0 + 8.0 * js)).astype(np.int64) - 1) // 2)
    # fix rounding of the float square root
    q -= ((q - 1) * (q + 2) // 2 > js).astype(np.int64)
    q += (q * (q + 3) // 2 <= js).astype(np.int64)
    return q, js - (q - 1) * (q + 2) // 2


_INT_SAFE = 1 << 30


def pi_contains(n, t) -> bool:
    """Is ``t`` in the finite union ``pi(n)``?  ``n`` is an int or a BigIndex."""
    t = Fraction(t)
    if isinstance(n, BigIndex):
        return any(in_base(t, j) for j in n.bits)
    q, k = _decoded(int(n))
    if not len(q):
        return False
    P, Q = t.numerator, t.denominator
    if P < _INT_SAFE and Q < _INT_SAFE and int(q[-1]) < _INT_SAFE:
        Pq = P * q
        return bool(np.any(((k - 1) * Q < Pq) & (Pq < (k + 1) * Q)))
    return any(in_base(t, j) for j in bits(n))


def separating_base_index(a, avoid) -> int:
    """Lowest-index base set containing ``a`` and no point of ``avoid``."""
    a = Fraction(a)
    avoid = sorted(Fraction(x) for x in avoid)
    i = bisect.bisect_left(avoid, a)
    if i < len(avoid) and avoid[i] == a:
        raise ValueError(f"{a} cannot be separated from a set containing it")
    L = avoid[i - 1] if i > 0 else None
    R = avoid[i] if i < len(avoid) else None
    # a base set of width 2/q must fit between the neighbours L < a < R
    q = max(1, math.ceil(2 / (R - L))) if L is not None and R is not None else 1
    while True:
        k_lo = max(0, math.floor(q * a - 1) + 1)
        k_hi = min(q, math.ceil(q * a + 1) - 1)
        if L is not None:
            k_lo = max(k_lo, math.ceil(q * L) + 1)
        if R is not None:
            k_hi = min(k_hi, math.floor(q * R) - 1)
        if k_lo <= k_hi:
            return base_index(q, k_lo)
        q += 1


def separating_union(points, avoid) -> tuple:
    """Base indices (sorted) and bit-set index of a union covering ``points`` and missing ``avoid``.

    The index is an ``int`` when small enough, a :class:`BigIndex` otherwise.
    """
    js = sorted({separating_base_index(a, avoid) for a in points})
    return js, canonical_index(BigIndex(js))


BIORTH_SCALE = 2  # ||x_n|| = C + 1 with C = 1


def biorth_vector(n: int) -> SparseVector:
    """``x_n = 2 e_n``."""
    return SparseVector.basis(n, BIORTH_SCALE)


def biorth_functional(n: int) -> SparseVector:
    """``f_n = e_n / 2``, so ``f_i(x_j) = delta_ij`` and ``||f_n|| = 1/2``."""
    return SparseVector.basis(n, Fraction(1, BIORTH_SCALE))


def biorthogonal_example() -> Multifunction:
    """``F(t) = conv{x_n : t in pi(n)}`` in the sparse Hilbert model, bound 2."""

    def rule(t):
        e = exact_tag(t)
        if e is None:
            raise ValueError(f"tag {t!r} is not an exact rational; the biorthogonal example needs exact tags")
        return IndexedHull(lambda n, e=e: pi_contains(n, e), BIORTH_SCALE, key=e)

    return Multifunction(
        rule, BIORTH_SCALE, Space.sparse(), convex_valued=True, compact_valued=False, name="biorth"
    )
