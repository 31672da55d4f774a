"""Tagged partitions of [0, 1] and generators for partition sequences."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np


class PartitionError(ValueError):
    pass


def _num(x):
    """Keep Fractions and ints exact, floats as floats."""
    if isinstance(x, (Fraction, float)):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, str):
        return parse_number(x)
    raise TypeError(f"cannot use {type(x).__name__} as a partition coordinate")


def parse_number(s: str):
    """``"1/3"`` or ``"2"`` -> Fraction; anything with a decimal point or exponent -> float."""
    s = s.strip()
    if any(c in s for c in ".eE") and "/" not in s:
        return float(s)
    return Fraction(s)


def format_number(x) -> str:
    return str(x) if isinstance(x, Fraction) else repr(float(x))


@dataclass(frozen=True)
class TaggedPartition:
    """Breakpoints ``0 = b_0 < ... < b_n = 1`` with one tag per segment.

    Coordinates are Fractions when they come from rational generators and
    floats otherwise; exact coordinates give exact segment lengths.
    """

    breakpoints: tuple
    tags: tuple

    def __post_init__(self):
        b = tuple(_num(x) for x in self.breakpoints)
        t = tuple(_num(x) for x in self.tags)
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "tags", t)
        if len(b) < 2:
            raise PartitionError("a partition needs at least one segment")
        if b[0] != 0 or b[-1] != 1:
            raise PartitionError("breakpoints must start at 0 and end at 1")
        if any(x >= y for x, y in zip(b, b[1:])):
            raise PartitionError("breakpoints must be strictly increasing")
        if len(t) != len(b) - 1:
            raise PartitionError(f"expected {len(b) - 1} tags, got {len(t)}")
        for i, (x, lo, hi) in enumerate(zip(t, b, b[1:])):
            if not lo <= x <= hi:
                raise PartitionError(f"tag {x} lies outside segment {i} = [{lo}, {hi}]")

    @property
    def n(self) -> int:
        return len(self.tags)

    @property
    def intervals(self) -> list:
        return list(zip(self.breakpoints, self.breakpoints[1:]))

    @property
    def lengths(self) -> list:
        """Segment lengths, exact when both endpoints are Fractions."""
        return [hi - lo for lo, hi in self.intervals]

    @property
    def diameter(self):
        return max(self.lengths)

    def with_tags(self, tags: Sequence) -> "TaggedPartition":
        return TaggedPartition(self.breakpoints, tuple(tags))

    def to_dict(self) -> dict:
        return {
            "breakpoints": [format_number(x) for x in self.breakpoints],
            "tags": [format_number(x) for x in self.tags],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TaggedPartition":
        return cls(tuple(parse_number(x) for x in d["breakpoints"]), tuple(parse_number(x) for x in d["tags"]))


def diameter(partition: TaggedPartition):
    return partition.diameter


def _tags_for(intervals, rule):
    if isinstance(rule, str):
        if rule == "left":
            return [lo for lo, _ in intervals]
        if rule == "right":
            return [hi for _, hi in intervals]
        if rule == "mid":
            return [(lo + hi) / 2 for lo, hi in intervals]
        raise PartitionError(f"unknown tag rule {rule!r}")
    tags = list(rule)
    if len(tags) != len(intervals):
        raise PartitionError(f"custom tag list has length {len(tags)}, expected {len(intervals)}")
    return tags


def uniform_partition(n: int, tag_rule="mid") -> TaggedPartition:
    """``n`` equal segments; ``tag_rule`` is ``left``, ``right``, ``mid`` or a list."""
    if n < 1:
        raise PartitionError("n must be >= 1")
    b = [Fraction(i, n) for i in range(n + 1)]
    return TaggedPartition(tuple(b), tuple(_tags_for(list(zip(b, b[1:])), tag_rule)))


def is_prime(p: int) -> bool:
    if p < 2 or int(p) != p:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    return all(p % k for k in range(3, math.isqrt(p) + 1, 2))


def primes(count: int) -> list:
    out, k = [], 2
    while len(out) < count:
        if is_prime(k):
            out.append(k)
        k += 1
    return out


def prime_partition(p: int) -> TaggedPartition:
    """Segments ``[(2i-2)/2p, 2i/2p]`` tagged at their midpoints ``(2i-1)/2p``."""
    if not is_prime(p):
        raise PartitionError(f"{p} is not prime")
    b = [Fraction(2 * i, 2 * p) for i in range(p + 1)]
    tags = [Fraction(2 * i - 1, 2 * p) for i in range(1, p + 1)]
    return TaggedPartition(tuple(b), tuple(tags))


def random_partition(max_diameter: float, seed=None, exact: bool = False) -> TaggedPartition:
    """Random float partition with ``diameter <= max_diameter`` and random tags.

    Uses ``n >= 2 / max_diameter`` segments with weights in ``[1/2, 1)``, which
    bounds every normalized length by ``2 / n``.  With ``exact=True`` the same
    coordinates are returned as (dyadic) Fractions.
    """
    if not 0 < max_diameter <= 1:
        raise PartitionError("max_diameter must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    n = math.ceil(2.0 / max_diameter) + int(rng.integers(0, 3))
    w = rng.uniform(0.5, 1.0, n)
    b = np.concatenate([[0.0], np.cumsum(w) / w.sum()])
    b[-1] = 1.0
    def too_wide(b):
        if exact:
            return max(Fraction(y) - Fraction(x) for x, y in zip(b, b[1:])) > Fraction(max_diameter)
        return np.max(np.diff(b)) > max_diameter

    while too_wide(b):  # rounding guard
        n += 1
        w = rng.uniform(0.5, 1.0, n)
        b = np.concatenate([[0.0], np.cumsum(w) / w.sum()])
        b[-1] = 1.0
    u = rng.random(n)
    tags = b[:-1] + u * np.diff(b)
    tags = np.clip(tags, b[:-1], b[1:])
    conv = Fraction if exact else float
    return TaggedPartition(tuple(conv(float(x)) for x in b), tuple(conv(float(x)) for x in tags))


def schedule(kind: str, length: int, seed=0, tag_rule="mid", exact: bool = False) -> list:
    """Sequence of partitions with strictly decreasing diameters.

    ``uniform-doubling`` uses ``n = 2, 4, 8, ...``; ``primes`` the prime
    partitions for the first ``length`` primes; ``random`` seeded random
    partitions whose diameter bound halves (and keeps strictly below the
    previous diameter).
    """
    if length < 1:
        raise PartitionError("schedule length must be >= 1")
    if kind == "uniform-doubling":
        return [uniform_partition(2**k, tag_rule) for k in range(1, length + 1)]
    if kind == "primes":
        return [prime_partition(p) for p in primes(length)]
    if kind == "random":
        out = []
        bound = 1.0
        for k in range(length):
            bound = min(0.5 ** (k + 1), bound)
            part = random_partition(bound, seed=(seed, k), exact=exact)
            out.append(part)
            bound = 0.99 * float(part.diameter)
        return out
    raise PartitionError(f"unknown schedule kind {kind!r}")


def parse_partition(spec: str, seed=0) -> TaggedPartition:
    """Partition from a short string.

    ``uniform:N[:rule]``, ``prime:P``, ``random:DIAM[:SEED]`` or
    ``random-exact:DIAM[:SEED]`` (same partition with Fraction coordinates).
    """
    parts = spec.split(":")
    kind = parts[0]
    if kind == "uniform":
        return uniform_partition(int(parts[1]), parts[2] if len(parts) > 2 else "mid")
    if kind == "prime":
        return prime_partition(int(parts[1]))
    if kind in ("random", "random-exact"):
        return random_partition(
            float(parse_number(parts[1])), int(parts[2]) if len(parts) > 2 else seed, exact=kind == "random-exact"
        )
    raise PartitionError(f"unknown partition spec {spec!r}")
