"""Ambient normed spaces: dense l_p spaces and a sparse Hilbert model.

Dense vectors and functionals are plain 1-D numpy arrays.  The sparse model
(countably many coordinates, l_2 norm) uses :class:`SparseVector`, an
immutable index -> coefficient map that never stores zeros.
"""
from __future__ import annotations

import functools
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Union

import numpy as np

Exponent = Union[Fraction, float]  # float only for math.inf


def parse_exponent(p) -> Exponent:
    """Return ``p`` as an exact Fraction, or ``math.inf``.

    Accepts ints, Fractions, strings such as ``"3/2"``, ``"inf"`` or ``"1.5"``,
    and finite floats (converted through their shortest decimal repr).
    """
    if isinstance(p, str):
        s = p.strip().lower()
        if s in ("inf", "infinity", "oo", "∞"):
            return math.inf
        p = Fraction(s)
    elif isinstance(p, float):
        if math.isinf(p):
            if p < 0:
                raise ValueError("exponent must be >= 1")
            return math.inf
        p = Fraction(repr(p))
    else:
        p = Fraction(p)
    if p < 1:
        raise ValueError(f"exponent must be >= 1, got {p}")
    return p


def conjugate_exponent(p: Exponent) -> Exponent:
    """Exact conjugate ``q`` with ``1/p + 1/q = 1``."""
    if p == math.inf:
        return Fraction(1)
    if p == 1:
        return math.inf
    return p / (p - 1)


def format_exponent(p: Exponent) -> str:
    return "inf" if p == math.inf else str(p)


def lp_norm(x, p: Exponent) -> float:
    """l_p norm of a dense array (last axis)."""
    x = np.asarray(x, dtype=float)
    if p == math.inf:
        return np.max(np.abs(x), axis=-1, initial=0.0)
    if p == 1:
        return np.sum(np.abs(x), axis=-1)
    if p == 2:
        return np.sqrt(np.sum(x * x, axis=-1))
    pf = float(p)
    return np.sum(np.abs(x) ** pf, axis=-1) ** (1.0 / pf)


_HASH_MOD = sys.hash_info.modulus
SMALL_INDEX_BITS = 4096


@functools.total_ordering
class BigIndex:
    """Non-negative integer stored by the positions of its 1-bits.

    For indices like ``2**j1 + 2**j2`` with ``j`` in the billions, which
    cannot be materialized.  Hashes and compares equal to the corresponding
    ``int``, so both kinds can key the same dictionary.
    """

    __slots__ = ("bits",)

    def __init__(self, bits: Iterable[int]):
        bits = tuple(sorted({int(j) for j in bits}))
        if bits and bits[0] < 0:
            raise ValueError("bit positions must be non-negative")
        self.bits = bits

    @classmethod
    def from_int(cls, n: int) -> "BigIndex":
        if n < 0:
            raise ValueError("BigIndex is non-negative")
        s = bin(n)[:1:-1]
        out = [j for j, c in enumerate(s) if c == "1"]
        return cls(out)

    def bit_length(self) -> int:
        return self.bits[-1] + 1 if self.bits else 0

    def __int__(self):
        if self.bit_length() > 1 << 26:
            raise OverflowError(f"index with {self.bit_length()} bits is too large to materialize")
        return sum(1 << j for j in self.bits)

    def _key(self):
        return self.bits[::-1]

    def __eq__(self, other):
        if isinstance(other, (int, np.integer)):
            return other >= 0 and self.bit_length() == int(other).bit_length() and self.bits == BigIndex.from_int(int(other)).bits
        if isinstance(other, BigIndex):
            return self.bits == other.bits
        return NotImplemented

    def __lt__(self, other):
        if isinstance(other, (int, np.integer)):
            other = BigIndex.from_int(int(other))
        if not isinstance(other, BigIndex):
            return NotImplemented
        return self._key() < other._key()

    def __hash__(self):
        # int hash is n mod (2**61 - 1) and 2**61 = 1 there
        return sum(pow(2, j % 61, _HASH_MOD) for j in self.bits) % _HASH_MOD

    def __repr__(self):
        if self.bit_length() <= 64:
            return f"BigIndex({int(self)})"
        return f"BigIndex(bits={list(self.bits[:4])}{'...' if len(self.bits) > 4 else ''}, bit_length={self.bit_length()})"


def canonical_index(k):
    """Plain ``int`` for manageable indices, :class:`BigIndex` otherwise."""
    if isinstance(k, BigIndex):
        return int(k) if k.bit_length() <= SMALL_INDEX_BITS else k
    k = int(k)
    if k < 0:
        raise ValueError("sparse indices must be non-negative")
    return k


class SparseVector(Mapping):
    """Immutable finitely supported vector with arbitrary (big) int indices.

    Indices are ints or :class:`BigIndex` values.
    """

    __slots__ = ("_data", "_hash")

    def __init__(self, data: Mapping[int, float] | Iterable[tuple[int, float]] = ()):
        items = data.items() if isinstance(data, Mapping) else data
        clean = {}
        for k, v in items:
            k = canonical_index(k)
            if v != 0:
                clean[k] = clean.get(k, 0) + v
        self._data = {k: v for k, v in clean.items() if v != 0}
        self._hash = None

    @classmethod
    def basis(cls, index: int, value=1) -> "SparseVector":
        return cls({index: value})

    @classmethod
    def from_dense(cls, x) -> "SparseVector":
        return cls((i, float(v)) for i, v in enumerate(np.asarray(x, dtype=float)))

    def to_dense(self, dim: int) -> np.ndarray:
        out = np.zeros(dim)
        for k, v in self._data.items():
            if k >= dim:
                raise ValueError(f"index {k} does not fit in dimension {dim}")
            out[k] = v
        return out

    def __getitem__(self, k):
        return self._data.get(k, 0)

    def __iter__(self):
        return iter(sorted(self._data))

    def __len__(self):
        return len(self._data)

    def __contains__(self, k):
        return k in self._data

    def __eq__(self, other):
        if isinstance(other, SparseVector):
            return self._data == other._data
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._data.items()))
        return self._hash

    def __repr__(self):
        body = ", ".join(f"{k}: {self._data[k]!r}" for k in self)
        return f"SparseVector({{{body}}})"

    def __add__(self, other: "SparseVector") -> "SparseVector":
        out = dict(self._data)
        for k, v in other._data.items():
            out[k] = out.get(k, 0) + v
        return SparseVector(out)

    def __sub__(self, other: "SparseVector") -> "SparseVector":
        return self + (-1) * other

    def __mul__(self, c) -> "SparseVector":
        return SparseVector({k: c * v for k, v in self._data.items()})

    __rmul__ = __mul__

    def dot(self, other: "SparseVector"):
        if len(other._data) < len(self._data):
            self, other = other, self
        return sum((v * other._data[k] for k, v in self._data.items() if k in other._data), 0)

    @property
    def support(self) -> frozenset:
        return frozenset(self._data)


@dataclass(frozen=True)
class Space:
    """An l_p space, either ``R^dim`` (dense) or the sparse l_2 model.

    Parameters
    ----------
    dim : int or None
        Dimension for dense mode; ``None`` selects the sparse model.
    p : exponent
        Norm exponent, stored exactly (Fraction or ``math.inf``).
    """

    dim: int | None = 2
    p: Exponent = field(default=Fraction(2))

    def __post_init__(self):
        object.__setattr__(self, "p", parse_exponent(self.p))
        if self.dim is None:
            if self.p != 2:
                raise ValueError("the sparse model is only available with the l_2 norm")
        elif int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dim}")
        else:
            object.__setattr__(self, "dim", int(self.dim))

    @classmethod
    def sparse(cls) -> "Space":
        return cls(dim=None, p=2)

    @property
    def is_sparse(self) -> bool:
        return self.dim is None

    @property
    def q(self) -> Exponent:
        return conjugate_exponent(self.p)

    def __str__(self):
        if self.is_sparse:
            return "l2(N)"
        return f"l{format_exponent(self.p)}(R^{self.dim})"

    def check(self, v):
        """Validate ``v`` against this space and return it in canonical form."""
        if self.is_sparse:
            if not isinstance(v, SparseVector):
                raise TypeError("sparse space expects SparseVector values")
            return v
        if isinstance(v, SparseVector):
            raise TypeError("dense space expects array values")
        v = np.asarray(v, dtype=float)
        if v.shape[-1:] != (self.dim,):
            raise ValueError(f"expected vectors of dimension {self.dim}, got shape {v.shape}")
        return v

    def norm(self, v) -> float:
        v = self.check(v)
        if self.is_sparse:
            return math.sqrt(sum(float(c) ** 2 for c in v.values()))
        return float(lp_norm(v, self.p))

    def dual_norm(self, f) -> float:
        f = self.check(f)
        if self.is_sparse:
            return self.norm(f)
        return float(lp_norm(f, self.q))

    def pair(self, f, v):
        return pair(self.check(f), self.check(v))

    def distance(self, u, v) -> float:
        if self.is_sparse:
            return self.norm(self.check(u) - self.check(v))
        return self.norm(np.asarray(u, dtype=float) - np.asarray(v, dtype=float))

    def basis(self, i: int, scale=1.0):
        if self.is_sparse:
            return SparseVector.basis(i, scale)
        if not 0 <= i < self.dim:
            raise IndexError(i)
        e = np.zeros(self.dim)
        e[i] = scale
        return e

    def zero(self):
        return SparseVector() if self.is_sparse else np.zeros(self.dim)

    def sample_directions(self, count: int, seed=None) -> np.ndarray:
        """Unit functionals (dual norm 1) covering the dual sphere.

        The first ``2 * dim`` rows are the coordinate functionals ``+e_1, -e_1,
        +e_2, ...``; the remaining rows are random and drawn row by row, so a
        larger ``count`` with the same seed extends the smaller list.
        """
        if self.is_sparse:
            raise ValueError("directions in the sparse model must be given explicitly")
        d = self.dim
        if count < 2 * d:
            raise ValueError(f"need at least {2 * d} directions to include +/- coordinate functionals")
        coords = np.zeros((2 * d, d))
        for i in range(d):
            coords[2 * i, i] = 1.0
            coords[2 * i + 1, i] = -1.0
        r = count - 2 * d
        if r == 0:
            return coords
        rng = np.random.default_rng(seed)
        q = self.q
        if q == math.inf:
            # uniform on the cube surface: one saturated coordinate, the rest uniform
            raw = rng.random((r, d + 2))
            dirs = 2.0 * raw[:, :d] - 1.0
            face = np.minimum((raw[:, d] * d).astype(int), d - 1)
            sign = np.where(raw[:, d + 1] < 0.5, -1.0, 1.0)
            dirs[np.arange(r), face] = sign
        elif q == 1:
            # uniform on the l_1 sphere: normalized exponentials with random signs
            raw = rng.random((r, 2 * d))
            mag = -np.log1p(-raw[:, :d])
            sign = np.where(raw[:, d:] < 0.5, -1.0, 1.0)
            dirs = sign * mag
            dirs /= np.sum(np.abs(dirs), axis=1, keepdims=True)
        else:
            dirs = rng.standard_normal((r, d))
            dirs /= lp_norm(dirs, q)[:, None]
        return np.vstack([coords, dirs])


def pair(f, v):
    """Duality pairing ``<f, v> = sum_j f_j v_j``."""
    if isinstance(f, SparseVector) or isinstance(v, SparseVector):
        if not (isinstance(f, SparseVector) and isinstance(v, SparseVector)):
            raise TypeError("cannot pair sparse and dense vectors")
        return f.dot(v)
    f = np.asarray(f, dtype=float)
    v = np.asarray(v, dtype=float)
    if f.shape != v.shape:
        raise ValueError(f"dimension mismatch: {f.shape} vs {v.shape}")
    return float(f @ v)


def norm(space: Space, v) -> float:
    return space.norm(v)
