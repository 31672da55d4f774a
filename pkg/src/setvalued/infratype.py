"""Minimal signed sums, empirical infratype constants and the resulting
Riemann-sum convexification bound."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .space import Space, lp_norm, parse_exponent

CHUNK = 1 << 15


def _as_dense(space: Space, vectors) -> np.ndarray:
    if space.is_sparse:
        vectors = [space.check(v) for v in vectors]
        keys = sorted({k for v in vectors for k in v})
        col = {k: j for j, k in enumerate(keys)}
        X = np.zeros((len(vectors), max(len(keys), 1)))
        for i, v in enumerate(vectors):
            for k, c in v.items():
                X[i, col[k]] = float(c)
        return X
    X = np.atleast_2d(np.asarray(vectors, dtype=float))
    if X.shape[1] != space.dim:
        raise ValueError(f"vectors have dimension {X.shape[1]}, space has {space.dim}")
    return X


def min_sign_norm(space: Space, vectors, exact_threshold: int = 20) -> float:
    """``min over signs a_k = +-1 of ||sum_k a_k x_k||`` by exhaustive search.

    The sign of the first vector is fixed (global sign symmetry), leaving
    ``2**(n-1)`` patterns, visited in Gray-code order so that consecutive
    partial sums differ by one flipped vector.
    """
    if isinstance(vectors, np.ndarray):
        n = len(np.atleast_2d(vectors))
    else:
        vectors = list(vectors)
        n = len(vectors)
    if n == 0:
        raise ValueError("need at least one vector")
    if n > exact_threshold:
        raise ValueError(f"{n} vectors exceed the exhaustive-search threshold {exact_threshold}")
    X = _as_dense(space, vectors)
    p = 2 if space.is_sparse else space.p
    if n == 1:
        return float(lp_norm(X[0], p))
    Y = X[1:]
    total = 1 << (n - 1)
    best = math.inf
    for start in range(0, total, CHUNK):
        stop = min(start + CHUNK, total)
        k = np.arange(start, stop, dtype=np.int64)
        gray = k ^ (k >> 1)
        # bit i of gray set means vector i+1 carries a minus sign
        signs0 = 1.0 - 2.0 * ((int(gray[0]) >> np.arange(n - 1)) & 1)
        base = X[0] + signs0 @ Y
        if stop - start == 1:
            best = min(best, float(lp_norm(base, p)))
            continue
        steps = k[1:]
        low = steps & -steps
        b = np.log2(low).astype(np.int64)
        prev = (steps - 1) ^ ((steps - 1) >> 1)
        was_minus = (prev >> b) & 1
        delta = np.where(was_minus[:, None] == 1, 2.0, -2.0) * Y[b]
        S = np.vstack([base, base + np.cumsum(delta, axis=0)])
        best = min(best, float(np.min(lp_norm(S, p))))
    return best


@dataclass
class InfratypeEstimate:
    """Largest observed ratio ``min_sign_norm / (sum ||x_k||^p)^(1/p)``.

    ``C_hat`` is a lower bound for every constant valid at exponent ``p``.
    """

    p: object
    C_hat: float
    trials: int
    n_max: int
    seed: int
    records: list = field(default_factory=list)  # (trial, n, ratio)

    def to_dict(self) -> dict:
        return {
            "p": str(self.p),
            "C_hat": self.C_hat,
            "trials": self.trials,
            "n_max": self.n_max,
            "seed": self.seed,
            "records": [list(r) for r in self.records],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial", "n", "ratio"])
        for r in self.records:
            w.writerow([r[0], r[1], repr(r[2])])
        return buf.getvalue()


def infratype_ratio(space: Space, vectors, p) -> float:
    p = parse_exponent(p)
    X = _as_dense(space, vectors)
    norms = lp_norm(X, 2 if space.is_sparse else space.p)
    denom = float(np.max(norms)) if p == math.inf else float(np.sum(norms ** float(p)) ** (1.0 / float(p)))
    if denom == 0:
        return 0.0
    return min_sign_norm(space, X if not space.is_sparse else vectors) / denom


def estimate_constant(space: Space, p, n_max: int, trials: int, seed: int = 0, exact_threshold: int = 20) -> InfratypeEstimate:
    """Seeded random search for large infratype ratios.

    Each trial draws ``n`` uniform in ``1..n_max`` Gaussian vectors with
    log-uniform lengths in ``[1/10, 10]``.
    """
    p = parse_exponent(p)
    if p <= 1:
        raise ValueError("infratype exponent must exceed 1")
    if space.is_sparse:
        raise ValueError("estimate_constant needs a dense space")
    if not 1 <= n_max <= exact_threshold:
        raise ValueError(f"n_max must lie in 1..{exact_threshold}")
    rng = np.random.default_rng(seed)
    records = []
    for trial in range(trials):
        n = int(rng.integers(1, n_max + 1))
        X = rng.standard_normal((n, space.dim)) * np.exp(rng.uniform(-math.log(10), math.log(10), (n, 1)))
        records.append((trial, n, infratype_ratio(space, X, p)))
    C_hat = max((r[2] for r in records), default=0.0)
    return InfratypeEstimate(p, C_hat, trials, n_max, seed, records)


def _check_p(p):
    p = parse_exponent(p)
    if p <= 1:
        raise ValueError(f"p must exceed 1, got {p}")
    return p


def shevchenko_constant(C, p) -> float:
    """``C_1 = 2C / (2**(1 - 1/p) - 1)``."""
    p = _check_p(p)
    if C <= 0:
        raise ValueError("C must be positive")
    e = 1.0 if p == math.inf else 1.0 - 1.0 / float(p)
    return 2.0 * float(C) / (2.0**e - 1.0)


def shevchenko_rhs(C, p, M, d) -> float:
    """``C_1 * M * d**((p-1)/p)``: bound on ``d_H(S(F), S(conv F))``."""
    p = _check_p(p)
    if M < 0:
        raise ValueError("M must be non-negative")
    if not 0 < d <= 1:
        raise ValueError("d must lie in (0, 1]")
    e = 1.0 if p == math.inf else float(Fraction(p - 1) / p)
    return shevchenko_constant(C, p) * float(M) * float(d) ** e
