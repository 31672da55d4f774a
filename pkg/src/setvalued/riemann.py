"""Riemann integral sums of multifunctions, convergence along partition
schedules, and probes of the set of limits."""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .infratype import shevchenko_rhs
from .multifn import Multifunction, biorth_functional, conv_lift, exact_tag, separating_union
from .partition import PartitionError, TaggedPartition, format_number
from .sets import (
    CompactSet,
    ConvexPolytope,
    ESum,
    IndexedHull,
    PointCloud,
    convex_hull,
    hausdorff_distance,
    minkowski_sum,
    scale,
    set_to_dict,
    support_function,
)
from .space import lp_norm


def _num_json(x):
    return str(x) if isinstance(x, Fraction) else x


# -- sums -----------------------------------------------------------------------

def riemann_sum(F: Multifunction, partition: TaggedPartition) -> CompactSet:
    """``S(F, Gamma, T) = sum_i |Delta_i| F(xi_i)`` as a Minkowski fold.

    ESum values use exact segment lengths; clouds and polytopes use floats
    (polytopes are re-hulled after every step by construction).
    """
    values = [F(t) for t in partition.tags]
    lengths = partition.lengths
    if isinstance(values[0], IndexedHull):
        raise TypeError("sums of IndexedHull values cannot be materialized; use sum_support")
    if isinstance(values[0], ESum):
        acc = ESum(values[0].model)
        for lam, A in zip(lengths, values):
            acc = minkowski_sum(acc, scale(lam, A))
        return acc
    if all(isinstance(A, PointCloud) and len(A) == 1 for A in values):
        pts = np.array([A.points[0] for A in values])
        lam = np.array([float(x) for x in lengths])
        return PointCloud((lam @ pts)[None, :], values[0].space)
    # fold each run of equal values on its own, then add the runs: a run of
    # m copies of a k-point cloud stays small, while folding term by term
    # into the running product re-deduplicates that product at every step
    # (for a convex value lam*A + mu*A = (lam + mu)*A, so a polytope run is one scaling)
    runs = []
    for lam, A in zip(lengths, values):
        if runs and (A is runs[-1][0] or A == runs[-1][0]):
            if isinstance(A, ConvexPolytope):
                runs[-1][2] += lam
            else:
                runs[-1][1] = minkowski_sum(runs[-1][1], scale(float(lam), A))
        else:
            runs.append([A, scale(float(lam), A), lam])
    parts = [scale(float(total), A) if isinstance(A, ConvexPolytope) else S for A, S, total in runs]
    acc = parts[0]
    for S in parts[1:]:
        acc = minkowski_sum(acc, S)
    return acc


def sum_support(F: Multifunction, partition: TaggedPartition, f):
    """``sum_i |Delta_i| h_{F(xi_i)}(f)``, the support of the sum without building it.

    Exact (Fraction) when lengths and support values are exact.
    """
    total = 0
    for lam, t in zip(partition.lengths, partition.tags):
        s = support_function(F(t), f)
        total += (float(lam) * s) if isinstance(s, float) else lam * s
    return total


# -- traces and convergence -----------------------------------------------------------

@dataclass
class TraceEntry:
    index: int
    n: int
    diameter: object
    sum: CompactSet | None
    d_prev: object = None
    d_target: object = None

    def to_dict(self, include_set: bool = False) -> dict:
        out = {
            "index": self.index,
            "n": self.n,
            "diameter": _num_json(self.diameter),
            "d_prev": _num_json(self.d_prev),
            "d_target": _num_json(self.d_target),
        }
        if include_set and self.sum is not None:
            out["sum"] = set_to_dict(self.sum)
        return out


@dataclass
class SumTrace:
    entries: list = field(default_factory=list)
    distance_kind: str = "exact"  # or "lower-bound"

    def to_dict(self, include_sets: bool = False) -> dict:
        return {"distance_kind": self.distance_kind, "entries": [e.to_dict(include_sets) for e in self.entries]}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "n", "diameter", "d_prev", "d_target"])
        for e in self.entries:
            w.writerow([e.index, e.n, float(e.diameter), "" if e.d_prev is None else float(e.d_prev),
                        "" if e.d_target is None else float(e.d_target)])
        return buf.getvalue()


@dataclass
class LimitEstimate:
    candidate: CompactSet | None
    cauchy_tail: object
    final_diameter: object
    verdict: str  # converged | not-cauchy | budget-exhausted
    tolerance: float
    window: int
    tails: list = field(default_factory=list)

    def to_dict(self) -> dict:
        cand = None
        if self.candidate is not None:
            try:
                cand = set_to_dict(self.candidate)
            except TypeError:
                cand = repr(self.candidate)
        return {
            "verdict": self.verdict,
            "cauchy_tail": _num_json(self.cauchy_tail),
            "final_diameter": _num_json(self.final_diameter),
            "tolerance": self.tolerance,
            "window": self.window,
            "tails": [_num_json(t) for t in self.tails],
            "candidate": cand,
        }


def _check_decreasing(partitions):
    d = [p.diameter for p in partitions]
    if any(b >= a for a, b in zip(d, d[1:])):
        raise PartitionError("schedule diameters must be strictly decreasing")


def separation_gap(F: Multifunction, P: TaggedPartition, Q: TaggedPartition) -> float:
    """Lower bound for ``d_H(S(F, P), S(F, Q))`` when the values are π-indexed hulls.

    Uses the functional ``f_i`` of the finite base union that covers the tags
    of ``P`` missing from ``Q`` and avoids the tags of ``Q``:
    ``d_H >= |h_P(f) - h_Q(f)| / ||f||``.
    """
    best = 0.0
    for X, Y in ((P, Q), (Q, P)):
        tx = {_tag(t) for t in X.tags}
        ty = {_tag(t) for t in Y.tags}
        A = sorted(tx - ty)
        if not A:
            continue
        _, i = separating_union(A, ty)
        f = biorth_functional(i)
        gap = abs(sum_support(F, X, f) - sum_support(F, Y, f))
        best = max(best, float(gap) / float(f[i]))
    return best


def _tag(t) -> Fraction:
    e = exact_tag(t)
    if e is None:
        raise ValueError(f"tag {t!r} is not an exact rational")
    return e


def converge(
    F: Multifunction,
    partitions: Sequence[TaggedPartition],
    tolerance: float = 1e-6,
    window: int = 3,
    target: CompactSet | None = None,
):
    """Trailing-window Cauchy test along a schedule of partitions.

    Stops at the first window whose sums are pairwise within ``tolerance``
    (verdict ``converged``).  Otherwise the verdict is ``not-cauchy`` if the
    final window's spread exceeds both the tolerance and the first window's
    spread, ``budget-exhausted`` if it is still shrinking.  Returns
    ``(LimitEstimate, SumTrace)``.

    For values without a materializable sum (π-indexed hulls) the distances
    are certified lower bounds from :func:`separation_gap`.
    """
    if window < 2:
        raise ValueError("window must be at least 2")
    partitions = list(partitions)
    if not partitions:
        raise ValueError("empty schedule")
    _check_decreasing(partitions)
    lazy = isinstance(F(partitions[0].tags[0]), IndexedHull)
    trace = SumTrace(distance_kind="lower-bound" if lazy else "exact")
    sums = []
    cache = {}

    def dist(i, j):
        if (i, j) not in cache:
            if lazy:
                cache[(i, j)] = separation_gap(F, partitions[i], partitions[j])
            else:
                cache[(i, j)] = hausdorff_distance(sums[i], sums[j])
        return cache[(i, j)]

    tails = []
    verdict = None
    for k, part in enumerate(partitions):
        sums.append(None if lazy else riemann_sum(F, part))
        entry = TraceEntry(k, part.n, part.diameter, sums[-1])
        if k > 0:
            entry.d_prev = dist(k - 1, k)
        if target is not None and not lazy:
            entry.d_target = hausdorff_distance(sums[-1], target)
        trace.entries.append(entry)
        if k + 1 >= window:
            idx = range(k + 1 - window, k + 1)
            tail = max(dist(i, j) for i, j in itertools.combinations(idx, 2))
            tails.append(tail)
            if tail <= tolerance:
                verdict = "converged"
                break
    if verdict is None:
        if not tails:
            verdict = "budget-exhausted"
        elif tails[-1] > tolerance and tails[-1] >= tails[0]:
            verdict = "not-cauchy"
        else:
            verdict = "budget-exhausted"
    last = trace.entries[-1]
    est = LimitEstimate(
        candidate=sums[-1],
        cauchy_tail=tails[-1] if tails else None,
        final_diameter=last.diameter,
        verdict=verdict,
        tolerance=tolerance,
        window=window,
        tails=tails,
    )
    return est, trace


def compare_conv(F: Multifunction, partition: TaggedPartition, C=1, p=2) -> tuple:
    """``(d_H(S(F), S(conv F)), C_1 M(F) d(Gamma)^((p-1)/p))`` on one partition."""
    S = riemann_sum(F, partition)
    Sc = riemann_sum(conv_lift(F), partition)
    d = hausdorff_distance(S, Sc)
    return d, shevchenko_rhs(C, p, F.bound, partition.diameter)


# -- probes of I(F) -------------------------------------------------------------------

@dataclass
class MembershipReport:
    reached: bool
    factor: float
    steps: list  # dicts: n, diameter, epsilon, certificate, evaluations
    tags: list  # best tags on the last partition

    @property
    def certificate(self) -> list:
        return [s["certificate"] for s in self.steps]

    def to_dict(self) -> dict:
        return {
            "reached": self.reached,
            "factor": self.factor,
            "steps": [{k: _num_json(v) for k, v in s.items()} for s in self.steps],
            "tags": [format_number(t) for t in self.tags],
        }


def _tag_pool(F, lo, hi, current, rng) -> list:
    u = float(rng.random())
    r = min(max(float(lo) + u * (float(hi) - float(lo)), float(lo)), float(hi))
    pool = {lo, hi, (lo + hi) / 2, r, current}
    pool.update(t for t in F.special_tags(lo, hi) if lo <= t <= hi)
    return sorted(pool)


def _greedy_tags(F, partition, target, pool, budget):
    lengths = partition.lengths
    tags = list(partition.tags)
    n = len(tags)
    if F.singleton_valued:
        T = target.points
        p = target.space.p
        lam = np.array([float(x) for x in lengths])
        memo = {}

        def point(t):
            if t not in memo:
                memo[t] = F(t).points[0]
            return memo[t]

        contrib = np.array([lam[i] * point(t) for i, t in enumerate(tags)])
        s = contrib.sum(axis=0)

        def dist_to(s):
            return float(np.max(lp_norm(T - s, p)))

        best = dist_to(s)
        evals = 1
        improved = True
        while improved and evals < budget and best > 0:
            improved = False
            for i in range(n):
                for c in pool[i]:
                    if c == tags[i]:
                        continue
                    new = lam[i] * point(c)
                    s2 = s - contrib[i] + new
                    d = dist_to(s2)
                    evals += 1
                    if d < best or (d == best and c < tags[i]):
                        improved = improved or d < best
                        tags[i], contrib[i], s, best = c, new, s2, d
                    if evals >= budget:
                        break
                if evals >= budget:
                    break
        return tags, best, evals

    def evaluate(tags):
        return float(hausdorff_distance(riemann_sum(F, partition.with_tags(tags)), target))

    best = evaluate(tags)
    evals = 1
    improved = True
    while improved and evals < budget and best > 0:
        improved = False
        for i in range(n):
            for c in pool[i]:
                if c == tags[i]:
                    continue
                trial = tags[:i] + [c] + tags[i + 1:]
                d = evaluate(trial)
                evals += 1
                if d < best or (d == best and c < tags[i]):
                    improved = improved or d < best
                    tags, best = trial, d
                if evals >= budget:
                    break
            if evals >= budget:
                break
    return tags, best, evals


def membership_probe(
    F: Multifunction,
    target: CompactSet,
    partitions: Sequence[TaggedPartition],
    budget: int = 20000,
    seed: int = 0,
    factor: float = 2.0,
) -> MembershipReport:
    """Greedy coordinate descent over tags, one partition at a time.

    Each interval's tag pool holds its endpoints, midpoint, one seeded random
    tag, the current tag and the multifunction's special tags inside it.  A
    candidate replaces the current tag if it lowers ``d_H(S, target)``, or
    ties and is smaller.  ``reached`` iff the best distance is at most
    ``factor * d(Gamma)`` at every step: an epsilon-certificate, not a proof of
    membership.
    """
    partitions = list(partitions)
    _check_decreasing(partitions)
    steps = []
    running = math.inf
    reached = True
    tags = []
    for k, part in enumerate(partitions):
        rng = np.random.default_rng([seed, k])
        pool = [_tag_pool(F, lo, hi, t, rng) for (lo, hi), t in zip(part.intervals, part.tags)]
        tags, eps, evals = _greedy_tags(F, part, target, pool, budget)
        running = min(running, eps)
        ok = eps <= factor * float(part.diameter)
        reached = reached and ok
        steps.append(
            {
                "n": part.n,
                "diameter": part.diameter,
                "epsilon": eps,
                "certificate": running,
                "within_factor": ok,
                "evaluations": evals,
            }
        )
    return MembershipReport(reached, factor, steps, tags)


def _combine(A: CompactSet, B: CompactSet, lam) -> CompactSet:
    lam = float(lam)
    if not 0 <= lam <= 1:
        raise ValueError("lambda must lie in [0, 1]")
    if isinstance(A, ConvexPolytope) or isinstance(B, ConvexPolytope):
        A, B = convex_hull(A), convex_hull(B)
    return minkowski_sum(scale(lam, A), scale(1.0 - lam, B))


@dataclass
class CombinationReport:
    lam: float
    target: CompactSet
    membership: MembershipReport

    @property
    def reached(self) -> bool:
        return self.membership.reached

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "target": set_to_dict(self.target), "membership": self.membership.to_dict()}


def convex_combination_probe(F, A, B, lam, partitions, budget: int = 20000, seed: int = 0, factor: float = 2.0):
    """Membership probe for ``lam A + (1 - lam) B`` (hulled if either is a polytope)."""
    target = _combine(A, B, lam)
    return CombinationReport(float(lam), target, membership_probe(F, target, partitions, budget, seed, factor))


@dataclass
class StarReport:
    center: CompactSet
    probes: list  # (candidate index, CombinationReport)

    @property
    def all_reached(self) -> bool:
        return all(r.reached for _, r in self.probes)

    def to_dict(self) -> dict:
        return {
            "center": set_to_dict(self.center),
            "all_reached": self.all_reached,
            "probes": [{"candidate": j, **r.to_dict()} for j, r in self.probes],
        }


def star_probe(F, center, candidates, lams=(0.25, 0.5, 0.75), partitions=(), budget=20000, seed=0, factor=2.0):
    """Probe the segments from ``center`` to every candidate at the given ``lams``.

    The target at ``lam`` is ``lam * candidate + (1 - lam) * center``.
    """
    probes = []
    for j, cand in enumerate(candidates):
        for lam in lams:
            probes.append((j, convex_combination_probe(F, cand, center, lam, partitions, budget, seed, factor)))
    return StarReport(center, probes)


# -- the empty-limit certificate ----------------------------------------------------

@dataclass
class EmptyCertificate:
    n_tags: int
    m_diameter: object
    separated: list  # tags of Gamma_m outside T_n
    base_sets: list  # (q, k) of the separating union
    index_bits: int
    support_n: object
    support_m: object
    lower_bound: object
    target_bound: object
    tag_supports: list  # support value per unit weight at each separated tag

    @property
    def holds(self) -> bool:
        return self.support_n == 0 and self.lower_bound >= self.target_bound > Fraction(1, 2)

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "n_tags": self.n_tags,
            "m_diameter": _num_json(self.m_diameter),
            "separated_tags": [format_number(t) for t in self.separated],
            "base_sets": [list(qk) for qk in self.base_sets],
            "index_bits": self.index_bits,
            "support_n": _num_json(self.support_n),
            "support_m": _num_json(self.support_m),
            "lower_bound": _num_json(self.lower_bound),
            "bound": _num_json(self.target_bound),
            "tag_supports": [_num_json(s) for s in self.tag_supports],
        }


def empty_example_verifier(gamma_n: TaggedPartition, gamma_m: TaggedPartition, F: Multifunction | None = None):
    """Support-gap certificate that sums at ``gamma_n`` and ``gamma_m`` stay far apart.

    Requires ``d(gamma_m) < 1 / (2 |T_n|)``.  The tags of ``gamma_m`` outside
    ``T_n`` are covered by a finite union of base sets avoiding ``T_n``; for
    the matching functional ``f``, ``h(S_n)(f) = 0`` while ``h(S_m)(f)`` is
    the total length carried by those tags, which is at least
    ``1 - |T_n| d(gamma_m)``.
    """
    from .multifn import base_params, biorthogonal_example

    F = F or biorthogonal_example()
    Tn = {_tag(t) for t in gamma_n.tags}
    Tm = [_tag(t) for t in gamma_m.tags]
    dm = gamma_m.diameter
    if not dm < Fraction(1, 2 * len(Tn)):
        raise PartitionError(f"need d(Gamma_m) < 1/(2|T_n|) = 1/{2 * len(Tn)}, got {dm}")
    A = sorted(set(Tm) - Tn)
    js, i = separating_union(A, Tn)
    f = biorth_functional(i)
    s_n = sum_support(F, gamma_n, f)
    s_m = sum_support(F, gamma_m, f)
    per_tag = [support_function(F(a), f) for a in A]
    return EmptyCertificate(
        n_tags=len(Tn),
        m_diameter=dm,
        separated=A,
        base_sets=[base_params(j) for j in js],
        index_bits=i.bit_length(),
        support_n=s_n,
        support_m=s_m,
        lower_bound=s_m - s_n,
        target_bound=1 - len(Tn) * dm,
        tag_supports=per_tag,
    )
