"""Command line entry point: ``setvalued <command> [options]``.

Every command prints one JSON document (sorted keys) holding the command
name, the full configuration including defaults, and the result.  Exit codes:
0 success, 1 a checked inequality or equality failed, 2 bad configuration.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import selftest
from .infratype import estimate_constant
from .multifn import (
    Multifunction,
    biorthogonal_example,
    constant_set,
    l1_example,
    linear_singleton,
    polynomial_singleton,
    random_step_multifunction,
    rational_indicator,
    step_multifunction,
)
from .partition import PartitionError, parse_number, parse_partition, prime_partition, schedule
from .radstrom import embed
from .riemann import (
    compare_conv,
    converge,
    convex_combination_probe,
    empty_example_verifier,
    membership_probe,
    riemann_sum,
    star_probe,
)
from .sets import (
    ESum,
    L1Model,
    PointCloud,
    SetError,
    hausdorff_distance,
    is_convex_within,
    minkowski_sum,
    set_from_dict,
    set_to_dict,
)
from .space import Space

ENV_OUTPUT_DIR = "SETVALUED_OUTPUT_DIR"
FUNCTIONS = ("constant", "singleton:linear", "singleton:poly", "singleton:indicator", "step", "l1", "biorth")


class ConfigError(Exception):
    pass


def _default(o):
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def render(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, default=_default) + "\n"


# -- argument helpers ---------------------------------------------------------------

def _space(args) -> Space:
    return Space(args.dim, args.p)


def load_set(spec: str, space: Space | None = None):
    """A set from a JSON file, inline JSON, or ``point:x,y,...``."""
    if spec.startswith("point:"):
        x = [float(parse_number(v)) for v in spec[6:].split(",")]
        if space is not None and space.dim != len(x):
            raise ConfigError(f"point {spec} does not match dimension {space.dim}")
        return PointCloud([x], space or Space(len(x)))
    text = spec if spec.lstrip().startswith("{") else Path(spec).read_text()
    return set_from_dict(json.loads(text))


def _need_seed(args, why: str):
    if args.seed is None:
        raise ConfigError(f"--seed is required ({why})")


def build_fn(args) -> Multifunction:
    name = args.fn
    if name == "constant":
        if not args.set:
            raise ConfigError("--fn constant needs --set")
        return constant_set(load_set(args.set))
    if name == "singleton:linear":
        return linear_singleton(_space(args))
    if name == "singleton:poly":
        coefs = [float(parse_number(c)) for c in args.coef.split(",")]
        return polynomial_singleton(coefs, _space(args))
    if name == "singleton:indicator":
        return rational_indicator(_space(args))
    if name == "step":
        if args.pieces:
            raw = json.loads(Path(args.pieces).read_text())
            pieces = [((parse_number(str(p["interval"][0])), parse_number(str(p["interval"][1]))), set_from_dict(p["set"]))
                      for p in raw]
            return step_multifunction(pieces)
        _need_seed(args, "random step multifunction")
        return random_step_multifunction(args.seed, dim=args.dim, p=args.p)
    if name == "l1":
        return l1_example(L1Model(args.bins))
    if name == "biorth":
        return biorthogonal_example()
    raise ConfigError(f"unknown function {name!r}; choose from {', '.join(FUNCTIONS)}")


def build_schedule(args):
    if args.schedule == "random":
        _need_seed(args, "random schedule")
    return schedule(args.schedule, args.len, seed=args.seed or 0, tag_rule=args.tags, exact=args.exact)


def _floats(text: str) -> list:
    return [parse_number(x) for x in text.split(",") if x.strip()]


# -- commands -------------------------------------------------------------------------

def cmd_hausdorff(args):
    A, B = load_set(args.a), load_set(args.b)
    return 0, {"distance": hausdorff_distance(A, B)}


def cmd_minkowski(args):
    A, B = load_set(args.a), load_set(args.b)
    S = minkowski_sum(A, B)
    if isinstance(S, ESum):
        S = S.normalized()
    return 0, {"set": set_to_dict(S)}


def cmd_riemann_sum(args):
    F = build_fn(args)
    if args.partition.startswith("random"):
        _need_seed(args, "random partition")
    G = parse_partition(args.partition, seed=args.seed or 0)
    S = riemann_sum(F, G)
    if isinstance(S, ESum):
        S = S.normalized()
    return 0, {"partition": G.to_dict(), "sum": set_to_dict(S)}


def cmd_converge(args):
    F = build_fn(args)
    target = load_set(args.target) if args.target else None
    est, trace = converge(F, build_schedule(args), args.tol, args.window, target)
    if args.csv:
        Path(args.csv).write_text(trace.to_csv())
    return 0, {"estimate": est.to_dict(), "trace": trace.to_dict()}


def cmd_compare_conv(args):
    F = build_fn(args)
    if args.partition.startswith("random"):
        _need_seed(args, "random partition")
    G = parse_partition(args.partition, seed=args.seed or 0)
    d, rhs = compare_conv(F, G, args.C, args.exponent)
    holds = d <= rhs
    return (0 if holds else 1), {"distance": d, "bound": rhs, "holds": holds, "M": F.bound, "diameter": G.diameter}


def cmd_membership(args):
    _need_seed(args, "random tags in the search pools")
    F = build_fn(args)
    rep = membership_probe(F, load_set(args.target, _space(args)), build_schedule(args), args.budget, args.seed, args.factor)
    return 0, rep.to_dict()


def cmd_convex_probe(args):
    _need_seed(args, "random tags in the search pools")
    F = build_fn(args)
    sp = _space(args)
    rep = convex_combination_probe(
        F, load_set(args.a, sp), load_set(args.b, sp), parse_number(args.lam), build_schedule(args),
        args.budget, args.seed, args.factor,
    )
    return 0, rep.to_dict()


def cmd_star_probe(args):
    _need_seed(args, "random tags in the search pools")
    F = build_fn(args)
    sp = _space(args)
    rep = star_probe(
        F, load_set(args.center, sp), [load_set(c, sp) for c in args.candidates], _floats(args.lams),
        build_schedule(args), args.budget, args.seed, args.factor,
    )
    return 0, rep.to_dict()


def cmd_example_l1(args):
    primes = [int(x) for x in args.primes.split(",")]
    model = L1Model(args.bins)
    for p in primes:
        if args.bins % p:
            # the intervals [(2n-2)/2p, 2n/2p] have endpoints on the 1/p grid
            raise ConfigError(f"bins={args.bins} is not divisible by p={p}")
    F = l1_example(model)
    full = ESum(model, [(1, (0, 1))])
    rows = []
    for p in primes:
        S = riemann_sum(F, prime_partition(p)).normalized()
        rows.append({"p": p, "equal": S == full, "distance": hausdorff_distance(S, full), "sum": set_to_dict(S)})
    wit = is_convex_within(full, Fraction(1, 4))
    ok = all(r["equal"] for r in rows) and wit.distance == Fraction(1, 2)
    return (0 if ok else 1), {
        "per_prime": rows,
        "all_equal": all(r["equal"] for r in rows),
        "witness_distance": wit.distance,
        "witness_is_half": wit.distance == Fraction(1, 2),
    }


def cmd_example_empty(args):
    Gn = parse_partition(args.n_partition, seed=args.seed or 0)
    Gm = parse_partition(args.m_partition, seed=args.seed or 0)
    cert = empty_example_verifier(Gn, Gm)
    return (0 if cert.holds else 1), cert.to_dict()


def cmd_infratype(args):
    _need_seed(args, "random collections")
    est = estimate_constant(_space(args), args.exponent, args.n_max, args.trials, args.seed)
    if args.csv:
        Path(args.csv).write_text(est.to_csv())
    return 0, est.to_dict()


def cmd_embed(args):
    _need_seed(args, "random directions")
    A = load_set(args.set)
    D = A.space.sample_directions(args.directions, args.seed)
    sample = embed(A, D)
    if args.csv:
        Path(args.csv).write_text(sample.to_csv())
    return 0, sample.to_dict()


DETERMINISM_RUNS = [
    ["converge", "--fn", "singleton:linear", "--schedule", "uniform-doubling", "--len", "6"],
    ["converge", "--fn", "step", "--seed", "3", "--schedule", "uniform-doubling", "--len", "4"],
    ["example", "empty", "--n-partition", "uniform:4", "--m-partition", "random-exact:0.1:5"],
    ["infratype", "--dim", "3", "--n-max", "8", "--trials", "20", "--seed", "1"],
    ["membership", "--fn", "singleton:indicator", "--target", "point:0.5,0", "--schedule", "uniform-doubling",
     "--len", "4", "--seed", "2"],
    ["embed", "--set", "point:1,2", "--directions", "16", "--seed", "4"],
]


def cmd_selftest(args):
    results = selftest.run_checks()
    rows = [{"check": name, "passed": bool(ok), "detail": repr(detail)} for name, ok, detail in results]
    parser = build_parser()
    for argv in DETERMINISM_RUNS:
        digests = []
        for _ in range(2):
            a = parser.parse_args(argv)
            _, payload = a.func(a)
            digests.append(selftest.digest(render({"command": argv[0], "result": payload})))
        rows.append({"check": "determinism: " + " ".join(argv), "passed": digests[0] == digests[1], "detail": digests[0]})
    ok = all(r["passed"] for r in rows)
    return (0 if ok else 1), {"checks": rows, "all_passed": ok}


# -- parser ---------------------------------------------------------------------------

def _add_common(p, fn=False, sched=False, probe=False):
    p.add_argument("--seed", type=int, default=None, help="seed for every random draw (required when any is made)")
    p.add_argument("--out", default=None, help="write the JSON document here as well")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--p", default="2", help="norm exponent: a rational or 'inf'")
    if fn:
        p.add_argument("--fn", required=True, help="one of: " + ", ".join(FUNCTIONS))
        p.add_argument("--set", default=None, help="set for --fn constant")
        p.add_argument("--coef", default="0,1", help="coefficients for --fn singleton:poly")
        p.add_argument("--pieces", default=None, help="JSON file of {interval, set} pieces for --fn step")
        p.add_argument("--bins", type=int, default=2310, help="L1 model bins for --fn l1")
    if sched:
        p.add_argument("--schedule", default="uniform-doubling", choices=["uniform-doubling", "primes", "random"])
        p.add_argument("--len", type=int, default=8)
        p.add_argument("--tags", default="mid", choices=["left", "right", "mid"])
        p.add_argument("--exact", action="store_true", help="exact rational coordinates for random schedules")
    if probe:
        p.add_argument("--budget", type=int, default=20000, help="sum evaluations per partition")
        p.add_argument("--factor", type=float, default=2.0, help="reached iff epsilon <= factor * d(Gamma)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="setvalued", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hausdorff", help="Hausdorff distance of two sets")
    _add_common(p)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.set_defaults(func=cmd_hausdorff)

    p = sub.add_parser("minkowski", help="Minkowski sum of two sets")
    _add_common(p)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.set_defaults(func=cmd_minkowski)

    p = sub.add_parser("riemann-sum", help="Riemann sum on one partition")
    _add_common(p, fn=True)
    p.add_argument("--partition", required=True, help="uniform:N[:rule] | prime:P | random[-exact]:DIAM[:SEED]")
    p.set_defaults(func=cmd_riemann_sum)

    p = sub.add_parser("converge", help="trailing-window Cauchy test along a schedule")
    _add_common(p, fn=True, sched=True)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--target", default=None)
    p.add_argument("--csv", default=None, help="write (diameter, d_H) columns here")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("compare-conv", help="d_H(S(F), S(conv F)) against the infratype bound")
    _add_common(p, fn=True)
    p.add_argument("--partition", required=True)
    p.add_argument("--C", type=float, default=1.0, help="infratype constant")
    p.add_argument("--exponent", default="2", help="infratype exponent")
    p.set_defaults(func=cmd_compare_conv)

    p = sub.add_parser("membership", help="greedy tag search towards a target set")
    _add_common(p, fn=True, sched=True, probe=True)
    p.add_argument("--target", required=True)
    p.set_defaults(func=cmd_membership)

    p = sub.add_parser("convex-probe", help="membership probe for lam*A + (1-lam)*B")
    _add_common(p, fn=True, sched=True, probe=True)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--lam", default="1/2")
    p.set_defaults(func=cmd_convex_probe)

    p = sub.add_parser("star-probe", help="membership probes along segments from a center")
    _add_common(p, fn=True, sched=True, probe=True)
    p.add_argument("--center", required=True)
    p.add_argument("--candidates", nargs="+", required=True)
    p.add_argument("--lams", default="1/4,1/2,3/4")
    p.set_defaults(func=cmd_star_probe)

    p = sub.add_parser("example", help="reproduce a built-in construction")
    ex = p.add_subparsers(dest="example", required=True)
    q = ex.add_parser("l1", help="sums of the L1 example on prime partitions")
    _add_common(q)
    q.add_argument("--primes", default="2,3,5,7,11")
    q.add_argument("--bins", type=int, default=2310)
    q.set_defaults(func=cmd_example_l1)
    q = ex.add_parser("empty", help="support-gap certificate for the biorthogonal example")
    _add_common(q)
    q.add_argument("--n-partition", default="uniform:4")
    q.add_argument("--m-partition", default="uniform:16")
    q.set_defaults(func=cmd_example_empty)

    p = sub.add_parser("infratype", help="empirical infratype constant")
    _add_common(p)
    p.add_argument("--exponent", default="2")
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_infratype)

    p = sub.add_parser("embed", help="support values on sampled directions")
    _add_common(p)
    p.add_argument("--set", required=True)
    p.add_argument("--directions", type=int, default=64)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("selftest", help="run the property suite and determinism checks")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_selftest)
    return parser


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out")}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code, result = args.func(args)
    except (ConfigError, PartitionError, SetError, ValueError, TypeError, NotImplementedError,
            OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"setvalued: error: {exc}", file=sys.stderr)
        return 2
    name = args.command + (f" {args.example}" if args.command == "example" else "")
    text = render({"command": name, "config": _config(args), "result": result})
    out = args.out
    if out is None and os.environ.get(ENV_OUTPUT_DIR):
        out = str(Path(os.environ[ENV_OUTPUT_DIR]) / (name.replace(" ", "-") + ".json"))
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
