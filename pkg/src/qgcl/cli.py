"""Command-line front end.

Subcommands: check, semantics, kraus, wp, apply, equiv, equiv-cf, hoare,
refine, laws, walk.  Exit codes: 0 success, 1 negative verdict, 2 parse or
well-formedness failure.  Output is deterministic for fixed inputs and seed;
``--format tsv`` switches to delimited records, and the walk/laws reports
can render figures next to them via ``--plot``.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import cstate
from .ast import check, qvar_of, to_source
from .errors import QgclError
from .laws import LAW_IDS, run_law_suite
from .linalg import TAU_EQ, format_complex, format_matrix, parse_matrix
from .ovf import apply as apply_channel
from .parser import parse_file
from .registry import Registry
from .semantics import channel_of, semi_classical
from .wp import (
    Observable, check_hoare, coin_free_residual, equivalence_residual,
    refines, wp,
)

__all__ = ["main", "run"]


def _read_matrix(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_matrix(fh.read())


def _load(path):
    mod = parse_file(path)
    diags = check(mod.program, mod.registry)
    if diags:
        for d in diags:
            print(f"{path}: {d}", file=sys.stderr)
        raise SystemExit(2)
    return mod


def _merge_registries(mods) -> Registry:
    merged = Registry()
    for mod in mods:
        r = mod.registry
        for name in r.qnames:
            if merged.has_q(name):
                if merged.qdim(name) != r.qdim(name):
                    raise QgclError(
                        f"variable {name!r} declared with conflicting dimensions")
            else:
                merged.declare_q(name, r.qdim(name))
    return merged


def _print_matrix(m, fmt):
    if fmt == "tsv":
        for row in np.atleast_2d(m):
            print("\t".join(format_complex(z) for z in row))
    else:
        print(format_matrix(m))


def cmd_check(args) -> int:
    mod = parse_file(args.file)
    diags = check(mod.program, mod.registry)
    for d in diags:
        print(f"{args.file}: {d}")
    if diags:
        return 2
    print(f"{args.file}: ok ({to_source(mod.program)[:60]}...)"
          if args.format == "human" else f"{args.file}\tok")
    return 0


def cmd_semantics(args) -> int:
    mod = _load(args.file)
    res = semi_classical(mod.program, mod.registry)
    if args.format == "human":
        print(f"quantum variables: {', '.join(res.semi.vars) or '(none)'}")
        print(f"classical states ({len(res.deltas)}); the operators below, in "
              "this order, are the channel's Kraus list:")
    for s in res.deltas:
        print(cstate.label(s))
        _print_matrix(res.semi.op(s), args.format)
        print()
    return 0


def cmd_kraus(args) -> int:
    mod = _load(args.file)
    chan = channel_of(mod.program, mod.registry)
    if args.format == "human":
        print(f"channel on {', '.join(chan.vars) or '(scalar)'}; "
              f"{len(chan.kraus)} Kraus operators")
    for k, op in enumerate(chan.kraus):
        print(f"K{k}")
        _print_matrix(op, args.format)
        print()
    return 0


def cmd_wp(args) -> int:
    mod = _load(args.file)
    transformer = wp(mod.program, mod.registry)
    if args.obs:
        n = _read_matrix(args.obs)
        _print_matrix(apply_channel(transformer, n), args.format)
        return 0
    if args.format == "human":
        print(f"wp transformer on {', '.join(transformer.vars) or '(scalar)'}; "
              f"{len(transformer.kraus)} Kraus operators")
    for k, op in enumerate(transformer.kraus):
        print(f"K{k}")
        _print_matrix(op, args.format)
        print()
    return 0


def cmd_apply(args) -> int:
    mod = _load(args.file)
    rho = _read_matrix(args.rho)
    chan = channel_of(mod.program, mod.registry)
    out = apply_channel(chan, rho)
    _print_matrix(out, args.format)
    if args.format == "human":
        print(f"trace: {format_complex(np.trace(out))}")
    return 0


def _two_programs(args):
    mods = [_load(args.file), _load(args.file2)]
    registry = _merge_registries(mods)
    return mods[0].program, mods[1].program, registry


def cmd_equiv(args) -> int:
    p, q, registry = _two_programs(args)
    residual = equivalence_residual(p, q, registry)
    verdict = residual <= args.tol
    print(f"equivalent: {verdict} (residual {residual:.3e})"
          if args.format == "human" else f"{verdict}\t{residual:.12e}")
    return 0 if verdict else 1


def cmd_equiv_cf(args) -> int:
    p, q, registry = _two_programs(args)
    residual = coin_free_residual(p, q, registry)
    verdict = residual <= args.tol
    print(f"coin-free equivalent: {verdict} (residual {residual:.3e})"
          if args.format == "human" else f"{verdict}\t{residual:.12e}")
    return 0 if verdict else 1


def cmd_hoare(args) -> int:
    mod = _load(args.file)
    vs = mod.registry.varset(qvar_of(mod.program))
    pre = Observable.build(mod.registry, vs, _read_matrix(args.pre))
    post = Observable.build(mod.registry, vs, _read_matrix(args.post))
    verdict = check_hoare(pre, mod.program, post, mod.registry,
                          trials=args.trials, tol=args.tol, seed=args.seed)
    print(str(verdict) if args.format == "human" else f"{verdict}\t")
    return 0 if verdict.satisfied else 1


def cmd_refine(args) -> int:
    p, q, registry = _two_programs(args)
    verdict = refines(p, q, registry, sample_states=args.samples,
                      seed=args.seed, tol=args.tol)
    print(str(verdict))
    if verdict.refuted and args.format == "human" and verdict.witness is not None:
        print("witness observable:")
        _print_matrix(verdict.witness, args.format)
    return 1 if verdict.refuted else 0


def cmd_laws(args) -> int:
    law_ids = args.law or list(LAW_IDS)
    for lid in law_ids:
        if lid not in LAW_IDS:
            print(f"unknown law {lid!r}; known: {', '.join(LAW_IDS)}", file=sys.stderr)
            return 2
    results = run_law_suite(seed=args.seed, instances=args.instances,
                            law_ids=law_ids, tol=args.tol)
    if args.format == "human":
        print(f"seed {args.seed}, {args.instances} instances per law")
    failures = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        failures += not r.passed
        if args.format == "tsv":
            print(f"{r.law_id}\t{r.relation}\t{r.residual:.12e}\t{status}\t{r.description}")
        else:
            print(f"{status}  {r.law_id:<14} {r.relation:<9} residual {r.residual:.3e}  "
                  f"{r.description}")
    if args.plot:
        from .report import law_residual_figure

        law_residual_figure(results, args.plot)
        if args.format == "human":
            print(f"figure written to {args.plot}")
    return 1 if failures else 0


def cmd_walk(args) -> int:
    from .walks import WalkSpec, position_distribution

    kwargs = {}
    if args.init:
        coin_part, _, pos_part = args.init.partition(":")
        kwargs["initial_coin"] = tuple(int(t) for t in coin_part.split(",") if t != "")
        kwargs["initial_pos"] = tuple(int(t) for t in pos_part.split(",") if t != "")
    if args.shared_u:
        kwargs["shared_u"] = _read_matrix(args.shared_u)
    spec = WalkSpec(args.variant, args.N, steps=args.T, coins=args.coins, **kwargs)
    dist = position_distribution(spec)
    if args.format == "human":
        print(f"{args.variant} walk, N={args.N}, T={args.T}")
    for pos, prob in dist:
        label = ",".join(map(str, pos)) if isinstance(pos, tuple) else pos
        print(f"{label}\t{prob:.12g}")
    if args.plot:
        from .report import walk_distribution_figure

        walk_distribution_figure(dist, args.plot,
                                 title=f"{args.variant} N={args.N} T={args.T}")
        if args.format == "human":
            print(f"figure written to {args.plot}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qgcl",
        description="Interpreter and semantic-analysis workbench for the "
                    "quantum guarded-command language.")
    ap.add_argument("--format", choices=("human", "tsv"), default="human")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tol", type=float, default=TAU_EQ,
                    help="semantic equality tolerance")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        p = sub.add_parser(name, **kw)
        p.set_defaults(fn=fn)
        return p

    p = add("check", cmd_check, help="parse and run the static checks")
    p.add_argument("file")
    p = add("semantics", cmd_semantics, help="print classical states and their operators")
    p.add_argument("file")
    p = add("kraus", cmd_kraus, help="print the channel's Kraus operators")
    p.add_argument("file")
    p = add("wp", cmd_wp, help="print the weakest-precondition transformer")
    p.add_argument("file")
    p.add_argument("--obs", help="observable file; print its weakest precondition")
    p = add("apply", cmd_apply, help="apply the channel to a density matrix")
    p.add_argument("file")
    p.add_argument("--rho", required=True, help="input state (matrix text file)")
    p = add("equiv", cmd_equiv, help="decide program equivalence")
    p.add_argument("file")
    p.add_argument("file2")
    p = add("equiv-cf", cmd_equiv_cf, help="decide coin-free equivalence")
    p.add_argument("file")
    p.add_argument("file2")
    p = add("hoare", cmd_hoare, help="check a Hoare triple (pre/post observables)")
    p.add_argument("file")
    p.add_argument("--pre", required=True)
    p.add_argument("--post", required=True)
    p.add_argument("--trials", type=int, default=0)
    p = add("refine", cmd_refine, help="search for a refinement counterexample")
    p.add_argument("file")
    p.add_argument("file2")
    p.add_argument("--samples", type=int, default=20)
    p = add("laws", cmd_laws, help="run the algebraic-law suite")
    p.add_argument("--law", action="append", help="law id, repeatable (default: all)")
    p.add_argument("--instances", type=int, default=10)
    p.add_argument("--plot", help="write a residual chart to this file")
    p = add("walk", cmd_walk, help="simulate a coined walk and print the distribution")
    p.add_argument("--variant", required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--T", type=int, default=0)
    p.add_argument("--coins", type=int, default=1)
    p.add_argument("--init", help="initial state 'coin[,coin...]:pos[,pos...]'")
    p.add_argument("--shared-u", help="two-walker coin unitary (matrix text file)")
    p.add_argument("--plot", help="write a distribution chart to this file")
    return ap


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except QgclError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    raise SystemExit(run())
