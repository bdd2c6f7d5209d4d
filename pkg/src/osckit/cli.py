"""Command-line front end: generate grid functions, compute norms, run
verification experiments, and emit JSON/CSV reports.

Exit codes: 0 success, 2 validation error (bad flags, malformed files,
unknown experiments), 3 enumeration budget exceeded.  All randomness flows
from --seed and every command is deterministic given its arguments,
including --threads.
"""

from __future__ import annotations

import argparse
import json
import sys

from .grid import GFN1Error, read_gfn1, write_gfn1
from .norms import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    EnumMode,
    bmo_m_norm,
    bmo_norm,
    lmo_inv_norm,
    lmo_m_norm,
    lmo_norm,
    star_norm,
)
from .testfn import PRNG_ID, from_spec
from .verify import (
    DivisionDegenerate,
    as_report,
    check_equivalences,
    divergence_witness,
    embedding_gap_sweep,
    lmo_contrast_sweep,
    mean_bound_sharpness,
    multiplier_upper_bound,
    report_csv,
    report_json,
)

NORMS = {
    "bmo": bmo_norm,
    "star": star_norm,
    "lmo": lmo_norm,
    "bmo_m": bmo_m_norm,
    "lmo_m": lmo_m_norm,
    "lmo_inv": lmo_inv_norm,
}

VERIFY_EXPERIMENTS = ("equivalences", "multiplier_upper_bound", "mean_bound_sharpness")
SWEEP_EXPERIMENTS = ("embedding_gap", "divergence_witness", "lmo_contrast")


def _parse_dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise ValueError(f"cannot parse dims {text!r}; expected e.g. '16' or '16,16'")
    return dims


def _parse_sizes(text: str) -> list[int]:
    return [int(x) for x in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="osckit",
        description="Rectangle mean-oscillation norms on periodic grids.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a grid function and write a GFN1 file")
    g.add_argument("--dims", required=True, help="comma-separated cell counts, e.g. 16,16")
    g.add_argument("--gen", required=True, help="generator spec JSON")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output GFN1 path")

    n = sub.add_parser("norm", help="compute a norm of a GFN1 file")
    n.add_argument("path", help="input GFN1 file")
    n.add_argument("--norm", required=True, choices=sorted(NORMS))
    n.add_argument("--mode", choices=["exact", "dyadic"], default="exact")
    n.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    n.add_argument("--threads", type=int, default=1)
    n.add_argument("--out", help="write the report here instead of stdout")

    v = sub.add_parser("verify", help="run a fixed-size verification experiment")
    v.add_argument("--experiment", required=True, choices=VERIFY_EXPERIMENTS)
    v.add_argument("path", nargs="?", help="input GFN1 file (equivalences)")
    v.add_argument("--dims", help="grid dims when generating the input inline")
    v.add_argument("--gen", help="generator spec JSON for the input function")
    v.add_argument("--phi", help="multiplier spec JSON (default cos x cos)")
    v.add_argument("--size", type=int, default=16, help="grid size n (n x n grid)")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--mode", choices=["exact", "dyadic"], default="exact")
    v.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    v.add_argument("--threads", type=int, default=1)
    v.add_argument("--format", choices=["json", "csv"], default="json")
    v.add_argument("--out")

    s = sub.add_parser("sweep", help="run an experiment across grid sizes")
    s.add_argument("--experiment", required=True, choices=SWEEP_EXPERIMENTS)
    s.add_argument("--sizes", default="16,32,64", help="comma-separated grid sizes")
    s.add_argument("--phi", help="multiplier spec JSON (default cos x cos)")
    s.add_argument("--rect-sides", default="1,2",
                   help="dyadic square sides (cells) for the witness family")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--mode", choices=["exact", "dyadic"], default="exact")
    s.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--format", choices=["json", "csv"], default="json")
    s.add_argument("--out")
    return p


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _load_input(args) -> tuple:
    if args.path:
        f = read_gfn1(args.path)
        return f, {"path": args.path}
    if not args.dims:
        raise ValueError("need either a GFN1 path or --dims (with optional --gen)")
    dims = _parse_dims(args.dims)
    spec = json.loads(args.gen) if args.gen else {
        "kind": "random", "depth": min(3, (min(dims).bit_length() - 1)), "seed": args.seed}
    return from_spec(dims, spec, args.seed), {"dims": list(dims), "gen": spec}


def _report_text(report: dict, fmt: str) -> str:
    return report_json(report) if fmt == "json" else report_csv(report)


def _cmd_gen(args) -> int:
    dims = _parse_dims(args.dims)
    spec = json.loads(args.gen)
    f = from_spec(dims, spec, args.seed)
    write_gfn1(f, args.out)
    summary = {"written": args.out, "dims": list(f.dims), "cells": f.ncells,
               "seed": args.seed, "prng": PRNG_ID}
    sys.stdout.write(json.dumps(summary, sort_keys=True) + "\n")
    return 0


def _cmd_norm(args) -> int:
    f = read_gfn1(args.path)
    report = NORMS[args.norm](f, EnumMode.parse(args.mode),
                              budget=args.budget, threads=args.threads)
    _emit(json.dumps(report.to_json_dict(), indent=2, sort_keys=True), args.out)
    return 0


def _cmd_verify(args) -> int:
    mode = EnumMode.parse(args.mode)
    phi_spec = json.loads(args.phi) if args.phi else None
    if args.experiment == "equivalences":
        f, source = _load_input(args)
        rep = check_equivalences(f, budget=args.budget, threads=args.threads)
        report = as_report("equivalences", {"input": source}, scalars=rep,
                           verdict=rep["verdict"], seed=args.seed)
    elif args.experiment == "multiplier_upper_bound":
        rep = multiplier_upper_bound(phi_spec, n=args.size, seed=args.seed,
                                     mode=mode, budget=args.budget, threads=args.threads)
        report = as_report("multiplier_upper_bound", {"n": args.size, "phi": rep["phi"]},
                           scalars=rep, verdict=rep["verdict"], seed=args.seed)
    else:
        rep = mean_bound_sharpness(args.size, budget=args.budget, threads=args.threads)
        report = as_report("mean_bound_sharpness", {"n": args.size, "sides": rep["sides"]},
                           scalars=rep, verdict=rep["verdict"], seed=args.seed)
    _emit(_report_text(report, args.format), args.out)
    return 0


def _cmd_sweep(args) -> int:
    mode = EnumMode.parse(args.mode)
    phi_spec = json.loads(args.phi) if args.phi else None
    sizes = _parse_sizes(args.sizes)
    sides = _parse_sizes(args.rect_sides)
    common = dict(mode=mode, budget=args.budget, threads=args.threads, seed=args.seed)
    if args.experiment == "embedding_gap":
        metrics = [embedding_gap_sweep(phi_spec, sides, sizes, **common)]
    elif args.experiment == "divergence_witness":
        metrics = [divergence_witness(phi_spec, sizes, rect_family=sides, **common)]
    else:
        metrics = lmo_contrast_sweep(phi_spec, sizes, **common)
    params = {"sizes": sizes, "rect_sides": sides,
              "phi": metrics[0].witness_spec.get("phi")}
    report = as_report(args.experiment, params, metrics=metrics, seed=args.seed)
    _emit(_report_text(report, args.format), args.out)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"gen": _cmd_gen, "norm": _cmd_norm, "verify": _cmd_verify,
                "sweep": _cmd_sweep}
    try:
        return handlers[args.command](args)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (GFN1Error, DivisionDegenerate) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
