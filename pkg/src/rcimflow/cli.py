"""Command-line interface: each subcommand is a thin shell over one
pipeline stage.  Exit codes: 0 success, 1 domain error, 2 usage error.
Diagnostics go to stderr; data goes to stdout or the -o file."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .aig import Aig
from .costmodel import (
    Calibration,
    calibrate,
    check_fixture_identity,
    dump_calibration,
    estimate_metrics,
    load_calibration,
    load_fixtures,
    size_inductor,
)
from .errors import RcimError, UsageError
from .explorer import Constraints, default_jobs, explore, trend_report
from .frontend import load_circuit, write_aiger
from .mapper import place_and_schedule, validate_schedule
from .simulator import check_equivalence
from .techmap import characterize as characterize_netlist
from .techmap import map_to_gates
from .topology import default_library, load_library
from .transforms import Recipe, TransformId, apply_recipe, enumerate_recipes, parse_transform

ENV_LIBRARY = "RCIMFLOW_TOPOLOGY_LIB"


def _library(args):
    path = getattr(args, "library", None) or os.environ.get(ENV_LIBRARY)
    return load_library(path) if path else default_library()


def _calibration(args):
    path = getattr(args, "calibration", None)
    return load_calibration(path) if path else Calibration()


def _transform_set(text):
    if not text:
        return set(TransformId)
    return {parse_transform(p) for p in text.split(",") if p.strip()}


def _emit(args, text: str):
    out = getattr(args, "output", None)
    if out and out != "-":
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load(args) -> Aig:
    return load_circuit(args.input)


def _topology(args, lib):
    if args.topology:
        return lib.get(args.topology)
    raise UsageError("--topology NAME is required (see the library file)")


# ----------------------------------------------------------------------
# subcommand handlers


def cmd_recipes(args):
    space = enumerate_recipes(_transform_set(args.options))
    if args.format == "json":
        _emit(
            args,
            json.dumps(
                {
                    "option_count": space.option_count,
                    "recipes": [str(r) for r in space.recipes],
                },
                indent=2,
                sort_keys=True,
            )
            + "\n",
        )
    else:
        _emit(args, "\n".join(str(r) for r in space.recipes) + "\n")
    return 0


def cmd_synth(args):
    g = _load(args)
    if args.recipe:
        g = apply_recipe(g, Recipe.parse(args.recipe))
    data = write_aiger(g, binary=args.binary)
    out = getattr(args, "output", None)
    if out and out != "-":
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
    if args.profile:
        net = map_to_gates(g)
        profile = characterize_netlist(net, fold_not=args.fold_not)
        Path(args.profile).write_text(
            json.dumps(profile.to_dict(), indent=2, sort_keys=True) + "\n"
        )
    return 0


def cmd_characterize(args):
    g = _load(args)
    if args.recipe:
        g = apply_recipe(g, Recipe.parse(args.recipe))
    net = map_to_gates(g)
    profile = characterize_netlist(net, fold_not=args.fold_not)
    _emit(args, json.dumps(profile.to_dict(), indent=2, sort_keys=True) + "\n")
    return 0


def cmd_map(args):
    g = _load(args)
    if args.recipe:
        g = apply_recipe(g, Recipe.parse(args.recipe))
    lib = _library(args)
    topo = _topology(args, lib)
    net = map_to_gates(g)
    placement, schedule = place_and_schedule(net, topo, pipelined=args.pipelined)
    diags = validate_schedule(schedule, topo)
    if diags:
        raise RcimError(f"produced schedule failed validation: {diags[:3]}")
    _emit(args, schedule.dumps())
    return 0


def cmd_simulate(args):
    g = _load(args)
    if args.recipe:
        g = apply_recipe(g, Recipe.parse(args.recipe))
    lib = _library(args)
    topo = _topology(args, lib)
    net = map_to_gates(g)
    placement, schedule = place_and_schedule(net, topo, pipelined=args.pipelined)
    if args.trace:
        from .aig import exhaustive_masks, random_vectors
        from .simulator import run_schedule

        if g.num_inputs <= 12:
            masks, width = exhaustive_masks(g.num_inputs), 1 << g.num_inputs
        else:
            masks, width = random_vectors(g.num_inputs, args.vectors, args.seed), args.vectors
        trace_lines: list = []
        run_schedule(schedule, topo, masks, width, trace=trace_lines)
        Path(args.trace).write_text("\n".join(trace_lines) + "\n")
    report = check_equivalence(
        g, schedule, topo, n_vectors=args.vectors, seed=args.seed
    )
    payload = {
        "passed": report.passed,
        "exhaustive": report.exhaustive,
        "vectors": report.n_vectors,
        "cycles": report.cycles,
        "mismatches": [
            {"vector": v, "expected": e, "got": o} for v, e, o in report.mismatches
        ],
        "warnings": report.warnings,
    }
    _emit(args, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_estimate(args):
    g = _load(args)
    if args.recipe:
        g = apply_recipe(g, Recipe.parse(args.recipe))
    lib = _library(args)
    topo = _topology(args, lib)
    cal = _calibration(args)
    net = map_to_gates(g)
    profile = characterize_netlist(net, fold_not=args.fold_not)
    if args.mode == "scheduled":
        placement, schedule = place_and_schedule(net, topo, pipelined=args.pipelined)
        metrics = estimate_metrics(topo, cal, schedule=schedule, mode="scheduled")
    else:
        metrics = estimate_metrics(
            topo, cal, profile=profile, mode="idealized", pipelined=args.pipelined
        )
    inductor = size_inductor(topo, cal, args.f_res_ghz * 1e9)
    payload = {
        "topology": topo.name,
        "mode": args.mode,
        "metrics": metrics.to_dict(),
        "inductor": inductor.to_dict(),
        "profile": profile.to_dict(),
    }
    _emit(args, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_calibrate(args):
    rows = load_fixtures(args.fixtures) if args.fixtures else load_fixtures()
    identity = check_fixture_identity(rows)
    defaults = _calibration(args)
    report = calibrate(rows, defaults=defaults, library=_library(args))
    if args.format == "cal":
        _emit(args, dump_calibration(report.calibration))
    else:
        payload = {
            "calibration": {
                "recycle_fraction": report.calibration.recycle_fraction,
                "e_macro_overhead_j": report.calibration.e_macro_overhead_j,
                "e_control_j": report.calibration.e_control_j,
            },
            "rms_residual_nj": report.rms_residual_nj,
            "residuals": [
                {
                    "benchmark": b,
                    "scenario": s,
                    "target_nj": t,
                    "modeled_nj": m,
                    "residual_nj": r,
                }
                for b, s, t, m, r in report.residuals
            ],
            "identity_check": {
                "threshold": identity.threshold,
                "flagged": identity.flagged,
            },
        }
        _emit(args, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_explore(args):
    lib = _library(args)
    cal = _calibration(args)
    constraints = Constraints(
        max_latency_ns=args.max_latency_ns, max_memory_bits=args.max_memory_bits
    )
    reports = []
    for path in args.inputs:
        g = load_circuit(path)
        rep = explore(
            g,
            lib,
            constraints=constraints,
            calibration=cal,
            transforms=_transform_set(args.options),
            exhaustive=args.exhaustive,
            mode=args.mode,
            pipelined=args.pipelined,
            fold_not=args.fold_not,
            map_winner=not args.no_signoff,
            n_vectors=args.vectors,
            seed=args.seed,
            jobs=args.jobs,
            circuit_name=Path(path).stem,
        )
        reports.append(rep)
    if args.format == "csv":
        text = "".join(r.to_csv() for r in reports)
    elif len(reports) == 1:
        text = reports[0].to_json()
    else:
        text = (
            json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True)
            + "\n"
        )
    if args.trends:
        tr = trend_report(reports)
        sys.stderr.write(tr.render())
        if args.format == "json":
            merged = {
                "reports": [r.to_dict() for r in reports],
                "trends": tr.to_dict(),
            }
            text = json.dumps(merged, indent=2, sort_keys=True) + "\n"
    _emit(args, text)
    return 0


# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rcimflow",
        description="Map combinational logic onto resonant compute-in-memory SRAM.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--error-json",
        action="store_true",
        help="emit machine-readable errors on stderr",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_input=True):
        if with_input:
            p.add_argument("input", help="circuit file (.aag/.aig/.v/.blif)")
        p.add_argument("-o", "--output", help="output path (default stdout)")
        p.add_argument("--recipe", help="transformation recipe, e.g. ba,rw")
        p.add_argument("--fold-not", action="store_true",
                       help="account NOT gates inside consumer cycles")
        p.add_argument("--library", help="topology library config path")
        p.add_argument("--calibration", help="calibration file path")
        p.add_argument("--seed", type=int, default=2024)
        p.add_argument("--pipelined", dest="pipelined", action="store_true",
                       default=True)
        p.add_argument("--no-pipelined", dest="pipelined", action="store_false")

    p = sub.add_parser("recipes", help="list the recipe space")
    p.add_argument("--options", help="comma list from {ba,rf,rw,rs}; default all")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_recipes)

    p = sub.add_parser("synth", help="apply a recipe, emit AIGER")
    common(p)
    p.add_argument("--binary", action="store_true", help="binary aig output")
    p.add_argument("--profile", help="also write the level profile JSON here")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("characterize", help="emit the level profile JSON")
    common(p)
    p.set_defaults(func=cmd_characterize)

    p = sub.add_parser("map", help="emit the cycle schedule dump")
    common(p)
    p.add_argument("--topology", help="topology name from the library")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("simulate", help="run the array simulator vs the oracle")
    common(p)
    p.add_argument("--topology", help="topology name from the library")
    p.add_argument("--vectors", type=int, default=1000)
    p.add_argument("--trace", help="write a per-cycle text trace to this path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="metrics for one circuit x topology")
    common(p)
    p.add_argument("--topology", help="topology name from the library")
    p.add_argument("--mode", choices=("idealized", "scheduled"), default="idealized")
    p.add_argument("--f-res-ghz", type=float, default=1.0)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("calibrate", help="fit overhead constants to fixtures")
    p.add_argument("--fixtures", help="fixture CSV (default: shipped reference set)")
    p.add_argument("--library", help="topology library config path")
    p.add_argument("--calibration", help="starting calibration file")
    p.add_argument("--format", choices=("json", "cal"), default="json")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("explore", help="full design-space exploration")
    p.add_argument("inputs", nargs="+", help="circuit file(s)")
    p.add_argument("-o", "--output")
    p.add_argument("--options", help="transformation subset, default all four")
    p.add_argument("--library")
    p.add_argument("--calibration")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--exhaustive", action="store_true",
                   help="evaluate all recipes x topologies")
    p.add_argument("--mode", choices=("idealized", "scheduled"), default="idealized")
    p.add_argument("--fold-not", action="store_true")
    p.add_argument("--max-latency-ns", type=float)
    p.add_argument("--max-memory-bits", type=int)
    p.add_argument("--no-signoff", action="store_true",
                   help="skip mapping & simulating the winner")
    p.add_argument("--trends", action="store_true",
                   help="print multi-macro energy-saving aggregates")
    p.add_argument("--vectors", type=int, default=1000)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--jobs", type=int, default=default_jobs())
    p.add_argument("--pipelined", dest="pipelined", action="store_true", default=True)
    p.add_argument("--no-pipelined", dest="pipelined", action="store_false")
    p.set_defaults(func=cmd_explore)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 2
    except RcimError as exc:
        if getattr(args, "error_json", False) or "--error-json" in (argv or []):
            sys.stderr.write(
                json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n"
            )
        else:
            sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 1


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
