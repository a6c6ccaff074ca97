"""
Command-line interface: estimate, exact, plan, gen, merge and serve.

Exit codes: 0 success, 2 usage error, 3 input format error.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence, Tuple

from pydantic import ValidationError

from .config import get_settings
from .schemas import EnsembleDump, EstimateReport, Plan
from .services.algebra import GroupSpec
from .services.errors import (MotifSketchError, PatternError, StreamConsistencyError, StreamFormatError)
from .services.estimator import Ensemble, PlanInput, explore_target_count, manual_plan, plan_parameters
from .services.oracle import exact_count, replay
from .services.pattern import Pattern, load_pattern
from .services.sketch import Algorithm
from .services.streamio import generate, read_stream, stream_stats

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3

INPUT_ERRORS = (PatternError, StreamFormatError, StreamConsistencyError, ValidationError, json.JSONDecodeError, OSError)


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError(f"seed must lie in 0..2^64-1, got {text}")
    return value


def _group(text: str) -> GroupSpec:
    try:
        return GroupSpec.parse(text)
    except MotifSketchError as e:
        raise argparse.ArgumentTypeError(str(e))


def _plant(text: str) -> Tuple[str, int]:
    name, sep, count = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected <pattern>=<count>, got {text!r}")
    try:
        return name, int(count)
    except ValueError:
        raise argparse.ArgumentTypeError(f"count must be an integer, got {count!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="motif-sketch",
                                     description="Estimate pattern counts in turnstile edge streams")
    parser.add_argument("--log-level", default=None, help="Override SKETCH_LOG_LEVEL")
    commands = parser.add_subparsers(dest="command", required=True)

    estimate = commands.add_parser("estimate", help="Run an ensemble of sketches over a stream")
    estimate.add_argument("--pattern", required=True, help="Built-in pattern name or pattern file")
    estimate.add_argument("--input", required=True, help="Edge stream file, or - for stdin")
    estimate.add_argument("--colors", type=int, required=True, help="Number of colors C (at least t)")
    estimate.add_argument("--group", type=_group, default=None,
                          help="roots:<r> or matrix:<d> (default roots:SKETCH_DEFAULT_ROOTS)")
    estimate.add_argument("--instances", type=int, default=1, help="Independent instances N")
    estimate.add_argument("--algorithm", type=int, choices=[1, 2], default=None,
                          help="1 accumulates complex values, 2 keeps exact counts (matrix groups only)")
    estimate.add_argument("--seed", type=_seed, default=0, help="Master seed")
    estimate.add_argument("--json", action="store_true", help="Print the full report as JSON")
    estimate.add_argument("--allow-leaves", action="store_true", help="Accept patterns with degree-1 vertices")
    estimate.add_argument("--batch-size", type=int, default=None, help="Events per ingestion batch")
    estimate.add_argument("--fast-cycle4", dest="fast_cycle4", action="store_true", default=None,
                          help="Force the 4-cycle finalizer")
    estimate.add_argument("--naive", dest="fast_cycle4", action="store_false",
                          help="Force the naive finalizer")
    estimate.add_argument("--dump-state", default=None, help="Write the ensemble state as JSON to this file")
    estimate.add_argument("--record", action="store_true", help="Store the report in the runs database")

    exact = commands.add_parser("exact", help="Exact count by brute force")
    exact.add_argument("--pattern", required=True)
    exact.add_argument("--input", required=True)
    exact.add_argument("--allow-leaves", action="store_true")
    exact.add_argument("--json", action="store_true")

    plan = commands.add_parser("plan", help="Choose colors, group and instance count")
    plan.add_argument("--pattern", required=True)
    plan.add_argument("--edges", type=int, default=None,
                      help="Directed edge count m (twice the undirected count); read from --input if omitted")
    plan.add_argument("--alpha", type=float, required=True)
    plan.add_argument("--target-count", type=int, default=None, help="Lower-bound guess for the count")
    plan.add_argument("--max-degree", type=int, default=None)
    plan.add_argument("--input", default=None, help="Stream used for m and an exploratory target count")
    plan.add_argument("--storage-budget", type=int, default=None, help="Cap on total counter cells")
    plan.add_argument("--time-budget", type=int, default=None, help="Cap on final-computation work units")
    plan.add_argument("--relative-variance", type=float, default=0.1)
    plan.add_argument("--seed", type=_seed, default=0, help="Seed for the exploratory run")
    plan.add_argument("--allow-leaves", action="store_true")
    plan.add_argument("--json", action="store_true")

    gen = commands.add_parser("gen", help="Generate a random degree-capped stream")
    gen.add_argument("--nodes", type=int, required=True)
    gen.add_argument("--edges", type=int, required=True, help="Random undirected edges besides planted copies")
    gen.add_argument("--max-degree", type=int, required=True)
    gen.add_argument("--plant", type=_plant, action="append", default=[], help="<pattern>=<count>, repeatable")
    gen.add_argument("--churn", type=int, default=0, help="Insert/delete pairs spliced into the stream")
    gen.add_argument("--seed", type=_seed, default=0)
    gen.add_argument("--output", default=None, help="Output file (default stdout)")

    merge = commands.add_parser("merge", help="Merge ensemble dumps and report the estimate")
    merge.add_argument("dumps", nargs="+", help="Files written by estimate --dump-state")
    merge.add_argument("--json", action="store_true")

    serve = commands.add_parser("serve", help="Run the HTTP API")
    serve.add_argument("--host", default="0.0.0.0")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--reload", action="store_true")
    return parser


def _print_report(report: EstimateReport, as_json: bool) -> None:
    if as_json:
        print(report.model_dump_json(indent=2))
        return
    print(f"pattern:      {report.pattern}")
    print(f"estimate:     {report.mean:.6g} ± {report.std_error:.3g}")
    print(f"instances:    {report.plan.instances} ({report.plan.group}, C={report.plan.colors}, "
          f"algorithm {report.algorithm}, {report.finalizer} finalizer)")
    print(f"imaginary:    {report.imaginary_mean:.3g}")
    print(f"stream:       {report.stream.get('events', 0)} events, m={report.stream.get('directed_edges', 0)}")


def _print_plan(plan: Plan, as_json: bool) -> None:
    if as_json:
        print(plan.model_dump_json(indent=2))
        return
    print(f"colors:       {plan.colors}")
    print(f"group:        {plan.group}")
    print(f"instances:    {plan.instances}")
    print(f"storage:      {plan.storage_cells} cells")
    print(f"final work:   {plan.final_work}")
    for warning in plan.warnings:
        print(f"warning:      {warning}")


def _record(pattern: Pattern, report: EstimateReport) -> int:
    from .database import Base, EstimateRun, SessionLocal, engine

    Base.metadata.create_all(bind=engine)
    db = SessionLocal()
    try:
        run = EstimateRun.from_report(pattern.serialize(), report)
        db.add(run)
        db.commit()
        db.refresh(run)
        logger.info(f"Recorded run {run.id} for {report.pattern}")
        return run.id
    finally:
        db.close()


def cmd_estimate(args) -> int:
    pattern = load_pattern(args.pattern, allow_leaves=args.allow_leaves)
    spec = args.group or GroupSpec.roots(get_settings().default_roots)
    plan = manual_plan(pattern, args.colors, spec, args.instances)
    algorithm = Algorithm(args.algorithm) if args.algorithm else None
    ensemble = Ensemble(pattern, plan, args.seed, algorithm=algorithm)
    ensemble.ingest(read_stream(args.input), args.batch_size)
    report = ensemble.report(args.fast_cycle4)
    if args.dump_state:
        Path(args.dump_state).write_text(ensemble.to_dump().model_dump_json())
        logger.info(f"Wrote ensemble state to {args.dump_state}")
    if args.record:
        run_id = _record(pattern, report)
        if not args.json:
            print(f"recorded:     run {run_id}")
    _print_report(report, args.json)
    return EXIT_OK


def cmd_exact(args) -> int:
    pattern = load_pattern(args.pattern, allow_leaves=args.allow_leaves)
    g = replay(read_stream(args.input))
    count = exact_count(g, pattern)
    if args.json:
        print(json.dumps({"pattern": pattern.label, "count": count,
                          "vertices": g.vertex_count, "edges": g.edge_count}))
    else:
        print(count)
    return EXIT_OK


def cmd_plan(args) -> int:
    pattern = load_pattern(args.pattern, allow_leaves=args.allow_leaves)
    events = list(read_stream(args.input)) if args.input else None
    m = args.edges
    if m is None:
        if events is None:
            raise MotifSketchError("plan needs --edges or an --input stream")
        m = stream_stats(events).directed_edges
    target = args.target_count
    if target is None:
        if events is None:
            raise MotifSketchError("plan needs --target-count or an --input stream for an exploratory estimate")
        target = explore_target_count(events, pattern, args.seed)
    plan = plan_parameters(PlanInput(
        m=m,
        alpha=args.alpha,
        target_count=target,
        pattern=pattern,
        delta_max=args.max_degree,
        storage_budget=args.storage_budget,
        time_budget=args.time_budget,
        relative_variance=args.relative_variance,
    ))
    _print_plan(plan, args.json)
    return EXIT_OK


def cmd_gen(args) -> int:
    planted = [(load_pattern(name), count) for name, count in args.plant]
    text = generate(args.nodes, args.edges, args.max_degree, planted=planted, churn=args.churn, seed=args.seed)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_merge(args) -> int:
    merged: Optional[Ensemble] = None
    for path in args.dumps:
        ensemble = Ensemble.from_dump(EnsembleDump.model_validate_json(Path(path).read_text()))
        merged = ensemble if merged is None else merged.merge(ensemble)
    _print_report(merged.report(), args.json)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("app.main:app", host=args.host, port=args.port, reload=args.reload)
    return EXIT_OK


COMMANDS = {
    "estimate": cmd_estimate,
    "exact": cmd_exact,
    "plan": cmd_plan,
    "gen": cmd_gen,
    "merge": cmd_merge,
    "serve": cmd_serve,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    logging.basicConfig(level=args.log_level or get_settings().log_level,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except INPUT_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except MotifSketchError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
