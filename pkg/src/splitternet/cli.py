"""Command-line front end: build topologies, run and check executions.

Exit codes: 0 all checks passed, 1 a property violation was found,
2 usage or input error.  All JSON output has sorted keys and a stable
schema; seeds are echoed so any printed number can be reproduced.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import analysis, engine, explore, threads, topology


def _emit(doc: dict) -> None:
    print(json.dumps(doc, sort_keys=True, indent=2))


def _violations_doc(violations: list[analysis.Violation]) -> list[dict]:
    return [v.as_dict() for v in violations]


def _metrics_doc(m: analysis.Metrics, result: engine.ExecutionResult) -> dict:
    return {
        "names_assigned": sorted(m.names_assigned),
        "max_name": m.max_name,
        "overflowed": len(result.overflowed),
        "unfinished": len(result.unfinished),
        "visits_max": max(m.per_process_visits.values(), default=0),
        "register_ops_max": max(m.per_process_register_ops.values(), default=0),
        "stops_per_stage": {str(s): c for s, c in sorted(m.stops_per_stage.items())},
        "nonempty_output_wires": {str(s): c for s, c in sorted(m.nonempty_output_wires.items())},
        "nonempty_output_splitters": {
            str(s): c for s, c in sorted(m.nonempty_output_splitters.items())
        },
    }


def _require_size(value: int | None, flag: str, kind: str) -> int:
    if value is None:
        raise ValueError(f"--kind {kind} needs {flag}")
    return value


def _build_topology(args: argparse.Namespace) -> topology.Topology:
    kind = args.kind
    if kind == "grid":
        return topology.build_grid(_require_size(args.m, "--m", kind))
    if kind == "tree":
        return topology.build_tree(_require_size(args.size, "--size", kind))
    if kind == "stage":
        return topology.build_stage(
            _require_size(args.n, "--n", kind), per_wire_trees=args.per_wire_trees
        )
    if kind == "full":
        return topology.build_full(
            _require_size(args.n, "--n", kind), per_wire_trees=args.per_wire_trees
        )
    if kind == "adaptive":
        return topology.build_adaptive(_require_size(args.n, "--n", kind))
    raise ValueError(f"unknown kind {kind!r}")


def cmd_build(args: argparse.Namespace) -> int:
    t = _build_topology(args)
    report = topology.validate(t)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(topology.export_json(t))
            fh.write("\n")
    if args.dot:
        with open(args.dot, "w") as fh:
            fh.write(topology.export_dot(t))
    _emit(
        {
            "kind": args.kind,
            "splitter_count": report.splitter_count,
            "depth": report.depth,
            "stages": len(report.per_stage),
            "topology_hash": t.hash,
            "out": args.out,
        }
    )
    return 0


def _load_topology(path: str) -> topology.Topology:
    with open(path) as fh:
        return topology.import_json(fh.read())


def cmd_run(args: argparse.Namespace) -> int:
    t = _load_topology(args.topo)
    report = topology.validate(t)
    result, trace = engine.simulate(t, args.procs, args.sched, args.seed, record=True)
    if args.trace_out:
        engine.write_trace(trace, args.trace_out)
    if args.schedule_out:
        engine.write_schedule(result.schedule, args.schedule_out)
    violations = analysis.check_all(trace, t)
    violations += analysis.check_result(result, t, report)
    metrics = analysis.compute_metrics(trace, t)
    _emit(
        {
            "policy": args.sched,
            "seed": args.seed,
            "procs": args.procs,
            "topology_hash": t.hash,
            "metrics": _metrics_doc(metrics, result),
            "violations": _violations_doc(violations),
        }
    )
    return 1 if violations else 0


def cmd_explore(args: argparse.Namespace) -> int:
    if args.kind == "splitter":
        t = topology.build_grid(1)
    elif args.kind == "tree":
        t = topology.build_tree(_require_size(args.size, "--size", args.kind))
    else:
        t = topology.build_grid(_require_size(args.size, "--size", args.kind))
    report = explore.explore_exhaustive(t, args.procs, config_cap=args.cap)
    _emit(
        {
            "kind": args.kind,
            "procs": args.procs,
            "interleavings": report.interleavings,
            "configurations": report.configurations,
            "outcome_vectors": len(report.outcome_vectors),
            "violations": _violations_doc(report.violations),
        }
    )
    return 1 if report.violations else 0


def cmd_stress(args: argparse.Namespace) -> int:
    t = topology.build_full(args.n)
    report = topology.validate(t)
    procs = args.procs if args.procs is not None else args.n
    results = threads.execute_threads(t, procs, runs=args.runs)
    failures = []
    for i, result in enumerate(results):
        bad = analysis.check_result(result, t, report)
        if len(result.names) < procs:
            bad.append(
                analysis.Violation(
                    "overflow",
                    "network",
                    f"only {len(result.names)} of {procs} processes got names",
                )
            )
        if bad:
            failures.append(
                {
                    "run": i,
                    "names": {str(p): n for p, n in sorted(result.names.items())},
                    "overflowed": result.overflowed,
                    "violations": _violations_doc(bad),
                }
            )
    _emit(
        {
            "n": args.n,
            "procs": procs,
            "runs": args.runs,
            "passed": args.runs - len(failures),
            "failures": failures,
        }
    )
    return 1 if failures else 0


def cmd_verify(args: argparse.Namespace) -> int:
    t = _load_topology(args.topo)
    trace = engine.read_trace(args.trace)
    violations = analysis.check_all(trace, t)
    _emit(
        {
            "events": len(trace.events),
            "topology_hash": t.hash,
            "trace_hash_matches": trace.meta.get("topology_hash") == t.hash,
            "violations": _violations_doc(violations),
        }
    )
    return 1 if violations else 0


def cmd_report(args: argparse.Namespace) -> int:
    t = _load_topology(args.topo)
    trace = engine.read_trace(args.trace)
    violations = analysis.check_all(trace, t)
    metrics = analysis.compute_metrics(trace, t)
    doc = {
        "metrics": {
            "names_assigned": sorted(metrics.names_assigned),
            "max_name": metrics.max_name,
            "per_process_visits": {str(p): v for p, v in sorted(metrics.per_process_visits.items())},
            "per_process_register_ops": {
                str(p): v for p, v in sorted(metrics.per_process_register_ops.items())
            },
            "stops_per_stage": {str(s): c for s, c in sorted(metrics.stops_per_stage.items())},
            "nonempty_output_wires": {
                str(s): c for s, c in sorted(metrics.nonempty_output_wires.items())
            },
            "nonempty_output_splitters": {
                str(s): c for s, c in sorted(metrics.nonempty_output_splitters.items())
            },
        },
        "violations": _violations_doc(violations),
    }
    if args.json:
        _emit(doc)
    else:
        print(f"names assigned: {len(metrics.names_assigned)} (max {metrics.max_name})")
        for stage, count in sorted(metrics.stops_per_stage.items()):
            print(f"stops in stage {stage}: {count}")
        if violations:
            print(f"violations: {len(violations)}")
            for v in violations:
                print(f"  [{v.kind}] {v.location}: {v.message}")
        else:
            print("violations: none")
    return 1 if violations else 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="splitternet", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a topology and write it to a file")
    p.add_argument("--kind", required=True, choices=["grid", "tree", "stage", "full", "adaptive"])
    p.add_argument("--m", type=int, help="grid side")
    p.add_argument("--size", type=int, help="tree size")
    p.add_argument("--n", type=int, help="network size (stage, full, adaptive)")
    p.add_argument("--per-wire-trees", action="store_true",
                   help="give each anti-diagonal exit wire its own tree instead of a merged one")
    p.add_argument("--out", help="write topology JSON here")
    p.add_argument("--dot", help="also write Graphviz DOT here")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("run", help="simulate one run and check every property")
    p.add_argument("--topo", required=True)
    p.add_argument("--procs", type=int, required=True)
    p.add_argument("--sched", default="round_robin", choices=list(engine.POLICIES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace-out", help="write the event trace (JSONL) here")
    p.add_argument("--schedule-out", help="write the schedule (JSON array) here")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("explore", help="enumerate every schedule on a small topology")
    p.add_argument("--kind", required=True, choices=["splitter", "tree", "grid"])
    p.add_argument("--size", type=int, help="tree size or grid side")
    p.add_argument("--procs", type=int, required=True)
    p.add_argument("--cap", type=int, default=500_000, help="configuration expansion cap")
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("stress", help="race real threads through build_full(n)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--procs", type=int, help="thread count (default n)")
    p.add_argument("--runs", type=int, default=1)
    p.set_defaults(func=cmd_stress)

    p = sub.add_parser("verify", help="re-check a stored topology + trace pair")
    p.add_argument("--topo", required=True)
    p.add_argument("--trace", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="metrics and violations for a stored trace")
    p.add_argument("--topo", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except (
        topology.TopologyError,
        engine.EngineError,
        engine.ScheduleError,
        analysis.AnalysisError,
        explore.ExploreBudgetError,
        ValueError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
