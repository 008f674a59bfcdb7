"""Command-line entry point: compose, simulate, serve, export-dot.

Exit codes: 0 success; 2 not composable; 3 search timeout; 4 simulation
stuck; 5 step limit exceeded; 1 any other error.  Verbosity comes from the
LLWEAVE_LOG environment variable (DEBUG, INFO, ...).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import composer, pi, services, sim
from .composer import (CompositionResult, NotComposableError, SearchLimits,
                       SearchTimeout)
from .services import RegistryError

log = logging.getLogger("llweave")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_COMPOSABLE = 2
EXIT_TIMEOUT = 3
EXIT_STUCK = 4
EXIT_STEP_LIMIT = 5


def _setup_logging():
    level = os.environ.get("LLWEAVE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _load_inputs(args):
    registry = services.load_registry(Path(args.registry).read_text())
    request = services.load_request(Path(args.request).read_text())
    return registry, request


def _limits(args) -> SearchLimits:
    return SearchLimits(max_depth=args.max_depth, max_cuts=args.max_cuts,
                        timeout=args.timeout)


def _compose(args) -> CompositionResult:
    registry, request = _load_inputs(args)
    return composer.compose(registry, request, _limits(args))


def _composition_document(result: CompositionResult) -> dict:
    return {
        "sequent": str(result.theorem.sequent),
        "process": pi.print_process(result.theorem.process),
        "services_used": dict(sorted(result.services_used.items())),
        "proof": result.theorem.derivation.to_json(),
        "stats": {
            "nodes_expanded": result.stats.nodes_expanded,
            "cuts_introduced": result.stats.cuts_introduced,
            "elapsed": result.stats.elapsed,
        },
    }


def cmd_compose(args) -> int:
    try:
        result = _compose(args)
    except NotComposableError as e:
        print(f"not composable: {e}", file=sys.stderr)
        return EXIT_NOT_COMPOSABLE
    except SearchTimeout as e:
        print(f"timeout: {e}", file=sys.stderr)
        return EXIT_TIMEOUT
    doc = _composition_document(result)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "composition.pi").write_text(doc["process"] + "\n")
        (out / "proof.json").write_text(json.dumps(doc["proof"], indent=2) + "\n")
        (out / "services_used.txt").write_text(
            "".join(f"{name} x{n}\n" for name, n in sorted(result.services_used.items())))
        log.info("composition artifacts written to %s", out)
    if args.format == "json":
        print(json.dumps(doc, indent=2))
    else:
        print(doc["process"])
        print(f"# services: {', '.join(sorted(result.services_used))}",
              file=sys.stderr)
    return EXIT_OK


def _build_main(args) -> tuple[pi.Process, CompositionResult | None]:
    registry, request = _load_inputs(args)
    if args.composition:
        composition = pi.parse_process(Path(args.composition).read_text())
        result = None
    else:
        result = composer.compose(registry, request, _limits(args))
        composition = result.theorem.process
    defs = [services.stub(s) for s in registry]
    client_def = services.client(request)
    return sim.assemble_main(composition, defs, client_def), result


def _read_script(args) -> list[int] | None:
    if not args.script:
        return None
    picks = json.loads(Path(args.script).read_text())
    if not isinstance(picks, list) or not all(isinstance(p, int) for p in picks):
        raise ValueError("script file must hold a JSON list of redex picks")
    return picks


def cmd_simulate(args) -> int:
    try:
        main, _ = _build_main(args)
    except NotComposableError as e:
        print(f"not composable: {e}", file=sys.stderr)
        return EXIT_NOT_COMPOSABLE
    except SearchTimeout as e:
        print(f"timeout: {e}", file=sys.stderr)
        return EXIT_TIMEOUT
    try:
        result = sim.run(main, args.policy, seed=args.seed,
                         script=_read_script(args), step_limit=args.step_limit)
    except sim.StepLimitExceeded as e:
        print(f"step limit: {e}", file=sys.stderr)
        return EXIT_STEP_LIMIT

    doc = sim.trace_document(main, result)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "trace.json").write_text(json.dumps(doc, indent=2) + "\n")
        (out / "trace.csv").write_text(sim.trace_csv(result))
        if args.figures:
            from . import viz
            viz.render_network(sim.SimState.initial(main),
                               str(out / "network_initial.png"), title="initial")
            viz.render_network(result.final, str(out / "network_final.png"),
                               title=f"final ({result.status})")
            viz.render_timeline(result, str(out / "timeline.png"))
        log.info("trace artifacts written to %s", out)
    if args.format == "json":
        print(json.dumps(doc, indent=2))
    elif args.format == "dot":
        print(sim.dot_export(result.final), end="")
    else:
        for e in result.events:
            payload = ",".join(str(n) for n in e.payload)
            print(f"{e.step:3d}  {e.sender_origin} -> {e.receiver_origin}"
                  f"  on {e.channel} <{payload}>")
        print(f"# {result.status} after {len(result.events)} reductions",
              file=sys.stderr)
    return EXIT_OK if result.status == "terminated" else EXIT_STUCK


def cmd_serve(args) -> int:
    from . import server as srv
    try:
        main, _ = _build_main(args)
    except NotComposableError as e:
        print(f"not composable: {e}", file=sys.stderr)
        return EXIT_NOT_COMPOSABLE
    except SearchTimeout as e:
        print(f"timeout: {e}", file=sys.stderr)
        return EXIT_TIMEOUT
    try:
        http_server, _ = srv.make_server(main, args.port)
    except OSError as e:
        print(f"cannot bind port {args.port}: {e}", file=sys.stderr)
        return EXIT_ERROR
    host, port = http_server.server_address[:2]
    print(f"step server on http://{host}:{port}/state", file=sys.stderr)
    try:
        http_server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        http_server.server_close()
    return EXIT_OK


def cmd_export_dot(args) -> int:
    try:
        main, _ = _build_main(args)
    except NotComposableError as e:
        print(f"not composable: {e}", file=sys.stderr)
        return EXIT_NOT_COMPOSABLE
    except SearchTimeout as e:
        print(f"timeout: {e}", file=sys.stderr)
        return EXIT_TIMEOUT
    state = sim.SimState.initial(main)
    script = _read_script(args) or []
    for pick in script[:args.at_step] if args.at_step is not None else script:
        state = sim.step(state, pick)
    dot = sim.dot_export(state)
    if args.out:
        Path(args.out).write_text(dot)
    else:
        print(dot, end="")
    if args.render:
        from . import viz
        viz.render_network(state, args.render)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="llweave",
        description="Compose services by linear-logic proof search and run "
                    "the extracted pi-calculus composition.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, simulation=False):
        p.add_argument("--registry", required=True, help="service registry file")
        p.add_argument("--request", required=True, help="requested service file")
        p.add_argument("--max-depth", type=int, default=12)
        p.add_argument("--max-cuts", type=int, default=6)
        p.add_argument("--timeout", type=float, default=30.0)
        if simulation:
            p.add_argument("--composition",
                           help="use a previously extracted composition (.pi text)")
            p.add_argument("--script", help="JSON file with redex pick indices")

    p = sub.add_parser("compose", help="prove the request and extract the process")
    common(p)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--out", help="directory for composition.pi / proof.json")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("simulate", help="instantiate stubs and run to completion")
    common(p, simulation=True)
    p.add_argument("--policy", choices=["first", "random", "script"], default="first")
    p.add_argument("--seed", type=int, help="seed for the random policy")
    p.add_argument("--step-limit", type=int, default=10_000)
    p.add_argument("--format", choices=["text", "json", "dot"], default="text")
    p.add_argument("--out", help="directory for trace.json / trace.csv")
    p.add_argument("--figures", action="store_true",
                   help="also render network and timeline figures under --out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("serve", help="serve the interactive step protocol")
    common(p, simulation=True)
    p.add_argument("--port", type=int, default=8787)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("export-dot", help="write the interaction graph as DOT")
    common(p, simulation=True)
    p.add_argument("--at-step", type=int, default=None,
                   help="apply this many script picks before exporting")
    p.add_argument("--out", help="output DOT file (default stdout)")
    p.add_argument("--render", help="also render a PNG to this path")
    p.set_defaults(func=cmd_export_dot)
    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "policy", None) == "random" and args.seed is None:
        parser.error("--policy random requires --seed")
    if getattr(args, "policy", None) == "script" and not getattr(args, "script", None):
        parser.error("--policy script requires --script")
    try:
        return args.func(args)
    except (RegistryError, pi.ProcessSyntaxError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except (sim.UnknownRefError, sim.ArityMismatchError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
