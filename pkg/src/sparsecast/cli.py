"""Command-line front-end.

Exit codes: 0 success, 1 usage error, 2 topology/config/validation error,
3 internal invariant violation.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from . import __version__
from .algorithms import AlgorithmId, run_algorithm
from .forest import InvariantError, MulticastSession, metrics, serialize_forest, validate_forest
from .harness import (
    ConfigError,
    McPolicy,
    parse_config,
    spt_comparison,
    sweep_csv,
    sweep_group_size,
    sweep_mc_count,
)
from .network import TopologyError
from .topologies import load_topology

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; usage errors must map to 1
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _id_list(text: str) -> List[int]:
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated node ids, got {text!r}") from None


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        value = 0
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sparsecast", description="Multicast light-tree routing in sparse-splitting WDM networks.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    topo_help = "topology file, or a bundled name: nsf, longhaul"

    v = sub.add_parser("validate", help="parse and check a topology file")
    v.add_argument("topology", help=topo_help)

    r = sub.add_parser("route", help="compute the light forest of one multicast session")
    r.add_argument("topology", help=topo_help)
    r.add_argument("--algo", required=True, choices=[a.value for a in AlgorithmId], help="routing algorithm")
    r.add_argument("--source", required=True, type=int, help="source node id")
    r.add_argument("--dests", required=True, type=_id_list, help="destination ids, comma separated")
    r.add_argument(
        "--mc", type=_id_list, default=None,
        help="MC node ids, comma separated (default: the topology's mc line); the source is always MC",
    )

    c = sub.add_parser("spt-compare", help="MIB count N and link stress S of Dijkstra vs DijkstraPro per source")
    c.add_argument("topology", help=topo_help)
    c.add_argument("--mc", required=True, help="MC policy: source | explicit:<ids> | degree:<k> | random:<count>")
    c.add_argument("--members", type=_id_list, default=None, help="multicast members (default: every node)")
    c.add_argument("--out", default=None, help="CSV output path (default: stdout)")

    for name, what in (("sweep-group", "group-size"), ("sweep-mc", "MC-count")):
        e = sub.add_parser(name, help=f"{what} sweep driven by a key = value config file")
        e.add_argument("config", help="experiment config file")
        e.add_argument("--jobs", type=_positive_int, default=1, help="worker processes (output does not depend on it)")
        e.add_argument("--out", default=None, help="CSV output path (overrides the config's out key)")
    return p


def _cmd_validate(args) -> int:
    g = load_topology(args.topology)
    mc = ",".join(map(str, sorted(g.mc))) or "-"
    print(f"nodes={g.num_nodes} edges={len(g.edges)} mc={mc}")
    return EXIT_OK


def _cmd_route(args) -> int:
    g = load_topology(args.topology)
    mc = set(g.mc if args.mc is None else args.mc) | {args.source}
    try:
        g = g.with_mc(mc)
        ms = MulticastSession(args.source, frozenset(args.dests))
        if len(ms.dests) != len(args.dests):
            raise ValueError("duplicate destination ids")
        ms.check(g)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    forest = run_algorithm(args.algo, g, ms)
    validate_forest(forest, g)
    sys.stdout.write(serialize_forest(forest))
    print(metrics(forest, g).line())
    return EXIT_OK


def _write(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _cmd_spt_compare(args) -> int:
    g = load_topology(args.topology)
    policy = McPolicy.parse(args.mc)
    if policy.kind == "random":
        raise ConfigError("spt-compare needs a deterministic MC policy (source, explicit or degree)")
    table = spt_comparison(g, policy, args.members)
    comments = [f"topology = {args.topology}", f"mc_policy = {policy}"]
    _write(table.to_csv(comments), args.out)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
    g = load_topology(cfg.topology)
    if args.command == "sweep-group":
        if not cfg.group_sizes:
            raise ConfigError("a group-size sweep needs group_sizes")
        rows = sweep_group_size(g, cfg, jobs=args.jobs)
        comments = ["experiment = sweep-group", *cfg.echo()]
    else:
        rows = sweep_mc_count(g, cfg, jobs=args.jobs)
        comments = ["experiment = sweep-mc", *cfg.echo()]
    _write(sweep_csv(rows, comments), args.out if args.out is not None else cfg.out)
    return EXIT_OK


COMMANDS = {
    "validate": _cmd_validate,
    "route": _cmd_route,
    "spt-compare": _cmd_spt_compare,
    "sweep-group": _cmd_sweep,
    "sweep-mc": _cmd_sweep,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except InvariantError as exc:
        print(f"sparsecast: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (TopologyError, ConfigError, OSError) as exc:
        print(f"sparsecast: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
