"""Network model: sparse-splitting WDM topology, file format and graph queries.

A network is an undirected graph whose nodes are either multicast capable
(MC, equipped with a light splitter) or multicast incapable (MI, tap-and-continue
only).  Every fiber link carries an additive cost and an additive delay.

Topology file format (UTF-8 text, ``#`` starts a comment)::

    nodes 14
    mc 1 8 10
    edge 1 2
    edge 1 3 2 5     # cost 2, delay 5

Weights are kept exact: integral values become ``int``, anything else a
``fractions.Fraction``.
"""
from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple, Union

Weight = Union[int, Fraction]
Edge = Tuple[int, int]

METRICS = ("cost", "delay")


class TopologyError(ValueError):
    """Raised for malformed or invalid topology input."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def edge_key(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


def _exact(token: str) -> Weight:
    value = Fraction(token)
    return value.numerator if value.denominator == 1 else value


@dataclass(frozen=True)
class NetworkGraph:
    """Immutable undirected network with per-node splitting capability.

    ``edges`` maps a normalized ``(min, max)`` node pair to ``(cost, delay)``.
    Node ids are ``1..num_nodes``.
    """

    num_nodes: int
    edges: Mapping[Edge, Tuple[Weight, Weight]]
    mc: FrozenSet[int] = frozenset()
    adjacency: Mapping[int, Tuple[int, ...]] = field(init=False, repr=False, compare=False)
    _weighted: Mapping[str, Mapping[int, Tuple[Tuple[int, Weight], ...]]] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        adj: Dict[int, List[int]] = {v: [] for v in self.nodes}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        adjacency = {v: tuple(sorted(n)) for v, n in adj.items()}
        object.__setattr__(self, "adjacency", adjacency)
        weighted = {
            metric: {
                v: tuple((y, self.edges[edge_key(v, y)][i]) for y in ys) for v, ys in adjacency.items()
            }
            for i, metric in enumerate(METRICS)
        }
        object.__setattr__(self, "_weighted", weighted)

    @property
    def nodes(self) -> range:
        return range(1, self.num_nodes + 1)

    def neighbors(self, v: int) -> Tuple[int, ...]:
        return self.adjacency[v]

    def weighted_neighbors(self, v: int, metric: str) -> Tuple[Tuple[int, Weight], ...]:
        """``(neighbor, weight)`` pairs in ascending neighbor order."""
        return self._weighted[metric][v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def is_mc(self, v: int) -> bool:
        return v in self.mc

    def has_edge(self, u: int, v: int) -> bool:
        return edge_key(u, v) in self.edges

    def cost(self, u: int, v: int) -> Weight:
        return self.edges[edge_key(u, v)][0]

    def delay(self, u: int, v: int) -> Weight:
        return self.edges[edge_key(u, v)][1]

    def weight(self, u: int, v: int, metric: str) -> Weight:
        return self.edges[edge_key(u, v)][METRICS.index(metric)]

    def with_mc(self, mc: Iterable[int]) -> "NetworkGraph":
        """Return a copy of the graph with a different MC node set."""
        mc = frozenset(mc)
        unknown = [v for v in mc if not 1 <= v <= self.num_nodes]
        if unknown:
            raise TopologyError(f"unknown MC node id(s): {sorted(unknown)}")
        return NetworkGraph(self.num_nodes, self.edges, mc)

    def path_weight(self, path: List[int], metric: str) -> Weight:
        return sum((self.weight(a, b, metric) for a, b in zip(path, path[1:])), 0)


def validate(g: NetworkGraph) -> None:
    """Check the structural invariants; raise TopologyError on violation."""
    if g.num_nodes < 1:
        raise TopologyError("graph has no nodes")
    for (u, v), (cost, delay) in g.edges.items():
        if u == v:
            raise TopologyError(f"self-loop on node {u}")
        if not (1 <= u <= g.num_nodes and 1 <= v <= g.num_nodes):
            raise TopologyError(f"edge {u}-{v} references an unknown node")
        if cost <= 0 or delay <= 0:
            raise TopologyError(f"edge {u}-{v} must have positive cost and delay")
    seen = reachable(g, 1)
    if len(seen) != g.num_nodes:
        missing = sorted(set(g.nodes) - seen)
        raise TopologyError(f"graph is disconnected; unreachable from node 1: {missing}")


def parse_topology(text: str) -> NetworkGraph:
    num_nodes: Optional[int] = None
    mc: Set[int] = set()
    edges: Dict[Edge, Tuple[Weight, Weight]] = {}

    def node_id(token: str, lineno: int) -> int:
        try:
            v = int(token)
        except ValueError:
            raise TopologyError(f"bad node id {token!r}", lineno) from None
        if num_nodes is None or not 1 <= v <= num_nodes:
            raise TopologyError(f"unknown node id {v}", lineno)
        return v

    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        keyword, args = tokens[0], tokens[1:]
        if keyword == "nodes":
            if num_nodes is not None:
                raise TopologyError("duplicate 'nodes' header", lineno)
            if len(args) != 1 or not args[0].isdigit() or int(args[0]) < 1:
                raise TopologyError("expected 'nodes <N>' with N >= 1", lineno)
            num_nodes = int(args[0])
        elif num_nodes is None:
            raise TopologyError("first statement must be 'nodes <N>'", lineno)
        elif keyword == "mc":
            mc.update(node_id(t, lineno) for t in args)
        elif keyword == "edge":
            if not 2 <= len(args) <= 4:
                raise TopologyError("expected 'edge <u> <v> [cost] [delay]'", lineno)
            u, v = node_id(args[0], lineno), node_id(args[1], lineno)
            if u == v:
                raise TopologyError(f"self-loop on node {u}", lineno)
            try:
                weights = [_exact(t) for t in args[2:]]
            except (ValueError, ZeroDivisionError):
                raise TopologyError(f"bad edge weight in {args[2:]}", lineno) from None
            cost = weights[0] if weights else 1
            delay = weights[1] if len(weights) > 1 else 1
            if cost <= 0 or delay <= 0:
                raise TopologyError("edge cost and delay must be positive", lineno)
            key = edge_key(u, v)
            if key in edges:
                raise TopologyError(f"duplicate edge {u}-{v}", lineno)
            edges[key] = (cost, delay)
        else:
            raise TopologyError(f"unknown statement {keyword!r}", lineno)

    if num_nodes is None:
        raise TopologyError("missing 'nodes <N>' header")
    g = NetworkGraph(num_nodes, edges, frozenset(mc))
    validate(g)
    return g


def serialize_topology(g: NetworkGraph) -> str:
    lines = [f"nodes {g.num_nodes}"]
    if g.mc:
        lines.append("mc " + " ".join(map(str, sorted(g.mc))))
    for (u, v), (cost, delay) in sorted(g.edges.items()):
        if cost == 1 and delay == 1:
            lines.append(f"edge {u} {v}")
        else:
            lines.append(f"edge {u} {v} {cost} {delay}")
    return "\n".join(lines) + "\n"


def reachable(g: NetworkGraph, start: int, removed: Iterable[int] = ()) -> Set[int]:
    """Nodes reachable from ``start`` once ``removed`` nodes are deleted."""
    blocked = set(removed)
    if start in blocked:
        return set()
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for y in g.adjacency[x]:
            if y not in seen and y not in blocked:
                seen.add(y)
                queue.append(y)
    return seen


def distances(
    g: NetworkGraph,
    source: int,
    metric: str = "cost",
    allowed: Optional[Set[int]] = None,
) -> Dict[int, Weight]:
    """Single-source shortest distances, optionally restricted to ``allowed`` nodes."""
    dist: Dict[int, Weight] = {source: 0}
    heap = [(0, source)]
    done: Set[int] = set()
    while heap:
        d, x = heapq.heappop(heap)
        if x in done:
            continue
        done.add(x)
        for y, w in g.weighted_neighbors(x, metric):
            if allowed is not None and y not in allowed:
                continue
            nd = d + w
            if y not in dist or nd < dist[y]:
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    return dist


def greedy_path(
    g: NetworkGraph,
    start: int,
    to_target: Mapping[int, Weight],
    metric: str,
) -> List[int]:
    """Walk from ``start`` to the zero of ``to_target`` along tight edges.

    ``to_target`` holds distances to the target.  Taking the smallest tight
    neighbour at every step yields the lexicographically smallest shortest path.
    """
    path = [start]
    x = start
    while to_target[x] != 0:
        x = min(
            y for y, w in g.weighted_neighbors(x, metric)
            if y in to_target and to_target[y] + w == to_target[x]
        )
        path.append(x)
    return path


def shortest_path(g: NetworkGraph, u: int, v: int, metric: str = "cost") -> Tuple[List[int], Weight]:
    """Shortest ``u``-``v`` path; ties go to the lexicographically smallest node sequence."""
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}")
    to_v = distances(g, v, metric)
    return greedy_path(g, u, to_v, metric), to_v[u]


@dataclass(frozen=True)
class ArticulationReport:
    """``separators[u]``: nodes whose removal cuts ``u`` off from the source."""

    source: int
    separators: Mapping[int, FrozenSet[int]]

    def is_cc(self, u: int) -> bool:
        return bool(self.separators[u])


def articulation_analysis(g: NetworkGraph, s: int, targets: Iterable[int]) -> ArticulationReport:
    targets = sorted(set(targets) - {s})
    found: Dict[int, Set[int]] = {u: set() for u in targets}
    for x in g.nodes:
        if x == s:
            continue
        side = reachable(g, s, removed=(x,))
        for u in targets:
            if u != x and u not in side:
                found[u].add(x)
    return ArticulationReport(s, {u: frozenset(found[u]) for u in targets})
