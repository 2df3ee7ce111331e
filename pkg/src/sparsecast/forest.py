"""Light-trees, constrained-path reconnection and session metrics.

A session ``(s, D)`` is served by a *light forest*: ``k`` light-trees rooted
at ``s``, one wavelength each.  Inside a light-tree an MI node may forward
on one output only, so it has at most one child.

Reconnection grows a tree through *connector* nodes (MC nodes and leaf MI
nodes).  Non-leaf MI nodes are blocked for both attachment and transit.
The shortest constrained path (SCP) from a destination to the tree ends at
a connector and crosses only nodes outside the tree.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from .network import Edge, NetworkGraph, Weight, distances, edge_key, greedy_path


class InvariantError(RuntimeError):
    """A light forest (or intermediate structure) broke a structural invariant."""


@dataclass(frozen=True)
class MulticastSession:
    source: int
    dests: FrozenSet[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "dests", frozenset(self.dests))

    def check(self, g: NetworkGraph) -> None:
        if not self.dests:
            raise ValueError("a multicast session needs at least one destination")
        if self.source in self.dests:
            raise ValueError(f"source {self.source} cannot also be a destination")
        unknown = sorted(v for v in self.dests | {self.source} if not 1 <= v <= g.num_nodes)
        if unknown:
            raise ValueError(f"unknown node id(s) in session: {unknown}")


@dataclass(frozen=True)
class LightTree:
    root: int
    parent: Mapping[int, Optional[int]]
    served: FrozenSet[int]

    @property
    def nodes(self) -> FrozenSet[int]:
        return frozenset(self.parent)

    def edges(self) -> List[Edge]:
        return sorted(edge_key(v, p) for v, p in self.parent.items() if p is not None)

    def children(self) -> Dict[int, List[int]]:
        kids: Dict[int, List[int]] = {v: [] for v in self.parent}
        for v, p in self.parent.items():
            if p is not None:
                kids[p].append(v)
        for c in kids.values():
            c.sort()
        return kids

    def path(self, v: int) -> List[int]:
        out = [v]
        while self.parent[out[-1]] is not None:
            out.append(self.parent[out[-1]])
        return out[::-1]

    def cost(self, g: NetworkGraph) -> Weight:
        return sum((g.cost(u, v) for u, v in self.edges()), 0)

    def delay_to(self, v: int, g: NetworkGraph) -> Weight:
        total: Weight = 0
        while self.parent[v] is not None:
            total += g.delay(v, self.parent[v])
            v = self.parent[v]
        return total


@dataclass(frozen=True)
class LightForest:
    session: MulticastSession
    trees: Tuple[LightTree, ...]

    @property
    def stress(self) -> int:
        return len(self.trees)

    def tree_serving(self, d: int) -> LightTree:
        for t in self.trees:
            if d in t.served:
                return t
        raise InvariantError(f"destination {d} is not served by any light-tree")


@dataclass(frozen=True)
class MetricsReport:
    stress: int
    total_cost: Weight
    aver_delay: Fraction
    max_delay: Weight

    def line(self) -> str:
        return (
            f"stress={self.stress} cost={self.total_cost} "
            f"aver_delay={self.aver_delay} max_delay={self.max_delay}"
        )


def destination_delays(f: LightForest, g: NetworkGraph) -> Dict[int, Weight]:
    return {d: f.tree_serving(d).delay_to(d, g) for d in sorted(f.session.dests)}


def metrics(f: LightForest, g: NetworkGraph) -> MetricsReport:
    delays = destination_delays(f, g)
    return MetricsReport(
        stress=f.stress,
        total_cost=sum((t.cost(g) for t in f.trees), 0),
        aver_delay=Fraction(sum(delays.values(), 0), len(delays)),
        max_delay=max(delays.values()),
    )


def link_stress_per_fiber(f: LightForest) -> int:
    """Largest number of light-trees sharing one fiber link."""
    load: Dict[Edge, int] = {}
    for t in f.trees:
        for e in t.edges():
            load[e] = load.get(e, 0) + 1
    return max(load.values(), default=0)


def validate_forest(f: LightForest, g: NetworkGraph) -> None:
    """Raise InvariantError unless ``f`` is a valid light forest for its session."""
    s = f.session.source
    seen: Set[int] = set()
    if not f.trees:
        raise InvariantError("forest has no light-trees")
    for i, t in enumerate(f.trees, start=1):
        if t.root != s or t.parent.get(s, 0) is not None:
            raise InvariantError(f"tree {i} is not rooted at source {s}")
        for v, p in t.parent.items():
            if p is None:
                if v != s:
                    raise InvariantError(f"tree {i}: node {v} has no parent")
                continue
            if p not in t.parent:
                raise InvariantError(f"tree {i}: parent {p} of {v} is not in the tree")
            if not g.has_edge(v, p):
                raise InvariantError(f"tree {i}: {p}-{v} is not a fiber link")
        for v in t.parent:
            hops = 0
            while v is not None:
                v = t.parent[v]
                hops += 1
                if hops > len(t.parent):
                    raise InvariantError(f"tree {i} contains a cycle")
        for v, kids in t.children().items():
            if len(kids) > 1 and not g.is_mc(v):
                raise InvariantError(f"tree {i}: MI node {v} splits to {kids}")
        if not t.served:
            raise InvariantError(f"tree {i} serves no destination")
        if not t.served <= t.nodes:
            raise InvariantError(f"tree {i} serves nodes outside the tree: {sorted(t.served - t.nodes)}")
        if t.served & seen:
            raise InvariantError(f"destinations {sorted(t.served & seen)} served twice")
        seen |= t.served
    if seen != f.session.dests:
        raise InvariantError(
            f"served set mismatch: missing {sorted(f.session.dests - seen)}, extra {sorted(seen - f.session.dests)}"
        )


def serialize_forest(f: LightForest) -> str:
    """One line per tree: ``tree <i>: edge <parent>-<child> ...; serves <d,...>``."""
    lines = []
    for i, t in enumerate(f.trees, start=1):
        kids = t.children()
        order = [t.root]
        for v in order:
            order.extend(kids[v])
        edges = " ".join(f"{t.parent[v]}-{v}" for v in order[1:])
        served = ",".join(map(str, sorted(t.served)))
        lines.append(f"tree {i}: edge {edges}; serves {served}")
    return "\n".join(lines) + "\n"


def parse_forest(text: str, source: int) -> LightForest:
    trees = []
    for line in text.strip().splitlines():
        head, _, rest = line.partition(":")
        edge_part, _, serve_part = rest.partition(";")
        tokens = edge_part.split()
        if not head.startswith("tree") or not tokens or tokens[0] != "edge":
            raise ValueError(f"malformed forest line: {line!r}")
        parent: Dict[int, Optional[int]] = {source: None}
        for tok in tokens[1:]:
            u, v = map(int, tok.split("-"))
            parent[v] = u
        served = frozenset(int(x) for x in serve_part.replace("serves", "").split(",") if x.strip())
        trees.append(LightTree(source, parent, served))
    dests = frozenset().union(*(t.served for t in trees))
    return LightForest(MulticastSession(source, dests), tuple(trees))


@dataclass
class ReconnectionState:
    """A light-tree under construction plus its connector/blocked node split."""

    g: NetworkGraph
    source: int
    parent: Dict[int, Optional[int]]
    tree_delay: Dict[int, Weight]
    mc_set: Set[int]
    mi_set: Set[int]
    served: Set[int] = field(default_factory=set)
    remaining: Set[int] = field(default_factory=set)

    @classmethod
    def fresh(cls, g: NetworkGraph, s: int, remaining: Iterable[int]) -> "ReconnectionState":
        return cls(g, s, {s: None}, {s: 0}, {s}, set(), set(), set(remaining))

    @classmethod
    def from_tree(cls, g: NetworkGraph, tree: LightTree, remaining: Iterable[int]) -> "ReconnectionState":
        kids = tree.children()
        state = cls(g, tree.root, dict(tree.parent), {}, set(), set(), set(tree.served), set(remaining))
        for v in tree.parent:
            state.tree_delay[v] = tree.delay_to(v, g)
            if g.is_mc(v) or not kids[v]:
                state.mc_set.add(v)
            else:
                state.mi_set.add(v)
        return state

    def attach(self, path: Sequence[int]) -> None:
        """Graft ``path`` (destination first, connector last) onto the tree."""
        d, c = path[0], path[-1]
        if c not in self.mc_set:
            raise InvariantError(f"node {c} is not a connector")
        for child, par in zip(reversed(path[:-1]), reversed(path[1:])):
            if child in self.parent:
                raise InvariantError(f"path re-enters the tree at {child}")
            self.parent[child] = par
            self.tree_delay[child] = self.tree_delay[par] + self.g.delay(child, par)
        for v in path[1:-1]:
            (self.mc_set if self.g.is_mc(v) else self.mi_set).add(v)
        self.mc_set.add(d)
        if not self.g.is_mc(c):
            self.mc_set.discard(c)
            self.mi_set.add(c)
        hit = self.remaining.intersection(path[:-1])
        self.remaining -= hit
        self.served |= hit

    def tree(self) -> LightTree:
        return LightTree(self.source, dict(self.parent), frozenset(self.served))


@dataclass(frozen=True)
class Scp:
    """All minimal constrained paths from one node to the tree."""

    length: Weight
    options: Tuple[Tuple[int, Tuple[int, ...]], ...]  # (connector, path u..connector)

    @property
    def connectors(self) -> Tuple[int, ...]:
        return tuple(c for c, _ in self.options)


def _distances_to_tree(state: ReconnectionState, metric: str) -> Dict[int, Weight]:
    """Constrained distance from every off-tree node to its nearest connector."""
    g, tree = state.g, state.parent
    dist: Dict[int, Weight] = {c: 0 for c in state.mc_set}
    heap = [(0, c) for c in sorted(state.mc_set)]
    done: Set[int] = set()
    while heap:
        d, x = heapq.heappop(heap)
        if x in done:
            continue
        done.add(x)
        for y, w in g.weighted_neighbors(x, metric):
            if y in tree:
                continue
            nd = d + w
            if y not in dist or nd < dist[y]:
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    return dist


def scp(u: int, state: ReconnectionState, metric: str = "cost") -> Optional[Scp]:
    """Shortest constrained paths from ``u`` (off-tree) to any connector."""
    g, tree = state.g, state.parent
    if u in tree:
        raise ValueError(f"node {u} is already in the tree")
    off_tree = set(g.nodes) - set(tree)
    # interior nodes must be off-tree; connectors are terminals only
    dist: Dict[int, Weight] = {u: 0}
    heap = [(0, u)]
    done: Set[int] = set()
    while heap:
        d, x = heapq.heappop(heap)
        if x in done:
            continue
        done.add(x)
        if x in tree:
            continue
        for y, w in g.weighted_neighbors(x, metric):
            if y in tree and y not in state.mc_set:
                continue
            nd = d + w
            if y not in dist or nd < dist[y]:
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    reached = [c for c in state.mc_set if c in dist]
    if not reached:
        return None
    best = min(dist[c] for c in reached)
    options = []
    for c in sorted(c for c in reached if dist[c] == best):
        to_c = distances(g, c, metric, allowed=off_tree | {c})
        options.append((c, tuple(greedy_path(g, u, to_c, metric))))
    return Scp(best, tuple(options))


def reconnect(
    g: NetworkGraph,
    s: int,
    seed_tree: Optional[LightTree],
    remaining: Iterable[int],
    distance_ties: bool = True,
) -> List[LightTree]:
    """Grow light-trees until every remaining destination is served.

    Each step attaches the destination with the shortest SCP.  With
    ``distance_ties`` (the distance-based variant) equal SCPs are broken by
    the destination's network delay from ``s`` and equal connectors by their
    delay from ``s`` inside the tree; any remaining tie, or every tie when
    ``distance_ties`` is off, goes to the smallest node id.
    """
    remaining = set(remaining)
    state = (
        ReconnectionState.from_tree(g, seed_tree, remaining)
        if seed_tree is not None
        else ReconnectionState.fresh(g, s, remaining)
    )
    state.remaining -= state.served
    from_source = distances(g, s, "delay") if distance_ties else {}
    trees: List[LightTree] = []
    while state.remaining:
        to_tree = _distances_to_tree(state, "cost")
        candidates = [d for d in state.remaining if d in to_tree]
        if not candidates:
            if len(state.parent) == 1:
                raise InvariantError(f"destinations {sorted(state.remaining)} unreachable from {s}")
            if state.served:
                trees.append(state.tree())
            state = ReconnectionState.fresh(g, s, state.remaining)
            continue
        if distance_ties:
            d = min(candidates, key=lambda v: (to_tree[v], from_source[v], v))
        else:
            d = min(candidates, key=lambda v: (to_tree[v], v))
        found = scp(d, state)
        if distance_ties:
            c, path = min(found.options, key=lambda o: (state.tree_delay[o[0]], o[0]))
        else:
            c, path = found.options[0]
        state.attach(path)
    if state.served:
        trees.append(state.tree())
    return trees
