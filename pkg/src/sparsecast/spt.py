"""Shortest-path trees: classic Dijkstra, DijkstraPro, pruning and MIB census.

DijkstraPro labels the tentative nodes of one distance *level* together.
Within a level MC nodes are labeled first, then MI nodes by ascending
graph degree, then by id.  Once a level is labeled, MI members holding two
or more children hand children over to childless members of the same level
whenever the shortest-path property allows it (node adoption).
"""
from __future__ import annotations

import heapq
import random
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Collection, Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

from .network import Edge, NetworkGraph, Weight, edge_key


@dataclass(frozen=True)
class SptTree:
    root: int
    parent: Mapping[int, Optional[int]]
    dist: Mapping[int, Weight]
    _children: Mapping[int, Tuple[int, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        kids: Dict[int, List[int]] = {v: [] for v in self.parent}
        for v, p in self.parent.items():
            if p is not None:
                kids[p].append(v)
        object.__setattr__(self, "_children", {v: tuple(sorted(c)) for v, c in kids.items()})

    @property
    def nodes(self) -> FrozenSet[int]:
        return frozenset(self.parent)

    def children(self, v: int) -> Tuple[int, ...]:
        return self._children[v]

    def edges(self) -> List[Edge]:
        return sorted(edge_key(v, p) for v, p in self.parent.items() if p is not None)

    def path(self, v: int) -> List[int]:
        """Tree path from the root to ``v``."""
        out = [v]
        while self.parent[out[-1]] is not None:
            out.append(self.parent[out[-1]])
        return out[::-1]

    def subtree(self, v: int) -> List[int]:
        """Nodes of the branch rooted at ``v`` in BFS order."""
        out = [v]
        i = 0
        while i < len(out):
            out.extend(self._children[out[i]])
            i += 1
        return out

    def bfs(self) -> List[int]:
        return self.subtree(self.root)

    def leaves(self) -> FrozenSet[int]:
        return frozenset(v for v, c in self._children.items() if not c and v != self.root)


@dataclass(frozen=True)
class MibCensus:
    mib_nodes: FrozenSet[int]
    out_degree: Mapping[int, int]

    @property
    def count(self) -> int:
        return len(self.mib_nodes)


def random_rank(nodes: Iterable[int], seed: int) -> Dict[int, int]:
    """A seeded random labeling order, for Monte-Carlo spread over Dijkstra ties."""
    order = sorted(nodes)
    random.Random(seed).shuffle(order)
    return {v: i for i, v in enumerate(order)}


def dijkstra_spt(
    g: NetworkGraph,
    s: int,
    metric: str = "delay",
    rank: Optional[Mapping[int, int]] = None,
) -> SptTree:
    """Full shortest-path tree rooted at ``s``.

    Ties between equal-distance tentative nodes, and between equal-length
    parents, go to the smaller ``rank`` (node id by default).
    """
    key = rank if rank is not None else {v: v for v in g.nodes}
    dist: Dict[int, Weight] = {s: 0}
    parent: Dict[int, Optional[int]] = {s: None}
    heap = [(0, key[s], s)]
    done = set()
    while heap:
        d, _, x = heapq.heappop(heap)
        if x in done:
            continue
        done.add(x)
        for y, w in g.weighted_neighbors(x, metric):
            if y in done:
                continue
            nd = d + w
            if y not in dist or nd < dist[y]:
                dist[y] = nd
                parent[y] = x
                heapq.heappush(heap, (nd, key[y], y))
            elif nd == dist[y] and key[x] < key[parent[y]]:
                parent[y] = x
    return SptTree(s, parent, dist)


def adopt_children(
    parent: Dict[int, Optional[int]],
    dist: Mapping[int, Weight],
    level: Collection[int],
    g: NetworkGraph,
    dests: Collection[int],
    metric: str = "delay",
) -> List[Tuple[int, int, int]]:
    """Move children from MI level members with >= 2 children to childless ones.

    Mutates ``parent`` in place and returns the moves as
    ``(child, old_parent, new_parent)``.  A child ``c`` may move to ``y`` only
    if ``y`` is adjacent to ``c`` and ``dist[y] + w(y, c) == dist[c]``.
    Destination children move first; an MI adopter takes one child at most.
    """
    members = sorted(level)
    in_level = set(members)
    kids: Dict[int, List[int]] = {x: [] for x in members}
    for c, p in parent.items():
        if p in in_level:
            kids[p].append(c)
    adopters = [y for y in members if not kids[y]]
    taken = Counter()
    moves = []
    while True:
        move = None
        for x in members:
            if g.is_mc(x) or len(kids[x]) < 2:
                continue
            for c in sorted(kids[x], key=lambda c: (c not in dests, c)):
                for y in adopters:
                    if not g.is_mc(y) and taken[y] >= 1:
                        continue
                    if g.has_edge(y, c) and dist[y] + g.weight(y, c, metric) == dist[c]:
                        move = (c, x, y)
                        break
                if move:
                    break
            if move:
                break
        if move is None:
            return moves
        c, x, y = move
        parent[c] = y
        kids[x].remove(c)
        kids[y].append(c)
        taken[y] += 1
        moves.append(move)


def dijkstra_pro_spt(
    g: NetworkGraph,
    s: int,
    dests: Collection[int] = (),
    metric: str = "delay",
    priority: bool = True,
    adoption: bool = True,
) -> SptTree:
    """Level-synchronous Dijkstra with MC/low-degree priority and node adoption.

    With ``priority=False`` a level is labeled in plain id order.  The distance
    map always equals the one of :func:`dijkstra_spt`; only the shape differs.
    """
    dests = frozenset(dests)

    def order(v: int):
        if not priority:
            return (v,)
        if g.is_mc(v):
            return (0, 0, v)
        return (1, g.degree(v), v)

    dist: Dict[int, Weight] = {s: 0}
    parent: Dict[int, Optional[int]] = {s: None}
    tentative: Dict[int, Weight] = {s: 0}
    while tentative:
        dmin = min(tentative.values())
        level = sorted((v for v, d in tentative.items() if d == dmin), key=order)
        for x in level:
            del tentative[x]
        labeled = set(dist) - set(tentative)
        for x in level:
            for y, w in g.weighted_neighbors(x, metric):
                if y in labeled:
                    continue
                nd = dmin + w
                if y not in dist or nd < dist[y]:
                    dist[y] = nd
                    parent[y] = x
                    tentative[y] = nd
        if adoption and len(level) > 1:
            adopt_children(parent, dist, level, g, dests, metric)
    return SptTree(s, parent, dist)


def prune_spt(t: SptTree, dests: Iterable[int]) -> SptTree:
    """Smallest subtree containing the root and every destination."""
    keep = {t.root}
    for d in dests:
        v = d
        while v not in keep:
            keep.add(v)
            v = t.parent[v]
    return SptTree(t.root, {v: t.parent[v] for v in keep}, {v: t.dist[v] for v in keep})


def mib_census(t: SptTree, g: NetworkGraph) -> MibCensus:
    degree = {v: len(t.children(v)) for v in t.nodes}
    return MibCensus(frozenset(v for v, k in degree.items() if k >= 2 and not g.is_mc(v)), degree)


def split_at_mib_nodes(t: SptTree, g: NetworkGraph) -> List[Tuple[Dict[int, Optional[int]], List[int]]]:
    """Reroute-to-source decomposition of a tree into MI-valid trees.

    Every MIB node keeps its lowest-id child; each other child's branch is
    served on a fresh tree made of the root-to-MIB path plus that branch,
    which is split again recursively.  Returns ``(parent_map, own_nodes)``
    per tree, ``own_nodes`` being the branch part (excluding the prefix).
    """
    out = []
    queue = deque([t.root])
    while queue:
        top = queue.popleft()
        prefix = t.path(top)
        parent: Dict[int, Optional[int]] = {v: t.parent[v] for v in prefix}
        own = [top]
        i = 0
        while i < len(own):
            x = own[i]
            kids = t.children(x)
            if len(kids) >= 2 and not g.is_mc(x):
                queue.extend(kids[1:])
                kids = kids[:1]
            for c in kids:
                parent[c] = x
                own.append(c)
            i += 1
        out.append((parent, own))
    return out


def spt_link_stress(t: SptTree, g: NetworkGraph) -> int:
    """Max number of decomposed trees sharing one fiber (S)."""
    load: Counter = Counter()
    for parent, _ in split_at_mib_nodes(t, g):
        load.update(edge_key(v, p) for v, p in parent.items() if p is not None)
    return max(load.values(), default=1)
