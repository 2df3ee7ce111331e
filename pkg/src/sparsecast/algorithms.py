"""End-to-end session algorithms.

* ``MIBPro`` / ``MIBPro2``: DijkstraPro SPT, MIB processing, distance-based
  reconnection of the cut destinations.
* ``R2S`` (Reroute-to-Source): plain SPT; every MIB node keeps its lowest-id
  child and each other child branch is served over its own shortest path on
  a fresh wavelength.
* ``R2A`` (Reroute-to-Any): plain SPT, lowest-id branch kept, cut
  destinations reconnected greedily (nearest SCP first, smallest-id ties).
* ``MO`` (Member-Only): the same greedy reconnection starting from ``{s}``.
"""
from __future__ import annotations

import enum
from typing import Callable, Dict

from .forest import LightForest, LightTree, MulticastSession, reconnect
from .mib import MibMode, process_mib_nodes
from .network import NetworkGraph
from .spt import dijkstra_pro_spt, dijkstra_spt, prune_spt, split_at_mib_nodes


class AlgorithmId(str, enum.Enum):
    MIBPRO = "MIBPro"
    MIBPRO2 = "MIBPro2"
    R2S = "R2S"
    R2A = "R2A"
    MO = "MO"


def pipeline(
    g: NetworkGraph,
    ms: MulticastSession,
    pro: bool = True,
    mode: MibMode = MibMode.MIBPRO,
    distance_ties: bool = True,
) -> LightForest:
    """SPT -> prune -> MIB processing -> reconnection, with every stage switchable."""
    ms.check(g)
    s, dests = ms.source, ms.dests
    spt = dijkstra_pro_spt(g, s, dests) if pro else dijkstra_spt(g, s)
    cut = process_mib_nodes(prune_spt(spt, dests), g, s, dests, mode)
    sub = cut.subtree
    seed = LightTree(s, dict(sub.parent), dests & sub.nodes)
    trees = reconnect(g, s, seed, cut.cut_destinations, distance_ties=distance_ties)
    return LightForest(ms, tuple(trees))


def mibpro(g: NetworkGraph, ms: MulticastSession) -> LightForest:
    return pipeline(g, ms, mode=MibMode.MIBPRO)


def mibpro2(g: NetworkGraph, ms: MulticastSession) -> LightForest:
    return pipeline(g, ms, mode=MibMode.MIBPRO2)


def reroute_to_any(g: NetworkGraph, ms: MulticastSession) -> LightForest:
    return pipeline(g, ms, pro=False, mode=MibMode.LOWEST_ID, distance_ties=False)


def reroute_to_source(g: NetworkGraph, ms: MulticastSession) -> LightForest:
    ms.check(g)
    t = prune_spt(dijkstra_spt(g, ms.source), ms.dests)
    trees = tuple(
        LightTree(ms.source, parent, ms.dests.intersection(own))
        for parent, own in split_at_mib_nodes(t, g)
    )
    return LightForest(ms, trees)


def member_only(g: NetworkGraph, ms: MulticastSession) -> LightForest:
    ms.check(g)
    return LightForest(ms, tuple(reconnect(g, ms.source, None, ms.dests, distance_ties=False)))


ALGORITHMS: Dict[AlgorithmId, Callable[[NetworkGraph, MulticastSession], LightForest]] = {
    AlgorithmId.MIBPRO: mibpro,
    AlgorithmId.MIBPRO2: mibpro2,
    AlgorithmId.R2S: reroute_to_source,
    AlgorithmId.R2A: reroute_to_any,
    AlgorithmId.MO: member_only,
}


def run_algorithm(algo, g: NetworkGraph, ms: MulticastSession) -> LightForest:
    return ALGORITHMS[AlgorithmId(algo)](g, ms)
