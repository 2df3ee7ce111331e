"""Processing of multicast-incapable branching (MIB) nodes in a pruned SPT.

``MIBPro`` keeps one branch per MIB node, chosen by the critical
articulation rule (a branch holding a destination that cannot reach the
source without the MIB node) and the deepest-branch rule.  ``MIBPro2``
drops every downstream branch of every MIB node.  Both cut the dropped
destinations loose for later reconnection.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Collection, Dict, FrozenSet, List, Optional, Tuple

from .network import NetworkGraph, Weight, articulation_analysis
from .spt import SptTree, prune_spt


class MibMode(str, enum.Enum):
    MIBPRO = "MIBPro"
    MIBPRO2 = "MIBPro2"
    LOWEST_ID = "lowest-id"  # keep the lowest-id branch (Reroute-to-Any)


class Rule(str, enum.Enum):
    DEEPEST = "no-CC -> deepest"
    ONE_CC = "one-CC -> that branch"
    MULTI_CC = "multi-CC -> deepest-with-CC"
    DELETE_ALL = "mibpro2-delete-all"
    LOWEST_ID = "lowest-id"


@dataclass(frozen=True)
class MibDecision:
    mib: int
    kept_branch: Optional[int]
    rule_fired: Rule


@dataclass(frozen=True)
class CutResult:
    subtree: SptTree
    cut_destinations: FrozenSet[int]
    decisions: Tuple[MibDecision, ...]


def branch_depth(t: SptTree, mib: int, child: int) -> Weight:
    """Largest tree distance from ``mib`` to a node in the branch under ``child``."""
    return max(t.dist[v] for v in t.subtree(child)) - t.dist[mib]


def _deepest(t: SptTree, mib: int, branches: List[int]) -> int:
    # max depth, then smaller child id
    return min(branches, key=lambda c: (-branch_depth(t, mib, c), c))


def process_mib_nodes(
    t: SptTree,
    g: NetworkGraph,
    s: int,
    dests: Collection[int],
    mode: MibMode = MibMode.MIBPRO,
) -> CutResult:
    """Remove every MIB node from a pruned SPT, top-down from the root."""
    mode = MibMode(mode)
    if t.root != s:
        raise ValueError(f"tree is rooted at {t.root}, not at source {s}")
    dests = frozenset(dests)
    parent: Dict[int, Optional[int]] = dict(t.parent)
    separators = None
    if mode is MibMode.MIBPRO:
        separators = articulation_analysis(g, s, dests & t.nodes).separators

    decisions: List[MibDecision] = []
    cut = set()
    queue = [s]
    i = 0
    while i < len(queue):
        m = queue[i]
        i += 1
        kids = t.children(m)
        if len(kids) < 2 or g.is_mc(m):
            queue.extend(kids)
            continue
        if mode is MibMode.MIBPRO2:
            keep: Optional[int] = None
            rule = Rule.DELETE_ALL
        elif mode is MibMode.LOWEST_ID:
            keep, rule = kids[0], Rule.LOWEST_ID
        else:
            with_cc = [
                c for c in kids
                if any(m in separators.get(u, ()) for u in t.subtree(c) if u in dests)
            ]
            if not with_cc:
                keep, rule = _deepest(t, m, list(kids)), Rule.DEEPEST
            elif len(with_cc) == 1:
                keep, rule = with_cc[0], Rule.ONE_CC
            else:
                keep, rule = _deepest(t, m, with_cc), Rule.MULTI_CC
        decisions.append(MibDecision(m, keep, rule))
        for c in kids:
            if c == keep:
                queue.append(c)
                continue
            for v in t.subtree(c):
                del parent[v]
                if v in dests:
                    cut.add(v)

    kept = SptTree(s, parent, {v: t.dist[v] for v in parent})
    served = dests & kept.nodes
    return CutResult(prune_spt(kept, served), frozenset(cut), tuple(decisions))
