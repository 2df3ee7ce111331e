"""Bundled reference topologies (NSFNET-14 and USA Longhaul-28)."""
from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Callable, Dict, Union

from .network import NetworkGraph, TopologyError, parse_topology


def _check_nsf(g: NetworkGraph) -> None:
    if g.num_nodes != 14:
        raise TopologyError(f"NSF topology must have 14 nodes, got {g.num_nodes}")
    high = {v for v in g.nodes if g.degree(v) >= 4}
    if high != {6, 10} or g.degree(6) != 4 or g.degree(10) != 4:
        raise TopologyError(f"NSF topology: nodes 6 and 10 must be the degree-4 nodes, got {sorted(high)}")


LONGHAUL_HIGH_DEGREE = frozenset({10, 12, 13, 14, 15, 18, 21, 26})


def _check_longhaul(g: NetworkGraph) -> None:
    if g.num_nodes != 28:
        raise TopologyError(f"Longhaul topology must have 28 nodes, got {g.num_nodes}")
    high = {v for v in g.nodes if g.degree(v) >= 4}
    if high != LONGHAUL_HIGH_DEGREE:
        raise TopologyError(
            f"Longhaul topology: degree>=4 nodes must be {sorted(LONGHAUL_HIGH_DEGREE)}, got {sorted(high)}"
        )


CHECKS: Dict[str, Callable[[NetworkGraph], None]] = {"nsf": _check_nsf, "longhaul": _check_longhaul}


def builtin_text(name: str) -> str:
    if name not in CHECKS:
        raise TopologyError(f"no bundled topology named {name!r}; choose from {sorted(CHECKS)}")
    return resources.files("sparsecast").joinpath("data").joinpath(f"{name}.topo").read_text(encoding="utf-8")


def load_builtin(name: str) -> NetworkGraph:
    g = parse_topology(builtin_text(name))
    CHECKS[name](g)
    return g


def nsf() -> NetworkGraph:
    return load_builtin("nsf")


def longhaul() -> NetworkGraph:
    return load_builtin("longhaul")


def load_topology(ref: Union[str, Path]) -> NetworkGraph:
    """Load a topology from a file path, falling back to a bundled name.

    ``nsf``, ``nsf.topo``, ``longhaul`` and ``longhaul.topo`` resolve to the
    bundled files unless a file of that name exists.  Files whose stem names a
    bundled topology are held to that topology's degree facts.
    """
    path = Path(ref)
    if path.is_file():
        g = parse_topology(path.read_text(encoding="utf-8"))
        check = CHECKS.get(path.stem.lower())
        if check is not None:
            check(g)
        return g
    stem = path.name[:-5] if path.name.endswith(".topo") else path.name
    if stem in CHECKS and path.parent == Path("."):
        return load_builtin(stem)
    raise TopologyError(f"topology file not found: {ref}")
