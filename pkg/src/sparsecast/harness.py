"""Experiment driver: SPT comparison tables and group-size / MC-count sweeps.

Randomness comes from numpy's PCG64 seeded through ``SeedSequence``.  Every
session draws from its own stream, keyed by
``(purpose, x_value, source, session_index)`` under the experiment seed, so
results do not depend on evaluation order or on the number of workers.
"""
from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .algorithms import AlgorithmId, run_algorithm
from .forest import MulticastSession, metrics, validate_forest
from .network import NetworkGraph
from .spt import dijkstra_pro_spt, dijkstra_spt, mib_census, prune_spt, spt_link_stress

STREAM_DESTS = 1
STREAM_MC = 2

CSV_COLUMNS = ["x", "algorithm", "mean_stress", "mean_cost", "mean_aver_delay", "mean_max_delay", "n"]


class ConfigError(ValueError):
    pass


def session_rng(seed: int, purpose: int, x: int, source: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(purpose, x, source, index)))


@dataclass(frozen=True)
class McPolicy:
    """How MC nodes are placed: ``source``, ``explicit:<ids>``, ``degree:<k>`` or ``random:<count>``.

    The session source is always MC.  ``random:<count>`` places ``count`` MC
    nodes in total (source included), the others uniformly at random per session.
    """

    kind: str
    values: Tuple[int, ...] = ()

    @classmethod
    def parse(cls, text: str) -> "McPolicy":
        kind, _, rest = text.strip().partition(":")
        kind = kind.strip().lower()
        try:
            values = tuple(int(v) for v in rest.replace(",", " ").split())
        except ValueError:
            raise ConfigError(f"bad MC policy {text!r}") from None
        if kind == "source" and not values:
            return cls(kind)
        if kind == "explicit":
            return cls(kind, values)
        if kind in ("degree", "random") and len(values) == 1 and values[0] >= 0:
            return cls(kind, values)
        raise ConfigError(f"bad MC policy {text!r}; use source, explicit:<ids>, degree:<k> or random:<count>")

    def __str__(self) -> str:
        if not self.values:
            return self.kind
        return f"{self.kind}:" + ",".join(map(str, self.values))

    def mc_set(self, g: NetworkGraph, source: int, rng: Optional[np.random.Generator] = None) -> frozenset:
        if self.kind == "source":
            chosen: Iterable[int] = ()
        elif self.kind == "explicit":
            chosen = self.values
        elif self.kind == "degree":
            chosen = [v for v in g.nodes if g.degree(v) >= self.values[0]]
        else:
            chosen = random_mc_set(g, source, self.values[0], rng)
        return frozenset(chosen) | {source}


def random_mc_set(g: NetworkGraph, source: int, count: int, rng: np.random.Generator) -> frozenset:
    if not 1 <= count <= g.num_nodes:
        raise ConfigError(f"MC count must be in 1..{g.num_nodes}, got {count}")
    others = np.array([v for v in g.nodes if v != source])
    picked = rng.choice(others, size=count - 1, replace=False)
    return frozenset(int(v) for v in picked) | {source}


@dataclass
class ExperimentConfig:
    topology: str
    mc_policy: McPolicy = field(default_factory=lambda: McPolicy("source"))
    group_sizes: List[int] = field(default_factory=list)
    sessions_per_source: int = 100
    seed: int = 0
    algorithms: List[AlgorithmId] = field(default_factory=lambda: list(AlgorithmId))
    mc_counts: List[int] = field(default_factory=list)
    out: Optional[str] = None

    def check(self, g: NetworkGraph) -> None:
        if self.sessions_per_source < 1:
            raise ConfigError("sessions_per_source must be >= 1")
        for k in self.group_sizes:
            if not 1 <= k <= g.num_nodes - 1:
                raise ConfigError(f"group size {k} outside 1..{g.num_nodes - 1}")
        for c in self.mc_counts:
            if not 1 <= c <= g.num_nodes:
                raise ConfigError(f"MC count {c} outside 1..{g.num_nodes}")
        if not self.algorithms:
            raise ConfigError("no algorithms selected")

    def echo(self) -> List[str]:
        return [
            f"topology = {self.topology}",
            f"seed = {self.seed}",
            f"sessions_per_source = {self.sessions_per_source}",
            f"group_sizes = {','.join(map(str, self.group_sizes))}",
            f"mc_policy = {self.mc_policy}",
            f"mc_counts = {','.join(map(str, self.mc_counts))}",
            f"algorithms = {','.join(a.value for a in self.algorithms)}",
            "group size counts destinations only (source excluded)",
        ]


def _int_list(text: str) -> List[int]:
    out: List[int] = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        lo, sep, hi = part.partition("-")
        if sep:
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def parse_config(text: str) -> ExperimentConfig:
    """Read a ``key = value`` config; ``#`` comments, lists as ``2,3,5-9``."""
    raw: Dict[str, str] = {}
    known = {"topology", "seed", "sessions_per_source", "group_sizes", "mc_policy", "mc_counts", "algorithms", "out"}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or key not in known:
            raise ConfigError(f"config line {lineno}: expected one of {sorted(known)} as 'key = value'")
        raw[key] = value.strip()
    if "topology" not in raw:
        raise ConfigError("config needs a 'topology' key")
    try:
        cfg = ExperimentConfig(topology=raw["topology"])
        if "seed" in raw:
            cfg.seed = int(raw["seed"])
        if "sessions_per_source" in raw:
            cfg.sessions_per_source = int(raw["sessions_per_source"])
        if "group_sizes" in raw:
            cfg.group_sizes = _int_list(raw["group_sizes"])
        if "mc_counts" in raw:
            cfg.mc_counts = _int_list(raw["mc_counts"])
        if "mc_policy" in raw:
            cfg.mc_policy = McPolicy.parse(raw["mc_policy"])
        if "algorithms" in raw:
            cfg.algorithms = [AlgorithmId(a.strip()) for a in raw["algorithms"].split(",") if a.strip()]
        cfg.out = raw.get("out")
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def generate_sessions(
    g: NetworkGraph,
    group_size: int,
    sessions_per_source: int,
    seed: int,
    sources: Optional[Iterable[int]] = None,
) -> List[Tuple[int, MulticastSession]]:
    """``sessions_per_source`` uniform destination sets for every source, keyed by index."""
    if not 1 <= group_size <= g.num_nodes - 1:
        raise ConfigError(f"group size {group_size} outside 1..{g.num_nodes - 1}")
    out = []
    for s in sources if sources is not None else g.nodes:
        others = np.array([v for v in g.nodes if v != s])
        for i in range(sessions_per_source):
            rng = session_rng(seed, STREAM_DESTS, group_size, s, i)
            dests = rng.choice(others, size=group_size, replace=False)
            out.append((i, MulticastSession(s, frozenset(int(v) for v in dests))))
    return out


@dataclass(frozen=True)
class SweepRow:
    x: int
    algorithm: AlgorithmId
    mean_stress: Fraction
    mean_cost: Fraction
    mean_aver_delay: Fraction
    mean_max_delay: Fraction
    n: int

    def csv_fields(self) -> List[str]:
        means = (self.mean_stress, self.mean_cost, self.mean_aver_delay, self.mean_max_delay)
        return [str(self.x), self.algorithm.value, *(f"{float(m):.6f}" for m in means), str(self.n)]


# Per-session result: (stress, cost, aver_delay, max_delay) per algorithm.
SessionResult = Tuple[Tuple[int, Fraction, Fraction, Fraction], ...]


def _evaluate_source(task) -> List[SessionResult]:
    g, source, x, seed, sessions_per_source, policy, mc_count, group_size, algorithms, check = task
    out = []
    sessions = generate_sessions(g, group_size, sessions_per_source, seed, sources=[source])
    for i, ms in sessions:
        if mc_count is not None:
            mc = random_mc_set(g, source, mc_count, session_rng(seed, STREAM_MC, x, source, i))
        else:
            mc = policy.mc_set(g, source, session_rng(seed, STREAM_MC, x, source, i))
        gs = g.with_mc(mc)
        row = []
        for algo in algorithms:
            f = run_algorithm(algo, gs, ms)
            if check:
                validate_forest(f, gs)
            m = metrics(f, gs)
            row.append((m.stress, Fraction(m.total_cost), m.aver_delay, Fraction(m.max_delay)))
        out.append(tuple(row))
    return out


def _map(fn, tasks: Sequence, jobs: int) -> List:
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def session_results(
    g: NetworkGraph, cfg: ExperimentConfig, x: int, group_size: int, mc_count: Optional[int], jobs: int = 1,
    check: bool = True,
) -> List[SessionResult]:
    """Per-session metrics at one sweep point, ordered by (source, session index)."""
    tasks = [
        (g, s, x, cfg.seed, cfg.sessions_per_source, cfg.mc_policy, mc_count, group_size, tuple(cfg.algorithms), check)
        for s in g.nodes
    ]
    return [r for chunk in _map(_evaluate_source, tasks, jobs) for r in chunk]


def summarize(x: int, algorithms: Sequence[AlgorithmId], results: Sequence[SessionResult]) -> List[SweepRow]:
    n = len(results)
    rows = []
    for k, algo in enumerate(algorithms):
        sums = [sum((Fraction(r[k][j]) for r in results), Fraction(0)) for j in range(4)]
        rows.append(SweepRow(x, AlgorithmId(algo), *(v / n for v in sums), n))
    return rows


def sweep_group_size(g: NetworkGraph, cfg: ExperimentConfig, jobs: int = 1, check: bool = True) -> List[SweepRow]:
    cfg.check(g)
    rows = []
    for k in cfg.group_sizes:
        rows.extend(summarize(k, cfg.algorithms, session_results(g, cfg, k, k, None, jobs, check)))
    return rows


def sweep_mc_count(g: NetworkGraph, cfg: ExperimentConfig, jobs: int = 1, check: bool = True) -> List[SweepRow]:
    cfg.check(g)
    if len(cfg.group_sizes) != 1:
        raise ConfigError("an MC-count sweep needs exactly one group size")
    if not cfg.mc_counts:
        raise ConfigError("an MC-count sweep needs mc_counts")
    rows = []
    for c in cfg.mc_counts:
        rows.extend(summarize(c, cfg.algorithms, session_results(g, cfg, c, cfg.group_sizes[0], c, jobs, check)))
    return rows


def sweep_csv(rows: Sequence[SweepRow], comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(r.csv_fields())
    return buf.getvalue()


@dataclass(frozen=True)
class SptRow:
    source: int
    dijkstra_n: int
    dijkstra_s: int
    pro_n: int
    pro_s: int


@dataclass(frozen=True)
class SptTable:
    rows: Tuple[SptRow, ...]

    def averages(self) -> Tuple[Fraction, Fraction, Fraction, Fraction]:
        n = len(self.rows)
        cols = ("dijkstra_n", "dijkstra_s", "pro_n", "pro_s")
        return tuple(Fraction(sum(getattr(r, c) for r in self.rows), n) for c in cols)

    def to_csv(self, comments: Sequence[str] = ()) -> str:
        buf = io.StringIO()
        for line in comments:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["source", "dijkstra_N", "dijkstra_S", "dijkstrapro_N", "dijkstrapro_S"])
        for r in self.rows:
            w.writerow([r.source, r.dijkstra_n, r.dijkstra_s, r.pro_n, r.pro_s])
        w.writerow(["average", *(f"{float(a):.4f}" for a in self.averages())])
        return buf.getvalue()


def spt_comparison(g: NetworkGraph, policy: McPolicy, members: Optional[Iterable[int]] = None) -> SptTable:
    """MIB count N and link stress S of Dijkstra vs DijkstraPro SPTs, per source."""
    members = frozenset(members) if members is not None else frozenset(g.nodes)
    rows = []
    for s in g.nodes:
        gs = g.with_mc(policy.mc_set(g, s, session_rng(0, STREAM_MC, 0, s, 0)))
        dests = members - {s}
        plain = prune_spt(dijkstra_spt(gs, s), dests)
        pro = prune_spt(dijkstra_pro_spt(gs, s, dests), dests)
        rows.append(SptRow(
            s,
            mib_census(plain, gs).count, spt_link_stress(plain, gs),
            mib_census(pro, gs).count, spt_link_stress(pro, gs),
        ))
    return SptTable(tuple(rows))
