from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from oracles import chi2_sf_even, mean
from sparsecast.algorithms import AlgorithmId, run_algorithm
from sparsecast.forest import metrics
from sparsecast.harness import (
    CSV_COLUMNS,
    STREAM_MC,
    ConfigError,
    ExperimentConfig,
    McPolicy,
    generate_sessions,
    parse_config,
    random_mc_set,
    session_results,
    session_rng,
    spt_comparison,
    sweep_csv,
    sweep_group_size,
    sweep_mc_count,
)
from sparsecast.topologies import longhaul, nsf


def test_policy_parsing():
    assert McPolicy.parse("source") == McPolicy("source")
    assert McPolicy.parse("explicit:6,10") == McPolicy("explicit", (6, 10))
    assert str(McPolicy.parse(" Degree:4 ")) == "degree:4"
    for bad in ("degree", "random:1,2", "explicit:a", "nope:3", "source:1"):
        with pytest.raises(ConfigError):
            McPolicy.parse(bad)


def test_policy_always_includes_source():
    g = nsf()
    assert McPolicy.parse("degree:4").mc_set(g, 1) == {1, 6, 10}
    assert McPolicy.parse("source").mc_set(g, 3) == {3}
    assert McPolicy.parse("explicit:6,10").mc_set(g, 10) == {6, 10}
    rng = session_rng(1, STREAM_MC, 0, 2, 0)
    assert len(McPolicy.parse("random:5").mc_set(g, 2, rng)) == 5


def test_random_mc_count_includes_source():
    g = nsf()
    for count in (1, 7, 14):
        mc = random_mc_set(g, 4, count, np.random.default_rng(0))
        assert len(mc) == count and 4 in mc
    with pytest.raises(ConfigError):
        random_mc_set(g, 4, 0, np.random.default_rng(0))
    with pytest.raises(ConfigError):
        random_mc_set(g, 4, 15, np.random.default_rng(0))


def test_parse_config():
    cfg = parse_config(
        "# demo\ntopology = nsf\nseed = 9\nsessions_per_source = 3\n"
        "group_sizes = 2,4-6\nmc_policy = degree:4\nalgorithms = MIBPro, MO\nmc_counts = 1-3\nout = x.csv\n"
    )
    assert cfg.topology == "nsf" and cfg.seed == 9 and cfg.sessions_per_source == 3
    assert cfg.group_sizes == [2, 4, 5, 6] and cfg.mc_counts == [1, 2, 3]
    assert cfg.algorithms == [AlgorithmId.MIBPRO, AlgorithmId.MO]
    assert cfg.mc_policy == McPolicy("degree", (4,)) and cfg.out == "x.csv"
    assert "seed = 9" in cfg.echo()


@pytest.mark.parametrize(
    "text",
    ["seed = 1\n", "topology = nsf\ncolour = red\n", "topology = nsf\nseed = x\n",
     "topology = nsf\nalgorithms = Foo\n", "topology nsf\n"],
)
def test_parse_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


@pytest.mark.parametrize(
    "kwargs",
    [{"group_sizes": [14]}, {"group_sizes": [0]}, {"sessions_per_source": 0}, {"mc_counts": [15]}, {"algorithms": []}],
)
def test_config_check(kwargs):
    with pytest.raises(ConfigError):
        ExperimentConfig("nsf", **kwargs).check(nsf())


def test_generate_sessions_shape_and_determinism():
    g = nsf()
    sessions = generate_sessions(g, 5, 100, seed=3)
    assert len(sessions) == 1400
    assert all(len(ms.dests) == 5 and ms.source not in ms.dests for _, ms in sessions)
    assert sessions == generate_sessions(g, 5, 100, seed=3)
    assert sessions != generate_sessions(g, 5, 100, seed=4)
    full = generate_sessions(g, 13, 2, seed=0)
    assert all(ms.dests == set(g.nodes) - {ms.source} for _, ms in full)
    with pytest.raises(ConfigError):
        generate_sessions(g, 14, 1, seed=0)


def test_destination_sampling_is_uniform():
    g = nsf()
    sessions = generate_sessions(g, 3, 100_000, seed=11, sources=[1])
    counts = Counter(d for _, ms in sessions for d in ms.dests)
    observed = np.array([counts[v] for v in range(2, 15)], dtype=float)
    expected = observed.sum() / len(observed)
    stat = float(((observed - expected) ** 2 / expected).sum())
    assert chi2_sf_even(stat, len(observed) - 1) > 0.01


def test_mc_sampling_is_uniform():
    g = longhaul()
    counts = Counter()
    for i in range(20_000):
        counts.update(random_mc_set(g, 1, 4, session_rng(5, STREAM_MC, 0, 1, i)) - {1})
    observed = np.array([counts[v] for v in range(2, 29)], dtype=float)
    expected = observed.sum() / len(observed)
    stat = float(((observed - expected) ** 2 / expected).sum())
    # 27 cells: 26 degrees of freedom
    assert chi2_sf_even(stat, 26) > 0.01


SMALL = ExperimentConfig(
    "nsf", McPolicy.parse("explicit:6,10"), group_sizes=[3, 9], sessions_per_source=4, seed=21,
)


def test_summary_matches_independent_accumulation():
    g = nsf()
    rows = sweep_group_size(g, SMALL)
    assert [(r.x, r.algorithm) for r in rows] == [(k, a) for k in (3, 9) for a in AlgorithmId]
    for k in (3, 9):
        per_algo = {a: [] for a in AlgorithmId}
        for i, ms in generate_sessions(g, k, 4, 21):
            gs = g.with_mc(SMALL.mc_policy.mc_set(g, ms.source, session_rng(21, STREAM_MC, k, ms.source, i)))
            for a in AlgorithmId:
                per_algo[a].append(metrics(run_algorithm(a, gs, ms), gs))
        for r in (r for r in rows if r.x == k):
            ms_ = per_algo[r.algorithm]
            assert r.n == len(ms_) == 4 * 14
            assert r.mean_stress == mean(m.stress for m in ms_)
            assert r.mean_cost == mean(m.total_cost for m in ms_)
            assert r.mean_aver_delay == mean(m.aver_delay for m in ms_)
            assert r.mean_max_delay == mean(m.max_delay for m in ms_)
            assert min(m.stress for m in ms_) <= r.mean_stress <= max(m.stress for m in ms_)


def test_jobs_do_not_change_results():
    g = nsf()
    one = session_results(g, SMALL, 3, 3, None, jobs=1)
    two = session_results(g, SMALL, 3, 3, None, jobs=2)
    assert one == two


def test_group_size_one_rows():
    g = nsf()
    cfg = ExperimentConfig("nsf", McPolicy.parse("degree:4"), group_sizes=[1], sessions_per_source=3, seed=2)
    rows = sweep_group_size(g, cfg)
    assert all(r.mean_stress == 1 for r in rows)
    by_algo = {r.algorithm: r for r in rows}
    assert len({by_algo[a].mean_cost for a in AlgorithmId if a is not AlgorithmId.MO}) == 1
    assert len({r.mean_aver_delay for r in rows if r.algorithm is not AlgorithmId.MO}) == 1


def test_mc_sweep_all_mc_gives_unit_stress_and_is_repeatable():
    g = nsf()
    cfg = ExperimentConfig("nsf", group_sizes=[12], sessions_per_source=2, seed=8, mc_counts=[1, 14])
    rows = sweep_mc_count(g, cfg)
    assert all(r.mean_stress == 1 for r in rows if r.x == 14)
    assert rows == sweep_mc_count(g, cfg)
    with pytest.raises(ConfigError):
        sweep_mc_count(g, ExperimentConfig("nsf", group_sizes=[3, 4], mc_counts=[2]))
    with pytest.raises(ConfigError):
        sweep_mc_count(g, ExperimentConfig("nsf", group_sizes=[3]))


def test_sweep_csv_layout():
    rows = sweep_group_size(nsf(), ExperimentConfig("nsf", group_sizes=[2], sessions_per_source=1))
    text = sweep_csv(rows, ["seed = 0"])
    lines = text.splitlines()
    assert lines[0] == "# seed = 0"
    assert lines[1] == ",".join(CSV_COLUMNS)
    assert len(lines) == 2 + len(AlgorithmId)
    assert lines[2].startswith("2,MIBPro,") and lines[2].endswith(",14")


def test_spt_comparison_all_mc_and_csv():
    g = nsf()
    table = spt_comparison(g, McPolicy("explicit", tuple(g.nodes)))
    assert all((r.dijkstra_n, r.pro_n, r.dijkstra_s, r.pro_s) == (0, 0, 1, 1) for r in table.rows)
    assert table.averages() == (0, 1, 0, 1)
    csv_text = spt_comparison(g, McPolicy("source")).to_csv(["mc_policy = source"])
    lines = csv_text.splitlines()
    assert lines[1] == "source,dijkstra_N,dijkstra_S,dijkstrapro_N,dijkstrapro_S"
    assert len(lines) == 2 + 14 + 1 and lines[-1].startswith("average,")


def test_spt_comparison_members_subset():
    g = nsf()
    table = spt_comparison(g, McPolicy("source"), members={1, 2})
    assert [r.source for r in table.rows] == list(range(1, 15))
    assert all(r.pro_n <= 1 for r in table.rows)
    assert isinstance(table.averages()[0], Fraction)
