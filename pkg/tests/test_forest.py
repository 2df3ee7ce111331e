import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_scp, edge_loads, random_graph
from sparsecast.forest import (
    InvariantError,
    LightForest,
    LightTree,
    MulticastSession,
    ReconnectionState,
    link_stress_per_fiber,
    metrics,
    parse_forest,
    reconnect,
    scp,
    serialize_forest,
    validate_forest,
)
from sparsecast.topologies import nsf


def random_state(rng: random.Random, n: int):
    """A random graph plus a random tree rooted at ``s`` grown edge by edge."""
    g = random_graph(rng, n, rng.randint(0, n + 2), mc=[v for v in range(1, n + 1) if rng.random() < 0.3])
    s = rng.randint(1, n)
    parent = {s: None}
    for _ in range(rng.randint(0, n - 2)):
        frontier = [(y, x) for x in parent for y in g.neighbors(x) if y not in parent]
        if not frontier:
            break
        y, x = rng.choice(sorted(frontier))
        parent[y] = x
    state = ReconnectionState.from_tree(g, LightTree(s, parent, frozenset()), ())
    return g, state


@pytest.mark.parametrize("seed", range(300))
def test_scp_matches_oracle(seed):
    rng = random.Random(seed)
    g, state = random_state(rng, rng.randint(2, 9))
    for u in g.nodes:
        if u in state.parent:
            continue
        got = scp(u, state)
        want = brute_scp(g, u, set(state.parent), state.mc_set, "cost")
        if want is None:
            assert got is None
            continue
        assert got.length == want[0]
        assert {c: list(p) for c, p in got.options} == want[1]
        assert got.connectors == tuple(sorted(want[1]))


def test_scp_rejects_tree_node():
    g = nsf()
    state = ReconnectionState.fresh(g, 10, {6})
    with pytest.raises(ValueError):
        scp(10, state)


def test_attach_checks_connector_and_reentry():
    g = nsf().with_mc({10})
    state = ReconnectionState.fresh(g, 10, {13, 6})
    state.attach([13, 14, 10])
    assert state.mc_set == {10, 13} and state.mi_set == {14}
    with pytest.raises(InvariantError):
        state.attach([6, 11, 14])
    with pytest.raises(InvariantError):
        state.attach([6, 13, 10])


TAP_SESSION = MulticastSession(10, frozenset({6, 11, 13, 14}))


def tap_graph():
    return nsf().with_mc({1, 8, 10})


def test_reconnect_plain_greedy_tap_example():
    g = tap_graph()
    (t,) = reconnect(g, 10, None, TAP_SESSION.dests, distance_ties=False)
    f = LightForest(TAP_SESSION, (t,))
    validate_forest(f, g)
    m = metrics(f, g)
    assert (m.total_cost, m.aver_delay) == (4, Fraction(7, 4))


def test_reconnect_distance_ties_tap_example():
    g = tap_graph()
    (t,) = reconnect(g, 10, None, TAP_SESSION.dests, distance_ties=True)
    m = metrics(LightForest(TAP_SESSION, (t,)), g)
    assert (m.total_cost, m.aver_delay) == (4, Fraction(3, 2))


def test_reconnect_opens_new_tree_when_blocked():
    # path graph 1-2-3 with MI 2: once 2 forwards to 3, nothing else can attach
    from sparsecast.network import NetworkGraph

    g = NetworkGraph(4, {(1, 2): (1, 1), (2, 3): (1, 1), (2, 4): (1, 1)}, frozenset({1}))
    trees = reconnect(g, 1, None, {3, 4}, distance_ties=False)
    assert [sorted(t.served) for t in trees] == [[3], [4]]


GOOD = LightTree(10, {10: None, 11: 10, 6: 11, 14: 10, 13: 14}, frozenset({6, 11, 13, 14}))


@pytest.mark.parametrize(
    "trees, session, match",
    [
        ((), TAP_SESSION, "no light-trees"),
        ((LightTree(11, {11: None, 10: 11}, frozenset({6, 11, 13, 14})),), TAP_SESSION, "not rooted"),
        ((LightTree(10, {10: None, 6: 10}, frozenset({6})),), MulticastSession(10, {6}), "not a fiber"),
        ((LightTree(10, {10: None, 6: 11}, frozenset({6})),), MulticastSession(10, {6}), "not in the tree"),
        ((LightTree(10, {10: None, 14: 10, 9: 14, 13: 14}, frozenset({9, 13})),),
         MulticastSession(10, {9, 13}), "splits"),
        ((LightTree(10, {10: None, 11: 10}, frozenset()),), MulticastSession(10, {11}), "serves no"),
        ((LightTree(10, {10: None, 11: 10}, frozenset({11, 6})),), MulticastSession(10, {11, 6}), "outside"),
        ((GOOD, GOOD), TAP_SESSION, "served twice"),
        ((LightTree(10, {10: None, 11: 10}, frozenset({11})),), TAP_SESSION, "mismatch"),
    ],
)
def test_validate_forest_catches(trees, session, match):
    g = nsf().with_mc({10})
    with pytest.raises(InvariantError, match=match):
        validate_forest(LightForest(session, tuple(trees)), g)


def test_validate_forest_catches_cycle():
    g = nsf().with_mc({10})
    t = LightTree(10, {10: None, 11: 6, 6: 11}, frozenset({6}))
    with pytest.raises(InvariantError, match="cycle"):
        validate_forest(LightForest(MulticastSession(10, {6}), (t,)), g)


def test_metrics_and_serialization():
    g = nsf().with_mc({10})
    f = LightForest(TAP_SESSION, (GOOD,))
    validate_forest(f, g)
    text = serialize_forest(f)
    assert text == "tree 1: edge 10-11 10-14 11-6 14-13; serves 6,11,13,14\n"
    assert parse_forest(text, 10) == f
    m = metrics(f, g)
    assert m.line() == "stress=1 cost=4 aver_delay=3/2 max_delay=2"


@st.composite
def forests(draw):
    rng = random.Random(draw(st.integers(0, 10**6)))
    n = rng.randint(3, 10)
    g = random_graph(rng, n, rng.randint(0, n), mc=[v for v in range(1, n + 1) if rng.random() < 0.3])
    s = rng.randint(1, n)
    dests = frozenset(rng.sample([v for v in g.nodes if v != s], rng.randint(1, n - 1)))
    trees = reconnect(g, s, None, dests, distance_ties=rng.random() < 0.5)
    return g, LightForest(MulticastSession(s, dests), tuple(trees))


@settings(max_examples=150, deadline=None)
@given(forests())
def test_reconnect_output_is_valid_and_round_trips(case):
    g, f = case
    validate_forest(f, g)
    assert 1 <= f.stress <= len(f.session.dests)
    assert parse_forest(serialize_forest(f), f.session.source) == f
    loads = edge_loads(t.parent for t in f.trees)
    assert link_stress_per_fiber(f) == max(loads.values(), default=0)
    m = metrics(f, g)
    assert m.total_cost == sum(g.cost(u, v) * k for (u, v), k in loads.items())
