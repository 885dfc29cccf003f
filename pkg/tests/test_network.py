import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pcngeom import build_graph, graph_from_dict, liquidity_network, volume, wealth_of
from pcngeom.network import (
    LiquidityState,
    NetworkError,
    WealthVector,
    as_wealth,
    compositions,
    dump_graph,
    equal_split_volume,
    iter_state_blocks,
)

from oracles import all_states, random_graph


def test_triangle_capacity(triangle):
    assert triangle.n == 3 and triangle.m == 3
    assert triangle.total_capacity == 21
    assert triangle.capacities == (3, 7, 11)


def test_parallel_channels_merge():
    g = build_graph("ab", [(("a", "b"), 5), (("b", "a"), 7)])
    assert g.m == 1
    assert g.channels[0].capacity == 12
    assert g.channels[0].endpoints == ("a", "b")


def test_empty_graph():
    g = build_graph(["a", "b"], [])
    assert g.total_capacity == 0
    assert volume(g) == 1


@pytest.mark.parametrize(
    "nodes, chans",
    [
        (["a", "a"], []),
        (["a", "b"], [(("a", "c"), 1)]),
        (["a", "b"], [(("a", "b"), 0)]),
        (["a", "b"], [(("a", "b"), -3)]),
        (["a", "b"], [(("a", "a"), 2)]),
        (["a", "b"], [(("a", "b"), 1.5)]),
    ],
)
def test_build_graph_rejects(nodes, chans):
    with pytest.raises(NetworkError):
        build_graph(nodes, chans)


def test_json_round_trip(triangle):
    g2 = graph_from_dict(json.loads(dump_graph(triangle)))
    assert g2 == triangle


def test_json_format_uses_ends_and_cap():
    g = graph_from_dict({"nodes": ["p", "q", "r"], "channels": [{"ends": ["p", "q", "r"], "cap": 4}]})
    assert g.channels[0].k == 3 and not g.is_two_party


def test_wealth_of_worked_state(triangle):
    lam = LiquidityState(triangle, ((0, 3), (3, 4), (5, 6)))
    assert wealth_of(triangle, lam).values == (5, 6, 10)


def test_wealth_of_single_channel():
    g = build_graph("ab", [(("a", "b"), 10)])
    assert wealth_of(g, LiquidityState(g, ((4, 6),))).as_dict() == {"a": 4, "b": 6}


def test_wealth_of_one_sided(triangle):
    lam = LiquidityState.one_sided(triangle, "x")
    assert wealth_of(triangle, lam)["x"] == triangle.node_capacity("x") == 14


def test_liquidity_network_arcs(triangle):
    lam = LiquidityState(triangle, ((0, 3), (3, 4), (5, 6)))
    ln = liquidity_network(triangle, lam)
    caps = {(a.src, a.dst): a.capacity for a in ln.arcs}
    assert caps == {("x", "y"): 0, ("y", "x"): 3, ("y", "z"): 3, ("z", "y"): 4, ("x", "z"): 5, ("z", "x"): 6}


def test_liquidity_network_circulation_changes_arcs_not_wealth(triangle):
    lam = LiquidityState(triangle, ((0, 3), (3, 4), (5, 6)))
    # unit 3-cycle z -> x -> y -> z
    other = LiquidityState(triangle, ((1, 2), (4, 3), (4, 7)))
    assert liquidity_network(triangle, lam) != liquidity_network(triangle, other)
    assert wealth_of(triangle, lam) == wealth_of(triangle, other)


def test_liquidity_network_rejects_hyperchannel():
    g = build_graph("abc", [(("a", "b", "c"), 3)])
    lam = LiquidityState(g, ((1, 1, 1),))
    with pytest.raises(NetworkError):
        liquidity_network(g, lam)


def test_liquidity_state_conservation(triangle):
    with pytest.raises(NetworkError):
        LiquidityState(triangle, ((1, 1), (3, 4), (5, 6)))
    with pytest.raises(NetworkError):
        LiquidityState(triangle, ((-1, 4), (3, 4), (5, 6)))


def test_balanced_remainder_goes_to_lower_index(triangle):
    lam = LiquidityState.balanced(triangle)
    assert lam.balances == ((2, 1), (4, 3), (6, 5))


def test_mapping_round_trip(triangle):
    lam = LiquidityState(triangle, ((0, 3), (3, 4), (5, 6)))
    assert LiquidityState.from_mapping(triangle, lam.to_dict()) == lam


def test_wealth_vector_validation(triangle):
    with pytest.raises(NetworkError):
        WealthVector(("a",), (-1,))
    with pytest.raises(NetworkError):
        as_wealth(triangle, (1, 2))
    with pytest.raises(NetworkError):
        as_wealth(triangle, {"w": 3})
    assert as_wealth(triangle, {"x": 21}).values == (21, 0, 0)


def test_volume_matches_enumeration_small():
    rng = np.random.default_rng(3)
    for _ in range(30):
        g = random_graph(rng, cap_range=(1, 5), m_range=(1, 4), max_volume=2000)
        assert volume(g) == math.prod(c + 1 for c in g.capacities)
        assert volume(g) == sum(1 for _ in all_states(g))


def test_hyperchannel_volume_counts_compositions():
    g = build_graph("abcd", [(("a", "b", "c"), 4), (("c", "d"), 2)])
    assert volume(g) == math.comb(6, 2) * 3
    assert sum(len(s) for s, _ in iter_state_blocks(g)) == volume(g)


def test_state_blocks_wealth_rows(triangle):
    total = 0
    for states, wealth in iter_state_blocks(triangle, block=50):
        assert np.all(wealth.sum(axis=1) == 21)
        total += len(states)
    assert total == 4 * 8 * 12


def test_equal_split_volume():
    assert equal_split_volume(12, 3) == 125
    assert float(equal_split_volume(12, 5)) == pytest.approx((12 / 5 + 1) ** 5)


@given(st.integers(0, 8), st.integers(1, 4))
def test_compositions_count(total, parts):
    got = list(compositions(total, parts))
    assert len(got) == math.comb(total + parts - 1, parts - 1)
    assert len(set(got)) == len(got)
    assert all(sum(c) == total for c in got)


@settings(max_examples=60)
@given(st.lists(st.integers(1, 20), min_size=1, max_size=6), st.data())
def test_wealth_sums_to_capacity(caps, data):
    nodes = [f"n{i}" for i in range(len(caps) + 1)]
    g = build_graph(nodes, [((nodes[i], nodes[i + 1]), c) for i, c in enumerate(caps)])
    coords = [data.draw(st.integers(0, c)) for c in caps]
    lam = LiquidityState.from_coords(g, coords)
    assert wealth_of(g, lam).total == g.total_capacity
    assert all(sum(b) == c for b, c in zip(lam.balances, caps))
