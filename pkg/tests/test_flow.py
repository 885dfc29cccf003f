import networkx as nx
import numpy as np
import pytest

from pcngeom.flow import (
    Flow,
    FlowArc,
    FlowNetwork,
    check_flow,
    cut_capacity,
    feasible_transshipment,
    has_negative_residual_cycle,
    max_flow,
    min_cost_circulation,
    min_cost_flow,
)

from oracles import min_cost_circulation_bruteforce, min_cut_bruteforce

WORKED_ARCS = [("x", "y", 0), ("y", "x", 3), ("y", "z", 3), ("z", "y", 4), ("x", "z", 5), ("z", "x", 6)]


def _net(nodes, arcs, supply=None):
    return FlowNetwork(tuple(nodes), tuple(FlowArc(*a) for a in arcs), supply or {})


def test_worked_payment_two_coins():
    res = max_flow(_net("xyz", WORKED_ARCS), "y", "z")
    assert res.value >= 2
    # y can push 3 directly and 3 more via x
    assert res.value == 6


def test_zero_capacity_network():
    res = max_flow(_net("abc", [("a", "b", 0), ("b", "c", 0)]), "a", "c")
    assert res.value == 0
    assert res.min_cut == frozenset({"a"})


def test_max_flow_errors():
    net = _net("ab", [("a", "b", 1)])
    with pytest.raises(ValueError):
        max_flow(net, "a", "a")
    with pytest.raises((KeyError, ValueError)):
        max_flow(net, "a", "q")


def test_min_cut_is_canonical_residual_side():
    # two equal bottlenecks; the reachable side stops at the first one
    net = _net("abc", [("a", "b", 1), ("b", "c", 1)])
    assert max_flow(net, "a", "c").min_cut == frozenset({"a"})


def _random_net(rng, n, p=0.5, cap=9):
    nodes = list(range(n))
    arcs = [(u, v, int(rng.integers(0, cap + 1))) for u in nodes for v in nodes if u != v and rng.random() < p]
    return nodes, arcs


def test_max_flow_matches_bruteforce_cut():
    rng = np.random.default_rng(11)
    for _ in range(60):
        nodes, arcs = _random_net(rng, 6)
        net = _net(nodes, arcs)
        res = max_flow(net, 0, 5)
        assert res.value == min_cut_bruteforce(nodes, arcs, 0, 5)
        assert res.value == cut_capacity(net, res.min_cut)
        assert check_flow(net, res.flow, 0, 5) == res.value
        assert all(isinstance(f, int) for f in res.flow.values)


def test_max_flow_matches_networkx():
    rng = np.random.default_rng(12)
    for _ in range(30):
        nodes, arcs = _random_net(rng, 9, p=0.35, cap=20)
        G = nx.DiGraph()
        G.add_nodes_from(nodes)
        for u, v, c in arcs:
            G.add_edge(u, v, capacity=c)
        assert max_flow(_net(nodes, arcs), 0, 8).value == nx.maximum_flow_value(G, 0, 8)


def test_parallel_arcs():
    net = _net("ab", [("a", "b", 2), ("a", "b", 3)])
    res = max_flow(net, "a", "b")
    assert res.value == 5 and res.flow.values == (2, 3)


def test_transshipment_zero_supply():
    res = feasible_transshipment(_net("xyz", WORKED_ARCS))
    assert res.feasible and not any(res.flow.values)


def test_transshipment_worked_infeasible():
    # from omega'=(5,4,12) moving to (15,4,2): z must ship 10 coins to x
    lam = [("x", "y", 0), ("y", "x", 3), ("y", "z", 1), ("z", "y", 6), ("x", "z", 5), ("z", "x", 6)]
    res = feasible_transshipment(_net("xyz", lam, {"z": 10, "x": -10}))
    assert not res.feasible
    # 6 direct plus 3 through y
    assert max_flow(_net("xyz", lam), "z", "x").value == 9
    net = _net("xyz", lam, {"z": 10, "x": -10})
    X = res.cut
    assert sum(net.supply.get(v, 0) for v in X) > cut_capacity(net, X)


def test_transshipment_feasible_shift():
    # y pays z two coins from the t=0 state
    res = feasible_transshipment(_net("xyz", WORKED_ARCS, {"y": 2, "z": -2}))
    assert res.feasible
    check_flow(_net("xyz", WORKED_ARCS, {"y": 2, "z": -2}), res.flow)


def test_transshipment_rejects_unbalanced():
    with pytest.raises(ValueError):
        _net("ab", [("a", "b", 1)], {"a": 1})


def test_min_cost_nonnegative_costs_zero():
    net = _net("abc", [("a", "b", 3, 1), ("b", "c", 3, 0), ("c", "a", 3, 2)])
    assert min_cost_circulation(net).values == (0, 0, 0)


def test_min_cost_saturates_negative_cycle():
    net = _net("abc", [("a", "b", 4, -1), ("b", "c", 7, 0), ("c", "a", 5, 0)])
    f = min_cost_circulation(net)
    assert f.values == (4, 4, 4)
    assert f.cost(net) == -4
    assert not has_negative_residual_cycle(net, f)


def test_min_cost_matches_bruteforce():
    rng = np.random.default_rng(5)
    for _ in range(25):
        nodes = list(range(5))
        arcs = []
        for u in nodes:
            for v in nodes:
                if u != v and rng.random() < 0.3:
                    arcs.append((u, v, int(rng.integers(0, 3)), int(rng.integers(-5, 6))))
        if len(arcs) > 9:
            arcs = arcs[:9]
        net = _net(nodes, arcs)
        f = min_cost_circulation(net)
        check_flow(net, f)
        assert f.cost(net) == min_cost_circulation_bruteforce(nodes, arcs)
        assert not has_negative_residual_cycle(net, f)


def test_min_cost_flow_with_supplies():
    net = _net("abc", [("a", "b", 5, 1), ("b", "c", 5, 1), ("a", "c", 2, 3)], {"a": 4, "c": -4})
    f = min_cost_flow(net)
    assert f.values == (4, 4, 0)
    assert f.cost(net) == 8
    infeasible = _net("ab", [("a", "b", 1, 0)], {"a": 2, "b": -2})
    assert min_cost_flow(infeasible) is None


def test_check_flow_rejects_bad_flow():
    net = _net("ab", [("a", "b", 1)])
    with pytest.raises(AssertionError):
        check_flow(net, Flow((2,)))
