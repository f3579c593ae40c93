import math
import random

import pytest

from lavrptw.instance import (SolomonParseError, build_edges, decode_routes,
                              parse_solomon, route_check, truncate)

from conftest import make_instance, random_instance, solomon_text
from oracles import clock_simulate, probe_edge


def test_parse_c101_header_values(c101_25):
    inst = c101_25
    assert inst.name == "C101"
    assert inst.capacity == 200
    assert (inst.xs[0], inst.ys[0]) == (40.0, 50.0)
    assert inst.t0 == 12360
    assert inst.n == 25
    # depot split into two co-located nodes with the remaining-time windows
    assert inst.twmin[0] == inst.twmax[0] == inst.twmax[26] == inst.t0
    assert inst.twmin[26] == 0
    assert inst.demand[0] == inst.demand[26] == 0


def test_cost_matrix_is_truncated_tenths(c101_25):
    inst = c101_25
    for u in range(0, 6):
        for v in range(0, 6):
            if u == v:
                continue
            exact = math.hypot(inst.xs[u] - inst.xs[v], inst.ys[u] - inst.ys[v])
            assert inst.cost[u, v] == math.floor(10 * exact)
            # re-rounding is a no-op
            assert math.floor(10 * (inst.cost[u, v] / 10)) == inst.cost[u, v]


def test_time_matrix_folds_service(c101_25):
    inst = c101_25
    for u in range(inst.n + 2):
        for v in range(inst.n + 2):
            if u != v:
                assert inst.time[u, v] == inst.cost[u, v] + inst.service[u]
    # costs symmetric, times not once services differ
    assert inst.cost[1, 0] == inst.cost[0, 1]
    assert inst.time[1, 0] != inst.time[0, 1]


def test_zero_demand_two_customer_edges():
    inst = make_instance([
        (0, 0, 0, 0, 0, 1000, 0),
        (1, 10, 0, 0, 0, 1000, 0),
        (2, 0, 10, 0, 0, 1000, 0),
    ], capacity=10)
    # zero demands are never capacity-infeasible; wide windows pass the probe
    expected = {(0, 1), (0, 2), (1, 2), (2, 1), (1, 3), (2, 3)}
    assert inst.edges == frozenset(expected)


def test_single_customer_edge_set(c101_25):
    inst = truncate(c101_25, 1)
    assert inst.edges == frozenset({(0, 1), (1, 2)})


def test_truncate_identity_and_composition(c101_25):
    assert truncate(c101_25, 25) is c101_25
    a = truncate(truncate(c101_25, 20), 10)
    b = truncate(c101_25, 10)
    assert a.edges == b.edges
    assert (a.cost == b.cost).all()


def test_truncate_out_of_range(c101_25):
    with pytest.raises(ValueError):
        truncate(c101_25, 0)
    with pytest.raises(ValueError):
        truncate(c101_25, 26)


def test_capacity_exclusion():
    inst = make_instance([
        (0, 0, 0, 0, 0, 1000, 0),
        (1, 10, 0, 60, 0, 1000, 0),
        (2, 0, 10, 50, 0, 1000, 0),
    ], capacity=100)
    assert (1, 2) not in inst.edges and (2, 1) not in inst.edges
    assert (0, 1) in inst.edges and (1, 3) in inst.edges


def test_edges_match_probe_oracle():
    rng = random.Random(7)
    for _ in range(25):
        inst = random_instance(rng, 3)
        for u in range(0, inst.n + 2):
            for v in range(0, inst.n + 2):
                assert ((u, v) in inst.edges) == probe_edge(inst, u, v), (u, v)


def test_every_edge_has_a_feasible_route(rc101_25):
    inst = rc101_25
    for (u, v) in inst.edges:
        nodes = [w for w in (u, v) if w != 0]
        if nodes[-1] != inst.depot_end:
            nodes.append(inst.depot_end)
        assert route_check(inst, [0] + nodes).feasible, (u, v)


def test_route_check_cases(c101_25):
    inst = c101_25
    empty = route_check(inst, [0, 26])
    assert empty.feasible and empty.cost == inst.cost[0, 26] == 0
    rep = route_check(inst, [0, 5, 5, 26])
    assert not rep.feasible
    with pytest.raises(ValueError):
        route_check(inst, [5, 26])


def test_route_check_matches_clock_simulation():
    rng = random.Random(13)
    for _ in range(60):
        inst = random_instance(rng, 4, capacity=100)
        customers = list(inst.customer_ids)
        rng.shuffle(customers)
        k = rng.randint(1, 4)
        route = [0] + customers[:k] + [inst.depot_end]
        got = route_check(inst, route)
        ok, cost = clock_simulate(inst, route)
        assert got.feasible == ok
        assert got.cost == cost


def test_build_edges_public_wrapper(r101_25):
    assert build_edges(r101_25) == r101_25.edges


def test_parse_errors():
    with pytest.raises(SolomonParseError):
        parse_solomon("")
    bad_header = "X\n\nNOPE\n"
    with pytest.raises(SolomonParseError):
        parse_solomon(bad_header)
    rows = [(0, 0, 0, 0, 0, 100, 0), (1, 1, 1, 1, 0, 100, 0), (1, 2, 2, 1, 0, 100, 0)]
    with pytest.raises(SolomonParseError, match="duplicate"):
        parse_solomon(solomon_text("D", 1, 10, rows))
    rows = [(1, 1, 1, 1, 0, 100, 0)]
    with pytest.raises(SolomonParseError, match="depot"):
        parse_solomon(solomon_text("D", 1, 10, rows))
    rows = [(0, 0, "oops", 0, 0, 100, 0)]
    with pytest.raises(SolomonParseError, match="line"):
        parse_solomon(solomon_text("D", 1, 10, rows))


def test_decode_routes_roundtrip(c101_25):
    inst = truncate(c101_25, 4)
    arcs = [(0, 1), (1, 2), (2, 3), (3, 5), (0, 4), (4, 5)]
    routes = decode_routes(inst, arcs)
    assert routes == [[0, 1, 2, 3, 5], [0, 4, 5]]
    with pytest.raises(ValueError):
        decode_routes(inst, [(0, 1), (1, 5)])
