import graphlib
import random

import pytest

from lavrptw.buckets import (CAPACITY, TIME, ThresholdSet, bucket_feasible,
                             build_graph, expand_from_flows, graph_dump_lines,
                             init_thresholds, merge_equal_dual_buckets)

from conftest import make_instance, random_instance


def test_initial_capacity_partition():
    inst = make_instance([
        (0, 0, 0, 0, 0, 5000, 0),
        (1, 10, 0, 10, 0, 4000, 0),
    ], capacity=200)
    caps, _ = init_thresholds(inst, 5, 500)
    bs = caps[1].buckets()
    assert bs[0] == (10, 14)
    assert bs[1] == (15, 19)
    assert bs[-1] == (200, 200)  # the last bucket may be smaller
    # partition oracle: tiles [d_u, d_0] exactly
    assert bs[0][0] == 10 and bs[-1][1] == 200
    for (a, b), (c, d) in zip(bs, bs[1:]):
        assert c == b + 1 and a <= b and c <= d
    assert all(b - a + 1 == 5 for a, b in bs[:-1])


def test_single_bucket_cases():
    inst = make_instance([
        (0, 0, 0, 0, 0, 5000, 0),
        (1, 10, 0, 10, 100, 100, 0),  # point window
    ], capacity=200)
    caps, times = init_thresholds(inst, 400, 500)
    assert caps[1].buckets() == [(10, 200)]
    # remaining-time window collapses to t0 - 10*100 on both ends
    assert times[1].buckets() == [(49000, 49000)]
    with pytest.raises(ValueError):
        init_thresholds(inst, 0, 500)
    with pytest.raises(ValueError):
        init_thresholds(inst, 5, 0)


def test_threshold_validation():
    with pytest.raises(ValueError):
        ThresholdSet(1, CAPACITY, 10, 200, (5,))
    with pytest.raises(ValueError):
        ThresholdSet(1, CAPACITY, 10, 200, (20, 20))
    ThresholdSet(1, CAPACITY, 10, 200, (10, 20))  # value may equal the lower bound


def _two_customer_instance():
    return make_instance([
        (0, 0, 0, 0, 0, 5000, 0),
        (1, 3, 4, 4, 0, 4000, 0),
        (2, 6, 8, 6, 0, 4000, 0),
    ], capacity=20)


def test_travel_edge_rules_by_hand():
    inst = _two_customer_instance()
    # u=1: buckets [4,9],[10,14],[15,20]; v=2: [6,9],[10,20]
    thresholds = {
        1: ThresholdSet(1, CAPACITY, 4, 20, (9, 14)),
        2: ThresholdSet(2, CAPACITY, 6, 20, (9,)),
    }
    g = build_graph(thresholds, inst, CAPACITY)
    pairs = {(g.nodes[e.tail].rank, g.nodes[e.head].rank)
             for e in g.edges if e.kind == "travel"
             and g.nodes[e.tail].u == 1 and g.nodes[e.head].u == 2}
    # rank2 of u ([10,14]): 14-4=10 >= 6 and 6 > 9-4 -> edges into both v
    # buckets whose lows sit in (5, 10]
    assert pairs == {(2, 1), (2, 2)}
    # rank1 of u ([4,9]): 9-4=5 < 6 -> nothing; rank3 ([15,20]): no v bucket
    # low exceeds 14-4=10, so it must dump before travelling


def test_no_dump_edges_with_single_buckets():
    inst = _two_customer_instance()
    thresholds = {
        1: ThresholdSet(1, CAPACITY, 4, 20, ()),
        2: ThresholdSet(2, CAPACITY, 6, 20, ()),
    }
    g = build_graph(thresholds, inst, CAPACITY)
    assert not [e for e in g.edges if e.kind == "dump"]


def test_graphs_acyclic_when_buckets_finer_than_consumption():
    # a bucket no wider than what every hop consumes makes the bucket upper
    # bound strictly decrease along travel edges; coarser graphs may contain
    # two-way edges between wide overlapping buckets, which the flow rows
    # tolerate but a topological order does not
    rng = random.Random(23)
    for _ in range(8):
        inst = random_instance(rng, 5, capacity=50)
        caps, times = init_thresholds(inst, 1, 1)
        for tsets, res in ((caps, CAPACITY), (times, TIME)):
            g = build_graph(tsets, inst, res)
            dag = {nd.idx: set() for nd in g.nodes}
            for e in g.edges:
                dag[e.head].add(e.tail)
            order = graphlib.TopologicalSorter(dag).static_order()
            assert len(list(order)) == len(g.nodes)


def test_merge_uniform_duals_collapses():
    inst = _two_customer_instance()
    caps, _ = init_thresholds(inst, 5, 500)
    duals = {(u, r): 0.0 for u in (1, 2) for r in range(1, len(caps[u].buckets()) + 1)}
    merged = merge_equal_dual_buckets(caps, duals)
    assert merged[1].buckets() == [(4, 20)]
    assert merged[2].buckets() == [(6, 20)]


def test_merge_lowest_pair_only():
    tset = {1: ThresholdSet(1, CAPACITY, 0, 30, (9, 19))}
    duals = {(1, 1): 1.0, (1, 2): 1.0, (1, 3): 2.0}
    merged = merge_equal_dual_buckets(tset, duals)
    assert merged[1].buckets() == [(0, 19), (20, 30)]
    exact = merge_equal_dual_buckets(tset, duals, tol=0.0)
    assert exact[1].buckets() == merged[1].buckets()


def test_merge_requires_all_duals():
    tset = {1: ThresholdSet(1, CAPACITY, 0, 30, (9, 19))}
    with pytest.raises(ValueError):
        merge_equal_dual_buckets(tset, {(1, 1): 0.0, (1, 2): 0.0})


def test_expand_cases():
    inst = _two_customer_instance()
    thresholds = {
        1: ThresholdSet(1, CAPACITY, 4, 20, (9, 14)),
        2: ThresholdSet(2, CAPACITY, 6, 20, (9,)),
    }
    g = build_graph(thresholds, inst, CAPACITY)
    # no flow: unchanged
    out = expand_from_flows(thresholds, {}, g, inst)
    assert all(out[u].uppers == thresholds[u].uppers for u in out)
    # flow 0.5 on the (u rank2 [10,14]) -> (v rank1) edge adds 14-4=10
    edge = next(e for e in g.edges if e.kind == "travel"
                and g.nodes[e.tail].u == 1 and g.nodes[e.tail].rank == 2
                and g.nodes[e.head].u == 2)
    out = expand_from_flows(thresholds, {edge.idx: 0.5}, g, inst)
    assert 10 in out[2].uppers
    # a value already present is a no-op
    again = expand_from_flows(out, {edge.idx: 0.5}, build_graph(out, inst, CAPACITY), inst)
    assert again[2].uppers == out[2].uppers


def test_expand_monotone_merge_shrinks():
    rng = random.Random(5)
    for _ in range(10):
        inst = random_instance(rng, 4, capacity=40)
        caps, times = init_thresholds(inst, 7, 700)
        g = build_graph(caps, inst, CAPACITY)
        flows = {e.idx: rng.random() for e in g.edges}
        grown = expand_from_flows(caps, flows, g, inst)
        for u in caps:
            assert set(caps[u].uppers) <= set(grown[u].uppers)
            # partition exactness preserved
            bs = grown[u].buckets()
            assert bs[0][0] == grown[u].lower and bs[-1][1] == grown[u].cap
            assert all(c == b + 1 for (_, b), (c, _) in zip(bs, bs[1:]))
        duals = {(u, r): rng.choice([0.0, 1.0])
                 for u in caps for r in range(1, len(grown[u].buckets()) + 1)}
        shrunk = merge_equal_dual_buckets(grown, duals)
        for u in caps:
            assert set(shrunk[u].uppers) <= set(grown[u].uppers)


def test_feasibility_implies_expansion_noop():
    rng = random.Random(31)
    for _ in range(20):
        inst = random_instance(rng, 4, capacity=40)
        caps, _ = init_thresholds(inst, rng.choice([3, 5, 100]), 500)
        g = build_graph(caps, inst, CAPACITY)
        flows = {e.idx: rng.choice([0.0, 0.7]) for e in g.edges}
        if bucket_feasible(g, flows, inst):
            out = expand_from_flows(caps, flows, g, inst)
            assert all(out[u].uppers == caps[u].uppers for u in caps)


def test_dump_lines_format():
    inst = _two_customer_instance()
    caps, _ = init_thresholds(inst, 5, 500)
    g = build_graph(caps, inst, CAPACITY)
    lines = list(graph_dump_lines(caps, g))
    assert lines[0].startswith("capacity 1 1 4 ")
    assert any(line.startswith("edge travel") for line in lines)
