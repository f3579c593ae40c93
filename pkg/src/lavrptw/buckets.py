"""Resource thresholds and bucket flow graphs for capacity and time.

A threshold set for customer u lists the upper bounds of all but the last
bucket; the buckets then tile [lower_u, cap_u] in unit steps (capacity is in
integer units, time in integer tenths).  The capacity graph's source holds a
full vehicle, the sink accepts any leftover; the time graph mirrors this with
remaining-time bounds.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from typing import Iterator, Mapping

from lavrptw.instance import Instance

CAPACITY = "capacity"
TIME = "time"


@dataclass(frozen=True)
class ThresholdSet:
    u: int
    resource: str
    lower: int
    cap: int
    uppers: tuple[int, ...]

    def __post_init__(self) -> None:
        prev = self.lower - 1
        for w in self.uppers:
            if not self.lower <= w < self.cap:
                raise ValueError(f"threshold {w} outside ({self.lower}, {self.cap}) for u={self.u}")
            if w <= prev:
                raise ValueError(f"thresholds not strictly increasing for u={self.u}")
            prev = w

    def buckets(self) -> list[tuple[int, int]]:
        """Closed ranges tiling [lower, cap] with no gaps or overlaps."""
        out = []
        lo = self.lower
        for w in self.uppers:
            out.append((lo, w))
            lo = w + 1
        out.append((lo, self.cap))
        return out

    def with_uppers(self, uppers: tuple[int, ...]) -> "ThresholdSet":
        return ThresholdSet(self.u, self.resource, self.lower, self.cap, uppers)


def init_thresholds(inst: Instance, ds: int, ts_tenths: int) -> tuple[dict[int, ThresholdSet], dict[int, ThresholdSet]]:
    """Evenly spaced initial thresholds: capacity buckets of width ds starting
    at each demand, time buckets of width ts starting at each window minimum.
    The last bucket may be smaller."""
    if ds <= 0 or ts_tenths <= 0:
        raise ValueError("bucket sizes must be positive")
    cap_sets: dict[int, ThresholdSet] = {}
    time_sets: dict[int, ThresholdSet] = {}
    for u in inst.customer_ids:
        d_u = int(inst.demand[u])
        uppers = tuple(range(d_u + ds - 1, inst.capacity, ds))
        cap_sets[u] = ThresholdSet(u, CAPACITY, d_u, inst.capacity, uppers)
        lo, hi = int(inst.twmin[u]), int(inst.twmax[u])
        uppers_t = tuple(range(lo + ts_tenths - 1, hi, ts_tenths))
        time_sets[u] = ThresholdSet(u, TIME, lo, hi, uppers_t)
    return cap_sets, time_sets


@dataclass(frozen=True)
class BucketNode:
    idx: int
    u: int
    lo: int
    hi: int
    rank: int


@dataclass(frozen=True)
class FlowEdge:
    idx: int
    tail: int
    head: int
    kind: str  # depot-out | depot-in | dump | travel


@dataclass(frozen=True)
class FlowGraph:
    resource: str
    nodes: tuple[BucketNode, ...]
    edges: tuple[FlowEdge, ...]
    source: int
    sink: int
    by_rank: dict[tuple[int, int], int]
    pair_edges: dict[tuple[int, int], tuple[int, ...]]

    def node_of(self, u: int, rank: int) -> BucketNode:
        return self.nodes[self.by_rank[(u, rank)]]

    def customer_nodes(self) -> Iterator[BucketNode]:
        return (nd for nd in self.nodes if nd.idx not in (self.source, self.sink))


def _consume(inst: Instance, resource: str, u: int, v: int) -> int:
    if resource == CAPACITY:
        return int(inst.demand[u])
    return int(inst.time[u, v])


def build_graph(thresholds: Mapping[int, ThresholdSet], inst: Instance, resource: str) -> FlowGraph:
    """Bucket nodes plus the four edge families: depot-out into the bucket
    holding the level carried in from the depot, bottom bucket to the sink,
    rank-decreasing dumps, and travel edges obeying the reachability and
    no-redundancy rules."""
    if resource not in (CAPACITY, TIME):
        raise ValueError(f"unknown resource {resource!r}")
    nodes: list[BucketNode] = []
    by_rank: dict[tuple[int, int], int] = {}
    bucket_lists: dict[int, list[tuple[int, int]]] = {}
    for u in inst.customer_ids:
        bucket_lists[u] = thresholds[u].buckets()
        for rank, (lo, hi) in enumerate(bucket_lists[u], start=1):
            by_rank[(u, rank)] = len(nodes)
            nodes.append(BucketNode(len(nodes), u, lo, hi, rank))
    if resource == CAPACITY:
        src_lo = src_hi = inst.capacity
        sink_hi = inst.capacity
    else:
        src_lo = src_hi = inst.t0
        sink_hi = inst.t0
    source = len(nodes)
    nodes.append(BucketNode(source, inst.depot_start, src_lo, src_hi, 1))
    by_rank[(inst.depot_start, 1)] = source
    sink = len(nodes)
    nodes.append(BucketNode(sink, inst.depot_end, 0, sink_hi, 1))
    by_rank[(inst.depot_end, 1)] = sink

    edges: list[FlowEdge] = []
    pair_edges: dict[tuple[int, int], list[int]] = {}

    def add(tail: int, head: int, kind: str, pair: tuple[int, int] | None) -> None:
        e = FlowEdge(len(edges), tail, head, kind)
        edges.append(e)
        if pair is not None:
            pair_edges.setdefault(pair, []).append(e.idx)

    for u in inst.customer_ids:
        if (inst.depot_start, u) in inst.edges:
            # enter the bucket holding the resource actually carried in from
            # the depot: full capacity lands in the top bucket, remaining
            # time clamps to min(t0 - travel, window top)
            arrival = min(src_hi - _consume(inst, resource, inst.depot_start, u),
                          bucket_lists[u][-1][1])
            rank = next(r for r, (lo, hi) in enumerate(bucket_lists[u], start=1)
                        if lo <= arrival <= hi)
            add(source, by_rank[(u, rank)], "depot-out", (inst.depot_start, u))
        if (u, inst.depot_end) in inst.edges:
            add(by_rank[(u, 1)], sink, "depot-in", (u, inst.depot_end))
        for rank in range(2, len(bucket_lists[u]) + 1):
            add(by_rank[(u, rank)], by_rank[(u, rank - 1)], "dump", None)

    for (u, v) in sorted(inst.edges):
        if not (1 <= u <= inst.n and 1 <= v <= inst.n):
            continue
        consume = _consume(inst, resource, u, v)
        v_lows = [lo for (lo, _) in bucket_lists[v]]
        for rank_i, (lo_i, hi_i) in enumerate(bucket_lists[u], start=1):
            reach = hi_i - consume
            if reach < v_lows[0]:
                continue
            # lowest admissible target; higher targets would be redundant
            # with edges leaving a lower-rank bucket of u
            floor = bucket_lists[u][rank_i - 2][1] - consume if rank_i > 1 else None
            hi_rank = bisect_left(v_lows, reach + 1)  # targets with lo <= reach
            for rank_j in range(1, hi_rank + 1):
                lo_j = v_lows[rank_j - 1]
                if floor is not None and not lo_j > floor:
                    continue
                add(by_rank[(u, rank_i)], by_rank[(v, rank_j)], "travel", (u, v))

    return FlowGraph(
        resource=resource, nodes=tuple(nodes), edges=tuple(edges),
        source=source, sink=sink, by_rank=by_rank,
        pair_edges={k: tuple(v) for k, v in sorted(pair_edges.items())},
    )


def merge_equal_dual_buckets(thresholds: Mapping[int, ThresholdSet],
                             duals: Mapping[tuple[int, int], float],
                             tol: float = 1e-6) -> dict[int, ThresholdSet]:
    """Remove the boundary between adjacent buckets whose balance-row duals
    agree; chains of equal duals collapse transitively in one pass.  ``duals``
    maps (customer, rank) to the dual of that bucket's flow-balance row."""
    out: dict[int, ThresholdSet] = {}
    for u, tset in sorted(thresholds.items()):
        nb = len(tset.uppers) + 1
        drop: set[int] = set()
        for rank in range(2, nb + 1):
            try:
                hi_dual = duals[(u, rank)]
                lo_dual = duals[(u, rank - 1)]
            except KeyError as exc:
                raise ValueError(f"missing dual for bucket {exc} of customer {u}") from exc
            if abs(hi_dual - lo_dual) <= tol:
                drop.add(tset.uppers[rank - 2])
        out[u] = tset.with_uppers(tuple(w for w in tset.uppers if w not in drop))
    return out


def expand_from_flows(thresholds: Mapping[int, ThresholdSet],
                      flows: Mapping[int, float], graph: FlowGraph,
                      inst: Instance, tol: float = 1e-6) -> dict[int, ThresholdSet]:
    """Split the buckets that positive flow enters with slack.  Each flowing
    edge between different locations contributes the exact resource level a
    vehicle would carry into the head customer; values already present or
    outside the open threshold range are skipped."""
    additions: dict[int, set[int]] = {}
    for e in graph.edges:
        if e.kind == "dump":
            continue
        if flows.get(e.idx, 0.0) <= tol:
            continue
        i, j = graph.nodes[e.tail], graph.nodes[e.head]
        if j.u == i.u or j.u == inst.depot_end:
            continue
        if graph.resource == CAPACITY:
            value = i.hi - int(inst.demand[i.u])
        else:
            value = min(i.hi - int(inst.time[i.u, j.u]), j.hi)
        tset = thresholds[j.u]
        if value <= tset.lower or value >= tset.cap or value in tset.uppers:
            continue
        additions.setdefault(j.u, set()).add(value)
    out: dict[int, ThresholdSet] = {}
    for u, tset in sorted(thresholds.items()):
        extra = additions.get(u)
        if extra:
            out[u] = tset.with_uppers(tuple(sorted(set(tset.uppers) | extra)))
        else:
            out[u] = tset
    return out


def bucket_feasible(graph: FlowGraph, flows: Mapping[int, float],
                    inst: Instance, tol: float = 1e-6) -> bool:
    """Whether every flowing non-dump edge delivers exactly the head bucket's
    upper bound; when true, refining this resource cannot tighten the bound."""
    for e in graph.edges:
        if e.kind == "dump" or flows.get(e.idx, 0.0) <= tol:
            continue
        i, j = graph.nodes[e.tail], graph.nodes[e.head]
        if j.u == i.u or j.u == inst.depot_end:
            continue
        if graph.resource == CAPACITY:
            if i.hi - int(inst.demand[i.u]) != j.hi:
                return False
        else:
            if min(i.hi - int(inst.time[i.u, j.u]), j.hi) != j.hi:
                return False
    return True


def graph_dump_lines(thresholds: Mapping[int, ThresholdSet],
                     graph: FlowGraph | None = None) -> Iterator[str]:
    """Debug rows 'resource u k lower upper', then edge rows with kind tags."""
    for u, tset in sorted(thresholds.items()):
        for rank, (lo, hi) in enumerate(tset.buckets(), start=1):
            yield f"{tset.resource} {u} {rank} {lo} {hi}"
    if graph is not None:
        for e in graph.edges:
            i, j = graph.nodes[e.tail], graph.nodes[e.head]
            yield f"edge {e.kind} ({i.u},{i.rank}) -> ({j.u},{j.rank})"
