"""Local-area arcs: neighborhoods, efficient frontiers and indicator coefficients.

For a triple p = (start, interior set, end) the efficient frontier R_p holds
the orderings that are Pareto-undominated with respect to cost, minimum
required remaining time (``phi_hat``) and the no-wait departure level
(``phi``), all in remaining-time tenths.  Frontiers are built jointly by a
dynamic program over interior-set size: each ordering of p extends an
ordering of a predecessor triple by one customer at the front.

Costs inside the frontier math are sums of ``time[u][v]`` (travel plus
service) because waiting propagates through time; all orderings of a given
triple share the same service-time total, so domination is unaffected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator

from lavrptw.instance import Instance, Tenths


@dataclass(frozen=True)
class Neighborhood:
    """The closest reachable customers of u, nearest first (ties by lower id)."""

    u: int
    members: tuple[int, ...]


@dataclass(frozen=True)
class Ordering:
    """One concrete customer sequence [start, interior..., end]."""

    seq: tuple[int, ...]
    cost: Tenths
    phi: Tenths
    phi_hat: Tenths


@dataclass(frozen=True)
class LaArc:
    """A clipped ordering [u, w1..wm] with neighbor-rank prefix maxima.

    ``prefix_ranks[i]`` is the largest neighbor rank among the first i+1
    interior customers; it decides for which neighborhood sizes k the prefix
    through that customer stays fully visible.
    """

    seq: tuple[int, ...]
    prefix_ranks: tuple[int, ...]

    @property
    def final(self) -> int:
        return self.seq[-1]

    def pairs(self) -> Iterator[tuple[int, int]]:
        return zip(self.seq, self.seq[1:])


@dataclass(frozen=True)
class CustomerArcs:
    u: int
    members: tuple[int, ...]
    arcs: tuple[LaArc, ...]

    def rank(self, v: int) -> int:
        """1-based closeness rank of a neighbor; 0 for u itself."""
        if v == self.u:
            return 0
        return self.members.index(v) + 1


def build_neighborhoods(inst: Instance, ns: int) -> dict[int, Neighborhood]:
    """ns closest customers v of u by rounded distance, among those that can
    share a route leg with u in either direction (a v that cannot immediately
    follow u may still precede it inside an arc)."""
    if ns < 0:
        raise ValueError("neighborhood size must be non-negative")
    out: dict[int, Neighborhood] = {}
    for u in inst.customer_ids:
        reachable = [v for v in range(1, inst.n + 1)
                     if v != u and ((u, v) in inst.edges or (v, u) in inst.edges)]
        reachable.sort(key=lambda v: (int(inst.cost[u, v]), v))
        out[u] = Neighborhood(u=u, members=tuple(reachable[:ns]))
    return out


def _dominated_strict(r: Ordering, other: Ordering) -> bool:
    """Pareto rule: other is no worse on all three axes and better on one."""
    if other.cost > r.cost or other.phi_hat > r.phi_hat:
        return False
    if other.phi - other.cost < r.phi - r.cost:
        return False
    return (other.cost < r.cost or other.phi_hat < r.phi_hat
            or other.phi - other.cost > r.phi - r.cost)


def _pareto_filter(orderings: Iterable[Ordering]) -> tuple[Ordering, ...]:
    items = list(orderings)
    kept = [r for r in items if not any(o is not r and _dominated_strict(r, o) for o in items)]
    return tuple(kept)


def _pool_prune(items: list[Ordering]) -> tuple[Ordering, ...]:
    # Keep an ordering unless one with strictly lower cost weakly dominates it.
    # Cost never clamps when a prefix customer is added, so strict-cost
    # domination survives extension; ties on cost must be kept because the
    # other two axes can clamp into equality higher up the recursion.
    kept = []
    for r in items:
        dominated = any(
            o.cost < r.cost and o.phi_hat <= r.phi_hat and o.phi - o.cost >= r.phi - r.cost
            for o in items
        )
        if not dominated:
            kept.append(r)
    return tuple(kept)


class FrontierSet:
    """All efficient frontiers reachable from the instance's neighborhoods."""

    def __init__(self, inst: Instance, neighborhoods: dict[int, Neighborhood]):
        self.inst = inst
        self.neighborhoods = neighborhoods
        self._pools: dict[tuple[int, int, int], tuple[Ordering, ...]] = {}
        self._build()

    # -- construction ------------------------------------------------------

    def targets(self, u: int) -> list[int]:
        members = set(self.neighborhoods[u].members)
        outs = [v for v in range(1, self.inst.n + 1) if v != u and v not in members]
        outs.append(self.inst.depot_end)
        # only ends reachable from inside the arc can carry an ordering
        inside = members | {u}
        return [v for v in outs
                if any((w, v) in self.inst.edges for w in inside)]

    def _base(self, s: int, v: int) -> tuple[Ordering, ...]:
        inst = self.inst
        if (s, v) not in inst.edges:
            return ()
        t_sv = int(inst.time[s, v])
        phi = min(int(inst.twmax[s]), int(inst.twmax[v]) + t_sv)
        phi_hat = max(int(inst.twmin[s]), int(inst.twmin[v]) + t_sv)
        if phi_hat > int(inst.twmax[s]):
            return ()
        return (Ordering(seq=(s, v), cost=t_sv, phi=phi, phi_hat=phi_hat),)

    def _build(self) -> None:
        inst = self.inst
        demand = inst.demand
        cap = inst.capacity
        time = inst.time
        twmin, twmax = inst.twmin, inst.twmax
        pools = self._pools
        seen: set[tuple[int, int, int]] = set()

        max_size = max((len(nb.members) for nb in self.neighborhoods.values()), default=0)
        for level in range(0, max_size + 1):
            for u in inst.customer_ids:
                members = self.neighborhoods[u].members
                if level > len(members):
                    continue
                targets = self.targets(u)
                for combo in combinations(members, level):
                    mask = 0
                    dsum = 0
                    for w in combo:
                        mask |= 1 << w
                        dsum += int(demand[w])
                    for v in targets:
                        dv = dsum + int(demand[v])
                        starts = [u] + [w for w in members if not (mask >> w) & 1]
                        for s in starts:
                            if int(demand[s]) + dv > cap:
                                continue
                            key = (s, mask, v)
                            if key in seen:
                                continue
                            seen.add(key)
                            if level == 0:
                                pool = self._base(s, v)
                                if pool:
                                    pools[key] = pool
                                continue
                            built: list[Ordering] = []
                            tmax_s = int(twmax[s])
                            tmin_s = int(twmin[s])
                            for w in combo:
                                if (s, w) not in inst.edges:
                                    continue
                                pred = pools.get((w, mask & ~(1 << w), v))
                                if not pred:
                                    continue
                                t_sw = int(time[s, w])
                                for r in pred:
                                    phi_hat = max(tmin_s, r.phi_hat + t_sw)
                                    if phi_hat > tmax_s:
                                        continue
                                    built.append(Ordering(
                                        seq=(s,) + r.seq,
                                        cost=t_sw + r.cost,
                                        phi=min(tmax_s, r.phi + t_sw),
                                        phi_hat=phi_hat,
                                    ))
                            if built:
                                pool = _pool_prune(built)
                                if pool:
                                    pools[key] = pool

    # -- queries -----------------------------------------------------------

    @staticmethod
    def _mask(interior: Iterable[int]) -> int:
        mask = 0
        for w in interior:
            mask |= 1 << w
        return mask

    def frontier(self, start: int, interior: Iterable[int], end: int) -> tuple[Ordering, ...]:
        pool = self._pools.get((start, self._mask(interior), end), ())
        return _pareto_filter(pool)

    def lookup(self, start: int, interior: Iterable[int], end: int,
               t1: Tenths, t2: Tenths) -> float:
        """Cheapest ordering cost for departing start at t1 and end at >= t2."""
        best = math.inf
        for r in self.frontier(start, interior, end):
            if t1 >= r.phi_hat and t2 <= -r.cost + min(t1, r.phi):
                best = min(best, r.cost)
        return best

    def items(self) -> Iterator[tuple[tuple[int, frozenset[int], int], tuple[Ordering, ...]]]:
        for (s, mask, v) in sorted(self._pools):
            interior = frozenset(i for i in range(mask.bit_length()) if (mask >> i) & 1)
            yield (s, interior, v), _pareto_filter(self._pools[(s, mask, v)])


def compute_frontiers(inst: Instance, neighborhoods: dict[int, Neighborhood]) -> FrontierSet:
    """Efficient frontiers for every triple reachable from the neighborhoods."""
    return FrontierSet(inst, neighborhoods)


def departure_time(inst: Instance, r: Ordering, t: Tenths) -> Tenths | None:
    """Earliest remaining time on leaving the ordering's last node when the
    first node is left with t remaining; None when infeasible."""
    if min(t, int(inst.twmax[r.seq[0]])) < r.phi_hat:
        return None
    return -r.cost + min(t, r.phi)


def build_arc_library(inst: Instance, neighborhoods: dict[int, Neighborhood],
                      frontiers: FrontierSet) -> dict[int, CustomerArcs]:
    """Assemble R_u for every customer: union all frontier orderings that
    start at u, clip the final customer, and deduplicate by clipped sequence."""
    library: dict[int, CustomerArcs] = {}
    for u in inst.customer_ids:
        members = neighborhoods[u].members
        rank = {w: i + 1 for i, w in enumerate(members)}
        seqs: set[tuple[int, ...]] = set()
        targets = sorted(frontiers.targets(u))
        for level in range(0, len(members) + 1):
            for combo in combinations(sorted(members), level):
                for v in targets:
                    for r in frontiers.frontier(u, combo, v):
                        seqs.add(r.seq[:-1])
        arcs = []
        for seq in sorted(seqs, key=lambda s: (len(s), s)):
            ranks: list[int] = []
            best = 0
            for w in seq[1:]:
                best = max(best, rank[w])
                ranks.append(best)
            arcs.append(LaArc(seq=seq, prefix_ranks=tuple(ranks)))
        library[u] = CustomerArcs(u=u, members=members, arcs=tuple(arcs))
    return library


def merge_redundant(cust: CustomerArcs, nsize: int) -> tuple[LaArc, ...]:
    """One representative arc per coefficient signature under the first-nsize
    neighborhood.  Two arcs sharing the prefix visible at that size carry the
    same coefficients in every enforced row (at every size k <= nsize), so the
    lexicographically smallest sequence stands in for the group."""
    groups: dict[tuple, LaArc] = {}
    for arc in cust.arcs:
        cut = break_rank(arc, nsize)
        key = arc.seq[:cut + 1]
        prev = groups.get(key)
        if prev is None or (len(arc.seq), arc.seq) < (len(prev.seq), prev.seq):
            groups[key] = arc
    return tuple(sorted(groups.values(), key=lambda a: (len(a.seq), a.seq)))


def break_rank(arc: LaArc, k: int) -> int:
    """Index into seq of the customer where the k-visible prefix ends."""
    j = 0
    while j < len(arc.prefix_ranks) and arc.prefix_ranks[j] <= k:
        j += 1
    return j


def frontier_dump_lines(frontiers: FrontierSet) -> Iterator[str]:
    """Debug rows: 'u_p | N_p | v_p | seq | c_r | phi | phihat' in file units."""
    for (s, interior, v), front in frontiers.items():
        nset = ",".join(str(i) for i in sorted(interior)) or "-"
        for r in front:
            seq = "-".join(str(w) for w in r.seq)
            yield (f"{s} | {nset} | {v} | {seq} | "
                   f"{r.cost / 10:.1f} | {r.phi / 10:.1f} | {r.phi_hat / 10:.1f}")
