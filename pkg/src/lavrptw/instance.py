"""Solomon-format VRPTW instances: parsing, preprocessing and the feasible edge set.

All times and distances are stored as integer tenths so that truncated-tenths
arithmetic is exact.  Time windows are kept internally in "remaining time"
form: a vehicle leaves the start depot with ``t0`` tenths on the clock and the
budget decreases along the route.  A service that the data file allows to
start between READY and DUE (wall clock) is feasible exactly when the
remaining time lies in ``[t0 - 10*DUE, t0 - 10*READY]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

Tenths = int


class SolomonParseError(ValueError):
    """Raised for malformed Solomon instance text; carries the line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class Customer:
    """One customer row in file units (times already scaled to tenths)."""

    idx: int
    x: float
    y: float
    demand: int
    ready: Tenths
    due: Tenths
    service: Tenths

    def __post_init__(self) -> None:
        if self.due < self.ready:
            raise ValueError(f"customer {self.idx}: due {self.due} < ready {self.ready}")
        if self.demand < 0:
            raise ValueError(f"customer {self.idx}: negative demand")
        if self.service < 0:
            raise ValueError(f"customer {self.idx}: negative service time")


@dataclass(frozen=True)
class Instance:
    """A preprocessed instance.

    Node ids: 0 is the start depot, 1..n are customers in file order and
    n+1 is the end depot (the single depot file row is split in two).
    ``twmin``/``twmax`` are remaining-time service windows; the depot copies
    follow the convention twmax[0] = twmin[0] = twmax[n+1] = t0, twmin[n+1] = 0.
    ``cost[u, v]`` is the Euclidean distance rounded down to a tenth, and
    ``time[u, v] = cost[u, v] + service[u]``.
    """

    name: str
    vehicles: int
    capacity: int
    customers: tuple[Customer, ...]
    t0: Tenths
    xs: np.ndarray
    ys: np.ndarray
    demand: np.ndarray
    service: np.ndarray
    twmin: np.ndarray
    twmax: np.ndarray
    cost: np.ndarray
    time: np.ndarray
    edges: frozenset[tuple[int, int]]
    out_edges: tuple[tuple[int, ...], ...]
    in_edges: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.customers)

    @property
    def depot_start(self) -> int:
        return 0

    @property
    def depot_end(self) -> int:
        return self.n + 1

    @property
    def customer_ids(self) -> range:
        return range(1, self.n + 1)

    def min_vehicles(self) -> int:
        return math.ceil(sum(int(c.demand) for c in self.customers) / self.capacity)


def _euclid_tenths(x1: float, y1: float, x2: float, y2: float) -> Tenths:
    """floor(10 * euclidean distance), exact for integral coordinates."""
    dx, dy = x1 - x2, y1 - y2
    if dx.is_integer() and dy.is_integer():
        return math.isqrt(100 * (int(dx) ** 2 + int(dy) ** 2))
    return int(math.floor(10.0 * math.hypot(dx, dy)))


def _probe_tail(inst_time: np.ndarray, twmin: np.ndarray, twmax: np.ndarray,
                t0: int, nodes: Sequence[int]) -> bool:
    """Simulate remaining time along depot-start -> nodes -> depot-end."""
    tau = t0
    prev = 0
    for v in nodes:
        tau = min(tau - inst_time[prev, v], twmax[v])
        if tau < twmin[v]:
            return False
        prev = v
    return True


def _build_edges(n: int, capacity: int, demand: np.ndarray, time: np.ndarray,
                 twmin: np.ndarray, twmax: np.ndarray, t0: int) -> frozenset[tuple[int, int]]:
    end = n + 1
    pairs: list[tuple[int, int]] = []
    for u in range(0, n + 1):  # u is never the end depot
        for v in list(range(1, n + 1)) + [end]:
            if v == u or (u == 0 and v == end):
                continue
            if demand[u] + demand[v] > capacity:
                continue
            seq = [w for w in (u, v) if w != 0]
            if not seq or seq[-1] != end:
                seq.append(end)
            if _probe_tail(time, twmin, twmax, t0, seq):
                pairs.append((u, v))
    return frozenset(pairs)


def build_edges(inst: Instance) -> frozenset[tuple[int, int]]:
    """Feasible ordered pairs: (u, v) survives iff u is not the end depot,
    v is neither u nor the start depot, the pair fits vehicle capacity and
    the remaining-time probe through [start, u, v, end] succeeds (edges
    touching a depot probe only the surviving legs).  The depot-to-depot
    pair is excluded: it would only ever describe an empty route."""
    return _build_edges(inst.n, inst.capacity, inst.demand, inst.time,
                        inst.twmin, inst.twmax, inst.t0)


def _assemble(name: str, vehicles: int, capacity: int, depot: Customer,
              customers: Sequence[Customer]) -> Instance:
    n = len(customers)
    t0 = depot.due
    num = n + 2

    xs = np.empty(num)
    ys = np.empty(num)
    demand = np.zeros(num, dtype=np.int64)
    service = np.zeros(num, dtype=np.int64)
    twmin = np.zeros(num, dtype=np.int64)
    twmax = np.zeros(num, dtype=np.int64)

    xs[0] = xs[n + 1] = depot.x
    ys[0] = ys[n + 1] = depot.y
    twmin[0] = twmax[0] = twmax[n + 1] = t0
    twmin[n + 1] = 0
    for i, c in enumerate(customers, start=1):
        xs[i], ys[i] = c.x, c.y
        demand[i] = c.demand
        service[i] = c.service
        # remaining-time window; clamp below at 0 for due dates past the horizon
        twmax[i] = t0 - c.ready
        twmin[i] = max(t0 - c.due, 0)
        if twmax[i] < twmin[i]:
            raise ValueError(f"customer {c.idx}: window lies outside the horizon")

    cost = np.zeros((num, num), dtype=np.int64)
    for u in range(num):
        for v in range(num):
            if u != v:
                cost[u, v] = _euclid_tenths(xs[u], ys[u], xs[v], ys[v])
    time = cost + service[:, None]

    edges = _build_edges(n, capacity, demand, time, twmin, twmax, t0)
    out_lists: list[list[int]] = [[] for _ in range(num)]
    in_lists: list[list[int]] = [[] for _ in range(num)]
    for (u, v) in sorted(edges):
        out_lists[u].append(v)
        in_lists[v].append(u)

    return Instance(
        name=name, vehicles=vehicles, capacity=capacity,
        customers=tuple(customers), t0=t0,
        xs=xs, ys=ys, demand=demand, service=service,
        twmin=twmin, twmax=twmax, cost=cost, time=time, edges=edges,
        out_edges=tuple(tuple(o) for o in out_lists),
        in_edges=tuple(tuple(i) for i in in_lists),
    )


def _to_tenths(token: str, line_no: int, field: str) -> Tenths:
    try:
        value = float(token)
    except ValueError as exc:
        raise SolomonParseError(line_no, f"non-numeric {field}: {token!r}") from exc
    scaled = value * 10.0
    tenths = round(scaled)
    if abs(scaled - tenths) > 1e-6:
        raise SolomonParseError(line_no, f"{field} {token!r} is finer than tenths resolution")
    return int(tenths)


def parse_solomon(text: str) -> Instance:
    """Parse canonical Solomon layout into an Instance.

    Expects the instance name, a VEHICLE section with number/capacity and a
    CUSTOMER table whose row 0 is the depot.  Raises SolomonParseError naming
    the offending line for malformed input.
    """
    lines = text.splitlines()
    idx = 0

    def next_nonblank() -> tuple[int, str]:
        nonlocal idx
        while idx < len(lines):
            line = lines[idx].strip()
            idx += 1
            if line:
                return idx, line
        return idx, ""

    _, name = next_nonblank()
    if not name:
        raise SolomonParseError(1, "empty file")

    line_no, line = next_nonblank()
    if line.upper() != "VEHICLE":
        raise SolomonParseError(line_no, f"expected VEHICLE section, got {line!r}")
    next_nonblank()  # NUMBER / CAPACITY header
    line_no, line = next_nonblank()
    tokens = line.split()
    if len(tokens) != 2:
        raise SolomonParseError(line_no, "expected vehicle count and capacity")
    try:
        vehicles, capacity = int(tokens[0]), int(tokens[1])
    except ValueError as exc:
        raise SolomonParseError(line_no, f"non-numeric vehicle data: {line!r}") from exc

    line_no, line = next_nonblank()
    if line.upper() != "CUSTOMER":
        raise SolomonParseError(line_no, f"expected CUSTOMER section, got {line!r}")
    next_nonblank()  # column header

    rows: list[Customer] = []
    seen: set[int] = set()
    while True:
        line_no, line = next_nonblank()
        if not line:
            break
        tokens = line.split()
        if len(tokens) != 7:
            raise SolomonParseError(line_no, f"expected 7 fields, got {len(tokens)}")
        try:
            cid = int(tokens[0])
            x, y = float(tokens[1]), float(tokens[2])
            dem = int(float(tokens[3]))
        except ValueError as exc:
            raise SolomonParseError(line_no, f"non-numeric field in {line!r}") from exc
        ready = _to_tenths(tokens[4], line_no, "ready time")
        due = _to_tenths(tokens[5], line_no, "due date")
        serv = _to_tenths(tokens[6], line_no, "service time")
        if cid in seen:
            raise SolomonParseError(line_no, f"duplicate customer id {cid}")
        seen.add(cid)
        rows.append(Customer(idx=cid, x=x, y=y, demand=dem, ready=ready, due=due, service=serv))

    if not rows or rows[0].idx != 0:
        raise SolomonParseError(line_no, "missing depot row (customer id 0 must come first)")
    depot = rows[0]
    if depot.demand != 0 or depot.service != 0:
        raise SolomonParseError(line_no, "depot row must have zero demand and service time")
    return _assemble(name, vehicles, capacity, depot, rows[1:])


def truncate(inst: Instance, n: int) -> Instance:
    """Keep the first n customers in file order and rebuild matrices and edges."""
    if not 1 <= n <= inst.n:
        raise ValueError(f"customer count {n} out of range 1..{inst.n}")
    if n == inst.n:
        return inst
    depot = Customer(idx=0, x=float(inst.xs[0]), y=float(inst.ys[0]), demand=0,
                     ready=0, due=inst.t0, service=0)
    return _assemble(inst.name, inst.vehicles, inst.capacity, depot, inst.customers[:n])


@dataclass(frozen=True)
class RouteCheck:
    feasible: bool
    cost: Tenths
    reason: str = ""


def route_check(inst: Instance, route: Sequence[int]) -> RouteCheck:
    """Independent feasibility oracle for a single depot-delimited route.

    Verifies elementarity, capacity and time-window feasibility by forward
    simulation of remaining time; the summed arc cost is returned either way.
    """
    if len(route) < 2 or route[0] != inst.depot_start or route[-1] != inst.depot_end:
        raise ValueError("route must start at the depot start node and end at the depot end node")
    interior = list(route[1:-1])
    cost = 0
    prev = route[0]
    for v in route[1:]:
        cost += int(inst.cost[prev, v])
        prev = v
    if any(v <= 0 or v >= inst.depot_end for v in interior):
        return RouteCheck(False, cost, "interior node is a depot")
    if len(set(interior)) != len(interior):
        return RouteCheck(False, cost, "customer repeated")
    if interior and int(inst.demand[interior].sum()) > inst.capacity:
        return RouteCheck(False, cost, "capacity exceeded")
    tau = inst.t0
    prev = route[0]
    for v in route[1:]:
        tau = min(tau - int(inst.time[prev, v]), int(inst.twmax[v]))
        if tau < int(inst.twmin[v]):
            return RouteCheck(False, cost, f"time window violated at node {v}")
        prev = v
    return RouteCheck(True, cost)


def decode_routes(inst: Instance, arcs: Iterable[tuple[int, int]]) -> list[list[int]]:
    """Reconstruct routes from selected arcs by following successors from the
    start depot.  The zero-cost start->end arc is ignored as an empty route.
    Raises ValueError when the arcs do not decompose into full routes."""
    succ: dict[int, int] = {}
    starts: list[int] = []
    for (u, v) in arcs:
        if u == inst.depot_start:
            if v != inst.depot_end:
                starts.append(v)
            continue
        if u in succ:
            raise ValueError(f"node {u} has two outgoing arcs")
        succ[u] = v
    routes: list[list[int]] = []
    visited: set[int] = set()
    for first in sorted(starts):
        route = [inst.depot_start, first]
        node = first
        while node != inst.depot_end:
            if node in visited:
                raise ValueError(f"node {node} visited twice while decoding")
            visited.add(node)
            if node not in succ:
                raise ValueError(f"no successor for node {node}; arcs are disconnected")
            node = succ.pop(node)
            route.append(node)
        routes.append(route)
    uncovered = set(inst.customer_ids) - visited
    if uncovered:
        raise ValueError(f"customers {sorted(uncovered)} not covered by any route")
    return routes
