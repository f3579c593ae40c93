"""Solver-agnostic constraint matrices for the three models: the compact
two-index baseline, the tightened LP with per-size local-area rows (used to
read contraction duals), and the final MILP.

Objective coefficients are distance tenths; every builder orders variables
and rows by sorted keys so solver behaviour is reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Mapping

from lavrptw.buckets import FlowGraph
from lavrptw.instance import Instance, decode_routes
from lavrptw.la_arcs import CustomerArcs, break_rank, merge_redundant

if TYPE_CHECKING:
    from lavrptw.backend import SolveOutcome


@dataclass(frozen=True)
class VariableHandle:
    name: str
    kind: str  # x | tau | delta | y | zD | zT
    key: tuple
    lb: float
    ub: float
    integral: bool


@dataclass(frozen=True)
class ConstraintHandle:
    name: str
    tag: str
    key: tuple
    sense: str  # ">=" | "<=" | "=="
    rhs: float


@dataclass
class BuiltModel:
    variables: list[VariableHandle]
    constraints: list[ConstraintHandle]
    rows: list[list[tuple[int, float]]]
    objective: list[float]
    var_index: dict[str, int]
    meta: dict = field(default_factory=dict)

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def n_cons(self) -> int:
        return len(self.constraints)

    def var(self, name: str) -> int:
        return self.var_index[name]


class _Builder:
    def __init__(self) -> None:
        self.variables: list[VariableHandle] = []
        self.constraints: list[ConstraintHandle] = []
        self.rows: list[list[tuple[int, float]]] = []
        self.objective: list[float] = []
        self.var_index: dict[str, int] = {}

    def add_var(self, name: str, kind: str, key: tuple, lb: float, ub: float,
                integral: bool = False, obj: float = 0.0) -> int:
        idx = len(self.variables)
        self.variables.append(VariableHandle(name, kind, key, lb, ub, integral))
        self.objective.append(obj)
        self.var_index[name] = idx
        return idx

    def add_row(self, tag: str, key: tuple, sense: str, rhs: float,
                coeffs: Iterable[tuple[int, float]]) -> None:
        name = f"{tag}[{','.join(str(k) for k in key)}]"
        self.constraints.append(ConstraintHandle(name, tag, key, sense, rhs))
        self.rows.append(list(coeffs))

    def finish(self, meta: dict) -> BuiltModel:
        return BuiltModel(self.variables, self.constraints, self.rows,
                          self.objective, self.var_index, meta)


def _compact_core(b: _Builder, inst: Instance, x_integral: bool) -> dict[tuple[int, int], int]:
    """Variables x/tau/delta plus the two-index rows shared by every model."""
    x: dict[tuple[int, int], int] = {}
    for (u, v) in sorted(inst.edges):
        x[(u, v)] = b.add_var(f"x_{u}_{v}", "x", (u, v), 0.0, 1.0,
                              integral=x_integral, obj=float(inst.cost[u, v]))
    tau: dict[int, int] = {}
    delta: dict[int, int] = {}
    for u in inst.customer_ids:
        tau[u] = b.add_var(f"tau_{u}", "tau", (u,), float(inst.twmin[u]),
                           float(inst.twmax[u]))
        delta[u] = b.add_var(f"delta_{u}", "delta", (u,), float(inst.demand[u]),
                             float(inst.capacity))

    for u in inst.customer_ids:
        b.add_row("service", (u,), "==", 1.0,
                  [(x[(u, v)], 1.0) for v in inst.out_edges[u]])
    for u in inst.customer_ids:
        b.add_row("degree", (u,), "==", 1.0,
                  [(x[(v, u)], 1.0) for v in inst.in_edges[u]])

    d0 = float(inst.capacity)
    for u in inst.customer_ids:
        for v in inst.in_edges[u]:
            big_m = d0 + float(inst.demand[v])
            coeffs = [(delta[u], -1.0), (x[(v, u)], -big_m)]
            if v == inst.depot_start:
                rhs = -big_m - d0 + float(inst.demand[v])  # delta at depot is d0
            else:
                coeffs.append((delta[v], 1.0))
                rhs = float(inst.demand[v]) - big_m
            b.add_row("capacity_mtz", (v, u), ">=", rhs, coeffs)

    for u in inst.customer_ids:
        for v in inst.in_edges[u]:
            t_vu = float(inst.time[v, u])
            big_m = float(inst.twmax[u]) + t_vu
            coeffs = [(tau[u], -1.0), (x[(v, u)], -big_m)]
            if v == inst.depot_start:
                rhs = t_vu - big_m - float(inst.t0)  # tau at depot is t0
            else:
                coeffs.append((tau[v], 1.0))
                rhs = t_vu - big_m
            b.add_row("time_mtz", (v, u), ">=", rhs, coeffs)

    b.add_row("min_vehicles", (), ">=", float(inst.min_vehicles()),
              [(x[(inst.depot_start, v)], 1.0)
               for v in inst.out_edges[inst.depot_start] if v != inst.depot_end])
    return x


def build_baseline(inst: Instance) -> BuiltModel:
    """The compact two-index MILP with big-M time/capacity propagation."""
    if inst.n == 0:
        raise ValueError("instance has no customers")
    b = _Builder()
    _compact_core(b, inst, x_integral=True)
    return b.finish({"kind": "baseline", "n": inst.n})


def _outside_sum_vars(inst: Instance, x: Mapping[tuple[int, int], int],
                      w: int, visible: set[int]) -> list[int]:
    """x variables leaving w toward nodes outside the visible neighborhood."""
    cols = []
    for v in inst.out_edges[w]:
        if v == inst.depot_end or (1 <= v <= inst.n and v not in visible):
            cols.append(x[(w, v)])
    return cols


def _add_la_rows(b: _Builder, inst: Instance, u: int, reps: tuple,
                 cust: CustomerArcs, nsize: int, y_idx: list[int],
                 x: Mapping[tuple[int, int], int], family: str, epsilon: float) -> None:
    if family == "plain":
        # An arc acts through its prefix visible under the enforced
        # neighborhood: pairs beyond the break customer are not constrained
        # and the break customer plays the final role.  This makes the rows
        # the k = |N_u| slice of the per-size family, so the final model's
        # relaxation keeps the tightened LP's value.
        local: dict[tuple[int, int], list[int]] = {}
        final: dict[int, list[int]] = {}
        visible = set(cust.members[:nsize])
        for j, arc in enumerate(reps):
            cut = break_rank(arc, nsize)
            for (w, v) in list(arc.pairs())[:cut]:
                local.setdefault((w, v), []).append(j)
            final.setdefault(arc.seq[cut], []).append(j)
        for (w, v) in sorted(local):
            b.add_row("la_local", (u, w, v), ">=", 0.0,
                      [(x[(w, v)], 1.0)] + [(y_idx[j], -1.0) for j in local[(w, v)]])
        for w in sorted(final):
            cols = _outside_sum_vars(inst, x, w, visible | {u})
            b.add_row("la_final", (u, w), ">=", 0.0,
                      [(c, 1.0) for c in cols] + [(y_idx[j], -1.0) for j in final[w]])
        return

    local_k: dict[tuple[int, int, int], list[int]] = {}
    final_k: dict[tuple[int, int], list[int]] = {}
    for j, arc in enumerate(reps):
        for pos, (w, v) in enumerate(arc.pairs()):
            needed = arc.prefix_ranks[pos]
            for k in range(max(needed, 1), nsize + 1):
                local_k.setdefault((w, v, k), []).append(j)
        for k in range(1, nsize + 1):
            w = arc.seq[break_rank(arc, k)]
            final_k.setdefault((w, k), []).append(j)
    for (w, v, k) in sorted(local_k):
        b.add_row("la_local", (u, w, v, k), ">=", -epsilon * k,
                  [(x[(w, v)], 1.0)] + [(y_idx[j], -1.0) for j in local_k[(w, v, k)]])
    for (w, k) in sorted(final_k):
        visible_k = set(cust.members[:k]) | {u}
        cols = _outside_sum_vars(inst, x, w, visible_k)
        b.add_row("la_final", (u, w, k), ">=", -epsilon * k,
                  [(c, 1.0) for c in cols] + [(y_idx[j], -1.0) for j in final_k[(w, k)]])


def _add_flow_rows(b: _Builder, inst: Instance, graph: FlowGraph,
                   x: Mapping[tuple[int, int], int], z_kind: str) -> None:
    balance_tag = "cap_balance" if z_kind == "zD" else "time_balance"
    link_tag = "cap_link" if z_kind == "zD" else "time_link"
    z_idx: list[int] = []
    for e in graph.edges:
        z_idx.append(b.add_var(f"{z_kind}_{e.tail}_{e.head}", z_kind,
                               (e.tail, e.head), 0.0, math.inf))
    outgoing: dict[int, list[int]] = {}
    incoming: dict[int, list[int]] = {}
    for e in graph.edges:
        outgoing.setdefault(e.tail, []).append(e.idx)
        incoming.setdefault(e.head, []).append(e.idx)
    for nd in graph.customer_nodes():
        coeffs = [(z_idx[i], 1.0) for i in outgoing.get(nd.idx, [])]
        coeffs += [(z_idx[i], -1.0) for i in incoming.get(nd.idx, [])]
        b.add_row(balance_tag, (nd.u, nd.rank), "==", 0.0, coeffs)
    for (u, v) in sorted(inst.edges):
        coeffs = [(x[(u, v)], 1.0)]
        coeffs += [(z_idx[i], -1.0) for i in graph.pair_edges.get((u, v), ())]
        b.add_row(link_tag, (u, v), "==", 0.0, coeffs)


def _build_tightened(inst: Instance, nsizes: Mapping[int, int],
                     library: Mapping[int, CustomerArcs],
                     cap_graph: FlowGraph, time_graph: FlowGraph,
                     family: str, epsilon: float, integral: bool) -> BuiltModel:
    if inst.n == 0:
        raise ValueError("instance has no customers")
    b = _Builder()
    x = _compact_core(b, inst, x_integral=integral)

    for u in inst.customer_ids:
        cust = library[u]
        nsize = nsizes[u]
        if not 0 <= nsize <= len(cust.members):
            raise ValueError(f"neighborhood size {nsize} out of range for customer {u}")
        reps = merge_redundant(cust, nsize)
        y_idx = [b.add_var(f"y_{u}_{j}", "y", (u, j), 0.0, 1.0, integral=integral)
                 for j in range(len(reps))]
        b.add_row("one_ordering", (u,), "==", 1.0, [(yi, 1.0) for yi in y_idx])
        _add_la_rows(b, inst, u, reps, cust, nsize, y_idx, x, family, epsilon)

    _add_flow_rows(b, inst, cap_graph, x, "zD")
    _add_flow_rows(b, inst, time_graph, x, "zT")
    return b.finish({
        "kind": "psi_milp" if family == "plain" else "psi_star",
        "n": inst.n,
        "nsizes": dict(sorted(nsizes.items())),
        "epsilon": epsilon,
    })


def build_psi_star(inst: Instance, nsizes: Mapping[int, int],
                   library: Mapping[int, CustomerArcs],
                   cap_graph: FlowGraph, time_graph: FlowGraph,
                   epsilon: float = 1e-5) -> BuiltModel:
    """Tightened LP whose local-area rows are replicated per neighborhood size
    k with slack epsilon*k, so dual activity reveals the sizes actually used."""
    return _build_tightened(inst, nsizes, library, cap_graph, time_graph,
                            family="epsilon-k", epsilon=epsilon, integral=False)


def build_final_milp(inst: Instance, nsizes: Mapping[int, int],
                     library: Mapping[int, CustomerArcs],
                     cap_graph: FlowGraph, time_graph: FlowGraph) -> BuiltModel:
    """The exact tightened MILP: plain local-area rows, binary x and y."""
    return _build_tightened(inst, nsizes, library, cap_graph, time_graph,
                            family="plain", epsilon=0.0, integral=True)


@dataclass
class LpSolution:
    objective: float  # distance units
    values: dict[str, float]
    duals: dict[str, dict[tuple, float]]
    wall_time: float

    def x_values(self) -> dict[tuple[int, int], float]:
        return {tuple(int(s) for s in name[2:].split("_")): v
                for name, v in self.values.items() if name.startswith("x_")}


@dataclass
class MilpResult:
    status: str
    objective: float | None  # distance units
    dual_bound: float | None
    routes: list[list[int]]
    arcs: list[tuple[int, int]]
    wall_time: float


def extract_solution(inst: Instance, model: BuiltModel, outcome: "SolveOutcome"):
    """Turn raw solver vectors into structured results.

    LP outcomes yield an LpSolution with duals keyed by (tag, key); integral
    outcomes yield a MilpResult with decoded routes.  Raises on fractional x
    in MILP mode and on arc sets that do not decompose into routes.
    """
    if not any(v.kind == "x" for v in model.variables):
        raise ValueError("model has no arc variables; nothing to extract")
    if outcome.mode == "lp":
        duals: dict[str, dict[tuple, float]] = {}
        for handle, value in zip(model.constraints, outcome.duals):
            duals.setdefault(handle.tag, {})[handle.key] = value
        values = {v.name: float(outcome.x[i]) for i, v in enumerate(model.variables)}
        return LpSolution(objective=outcome.objective / 10.0, values=values,
                          duals=duals, wall_time=outcome.wall_time)

    if outcome.x is None:
        return MilpResult(status=outcome.status, objective=None,
                          dual_bound=None if outcome.dual_bound is None
                          else outcome.dual_bound / 10.0,
                          routes=[], arcs=[], wall_time=outcome.wall_time)
    arcs = []
    for i, v in enumerate(model.variables):
        if v.kind != "x":
            continue
        val = float(outcome.x[i])
        if abs(val - round(val)) > 1e-6:
            raise ValueError(f"fractional arc value {v.name}={val} in MILP mode")
        if round(val) == 1:
            arcs.append((int(v.key[0]), int(v.key[1])))
    routes = decode_routes(inst, arcs)
    return MilpResult(
        status=outcome.status,
        objective=outcome.objective / 10.0,
        dual_bound=None if outcome.dual_bound is None else outcome.dual_bound / 10.0,
        routes=routes, arcs=arcs, wall_time=outcome.wall_time,
    )


def write_mps(model: BuiltModel, path: str, name: str = "LAVRPTW") -> None:
    """Free-format MPS export; handle names double as row/column names."""
    sense_tag = {"==": "E", ">=": "G", "<=": "L"}
    lines = [f"NAME {name}", "ROWS", " N OBJ"]
    for c in model.constraints:
        lines.append(f" {sense_tag[c.sense]} {c.name}")
    by_col: dict[int, list[tuple[str, float]]] = {i: [] for i in range(model.n_vars)}
    for row_i, row in enumerate(model.rows):
        rname = model.constraints[row_i].name
        for col, coef in row:
            by_col[col].append((rname, coef))
    lines.append("COLUMNS")
    integer_open = False
    marker = 0
    for i, v in enumerate(model.variables):
        if v.integral != integer_open:
            kind = "INTORG" if v.integral else "INTEND"
            lines.append(f" MARKER M{marker} 'MARKER' '{kind}'")
            marker += 1
            integer_open = v.integral
        if model.objective[i]:
            lines.append(f" {v.name} OBJ {model.objective[i]:.10g}")
        for rname, coef in by_col[i]:
            lines.append(f" {v.name} {rname} {coef:.10g}")
    if integer_open:
        lines.append(f" MARKER M{marker} 'MARKER' 'INTEND'")
    lines.append("RHS")
    for c in model.constraints:
        if c.rhs:
            lines.append(f" RHS {c.name} {c.rhs:.10g}")
    lines.append("BOUNDS")
    for v in model.variables:
        if v.lb == 0.0 and v.ub == math.inf:
            continue
        if v.lb:
            lines.append(f" LO BND {v.name} {v.lb:.10g}")
        if v.ub != math.inf:
            lines.append(f" UP BND {v.name} {v.ub:.10g}")
    lines.append("ENDATA")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
