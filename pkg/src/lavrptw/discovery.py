"""The discretization-discovery loop: iterate LP solves, contract buckets and
neighborhoods whenever the bound improves enough, expand thresholds from the
flows, periodically reset neighborhoods, and finish with the exact MILP.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Mapping

from lavrptw import buckets as bk
from lavrptw import la_arcs as la
from lavrptw.backend import SolveRequest, SolverError, solve
from lavrptw.instance import Instance
from lavrptw.model import (BuiltModel, LpSolution, MilpResult, build_final_milp,
                           build_psi_star, extract_solution)

HARD_ITERATION_CAP = 500


@dataclass(frozen=True)
class Parameterization:
    """Per-customer neighborhood sizes plus capacity/time threshold sets."""

    nsizes: tuple[tuple[int, int], ...]
    cap_thresholds: tuple[tuple[int, tuple[int, ...]], ...]
    time_thresholds: tuple[tuple[int, tuple[int, ...]], ...]

    @staticmethod
    def snapshot(nsizes: Mapping[int, int], cap_sets: Mapping[int, bk.ThresholdSet],
                 time_sets: Mapping[int, bk.ThresholdSet]) -> "Parameterization":
        return Parameterization(
            nsizes=tuple(sorted(nsizes.items())),
            cap_thresholds=tuple((u, cap_sets[u].uppers) for u in sorted(cap_sets)),
            time_thresholds=tuple((u, time_sets[u].uppers) for u in sorted(time_sets)),
        )

    def bucket_count(self) -> tuple[int, int]:
        cap = sum(len(t) + 1 for _, t in self.cap_thresholds)
        tim = sum(len(t) + 1 for _, t in self.time_thresholds)
        return cap, tim


@dataclass
class ParamDiff:
    nsize_changes: dict[int, tuple[int, int]]
    cap_added: dict[int, tuple[int, ...]]
    cap_removed: dict[int, tuple[int, ...]]
    time_added: dict[int, tuple[int, ...]]
    time_removed: dict[int, tuple[int, ...]]

    @property
    def empty(self) -> bool:
        return not (self.nsize_changes or self.cap_added or self.cap_removed
                    or self.time_added or self.time_removed)


def parameterization_diff(a: Parameterization, b: Parameterization) -> ParamDiff:
    """Added/removed thresholds and neighborhood size deltas from a to b."""
    nchanges = {}
    for (u, na), (_, nb_) in zip(a.nsizes, b.nsizes):
        if na != nb_:
            nchanges[u] = (na, nb_)

    def diff(old, new):
        added, removed = {}, {}
        for (u, ta), (_, tb) in zip(old, new):
            plus = tuple(sorted(set(tb) - set(ta)))
            minus = tuple(sorted(set(ta) - set(tb)))
            if plus:
                added[u] = plus
            if minus:
                removed[u] = minus
        return added, removed

    cap_added, cap_removed = diff(a.cap_thresholds, b.cap_thresholds)
    time_added, time_removed = diff(a.time_thresholds, b.time_thresholds)
    return ParamDiff(nchanges, cap_added, cap_removed, time_added, time_removed)


@dataclass
class DiscoveryConfig:
    ns: int = 6
    ds: int = 5
    ts: float = 50.0
    zeta: int = 9
    iter_max: int = 10
    min_inc: float = 1.0
    epsilon: float = 1e-5
    milp_time_limit: float = 1000.0
    dual_tol: float = 1e-6

    @property
    def ts_tenths(self) -> int:
        return int(round(self.ts * 10))


@dataclass
class IterationRecord:
    index: int
    lp_objective: float
    iter_since_reset: int
    n_vars: int
    n_cons: int
    cap_buckets: int
    time_buckets: int
    sum_nsize: int
    contracted: bool
    cap_thresholds_added: int
    time_thresholds_added: int
    wall_time: float


@dataclass
class DiscoveryResult:
    param: Parameterization
    records: list[IterationRecord]
    lp_objective: float  # root LP of the final MILP, distance units
    milp: MilpResult
    total_lp_time: float
    milp_time: float
    library: dict[int, la.CustomerArcs] = field(repr=False, default_factory=dict)
    termination: str = ""


def la_contract(local_duals: Mapping[tuple, float], final_duals: Mapping[tuple, float],
                nsizes: Mapping[int, int], tol: float = 1e-6) -> dict[int, int]:
    """Shrink each neighborhood to the largest size with an active dual among
    its per-size rows; a customer with no active duals drops to size zero."""
    best: dict[int, int] = {u: 0 for u in nsizes}
    for (u, _w, _v, k), pi in local_duals.items():
        if abs(pi) > tol and k <= nsizes[u]:
            best[u] = max(best[u], k)
    for (u, _w, k), pi in final_duals.items():
        if abs(pi) > tol and k <= nsizes[u]:
            best[u] = max(best[u], k)
    return best


def _solve_psi_star(inst, nsizes, library, cap_sets, time_sets, cfg
                    ) -> tuple[LpSolution, BuiltModel, bk.FlowGraph, bk.FlowGraph]:
    cap_graph = bk.build_graph(cap_sets, inst, bk.CAPACITY)
    time_graph = bk.build_graph(time_sets, inst, bk.TIME)
    model = build_psi_star(inst, nsizes, library, cap_graph, time_graph,
                           epsilon=cfg.epsilon)
    outcome = solve(SolveRequest(model, "lp"))
    if outcome.status != "optimal":
        raise SolverError(f"relaxation solve returned {outcome.status}; "
                          "the parameterized LP must stay feasible")
    sol = extract_solution(inst, model, outcome)
    return sol, model, cap_graph, time_graph


def _edge_flow_map(model: BuiltModel, sol: LpSolution, kind: str,
                   graph: bk.FlowGraph) -> dict[int, float]:
    # z variables were created in graph-edge order
    values = [sol.values[v.name] for v in model.variables if v.kind == kind]
    return {e.idx: values[e.idx] for e in graph.edges}


def _contract(inst, sol: LpSolution, nsizes, cap_sets, time_sets, cfg):
    cap_duals = sol.duals.get("cap_balance", {})
    time_duals = sol.duals.get("time_balance", {})
    new_cap = bk.merge_equal_dual_buckets(cap_sets, cap_duals, tol=cfg.dual_tol)
    new_time = bk.merge_equal_dual_buckets(time_sets, time_duals, tol=cfg.dual_tol)
    new_nsizes = la_contract(sol.duals.get("la_local", {}),
                             sol.duals.get("la_final", {}), nsizes, tol=cfg.dual_tol)
    return new_nsizes, new_cap, new_time


def run(inst: Instance, cfg: DiscoveryConfig | None = None) -> DiscoveryResult:
    """Full pipeline: neighborhoods and frontiers once up front, then the
    expand/contract loop, a last contraction pass, and the exact MILP."""
    cfg = cfg or DiscoveryConfig()
    neighborhoods = la.build_neighborhoods(inst, cfg.ns)
    frontiers = la.FrontierSet(inst, neighborhoods)
    library = la.build_arc_library(inst, neighborhoods, frontiers)

    nsizes = {u: len(neighborhoods[u].members) for u in inst.customer_ids}
    cap_sets, time_sets = bk.init_thresholds(inst, cfg.ds, cfg.ts_tenths)

    records: list[IterationRecord] = []
    total_lp_time = 0.0
    last_lp_val = -math.inf
    iter_since_reset = 0
    prev_snapshot: Parameterization | None = None
    termination = "iteration-cap"

    for index in range(1, HARD_ITERATION_CAP + 1):
        tick = time.perf_counter()
        if iter_since_reset >= cfg.zeta:
            nsizes = {u: len(neighborhoods[u].members) for u in inst.customer_ids}
        sol, model, cap_graph, time_graph = _solve_psi_star(
            inst, nsizes, library, cap_sets, time_sets, cfg)
        total_lp_time += sol.wall_time

        contracted = False
        if sol.objective > last_lp_val + cfg.min_inc:
            nsizes, cap_sets, time_sets = _contract(inst, sol, nsizes, cap_sets,
                                                    time_sets, cfg)
            last_lp_val = sol.objective
            iter_since_reset = 0
            contracted = True

        time_flows = _edge_flow_map(model, sol, "zT", time_graph)
        cap_flows = _edge_flow_map(model, sol, "zD", cap_graph)
        new_time = bk.expand_from_flows(time_sets, time_flows, time_graph, inst)
        new_cap = bk.expand_from_flows(cap_sets, cap_flows, cap_graph, inst)
        t_added = sum(len(new_time[u].uppers) - len(time_sets[u].uppers)
                      for u in time_sets)
        c_added = sum(len(new_cap[u].uppers) - len(cap_sets[u].uppers)
                      for u in cap_sets)
        time_sets, cap_sets = new_time, new_cap
        iter_since_reset += 1

        snapshot = Parameterization.snapshot(nsizes, cap_sets, time_sets)
        cap_n, time_n = snapshot.bucket_count()
        records.append(IterationRecord(
            index=index, lp_objective=sol.objective,
            iter_since_reset=iter_since_reset,
            n_vars=model.n_vars, n_cons=model.n_cons,
            cap_buckets=cap_n, time_buckets=time_n,
            sum_nsize=sum(nsizes.values()), contracted=contracted,
            cap_thresholds_added=c_added, time_thresholds_added=t_added,
            wall_time=time.perf_counter() - tick,
        ))

        if prev_snapshot is not None and snapshot == prev_snapshot:
            termination = "parameterization-fixed"
            break
        prev_snapshot = snapshot
        if iter_since_reset > cfg.iter_max:
            termination = "stale-iterations"
            break

    # final contraction pass on fresh duals, then the exact MILP
    sol, model, cap_graph, time_graph = _solve_psi_star(
        inst, nsizes, library, cap_sets, time_sets, cfg)
    total_lp_time += sol.wall_time
    nsizes, cap_sets, time_sets = _contract(inst, sol, nsizes, cap_sets,
                                            time_sets, cfg)

    cap_graph = bk.build_graph(cap_sets, inst, bk.CAPACITY)
    time_graph = bk.build_graph(time_sets, inst, bk.TIME)
    final_model = build_final_milp(inst, nsizes, library, cap_graph, time_graph)
    root = solve(SolveRequest(final_model, "lp"))
    if root.status != "optimal":
        raise SolverError(f"final root LP returned {root.status}")
    total_lp_time += root.wall_time
    root_obj = root.objective / 10.0

    milp_out = solve(SolveRequest(final_model, "milp",
                                  time_limit=cfg.milp_time_limit))
    milp = extract_solution(inst, final_model, milp_out)

    return DiscoveryResult(
        param=Parameterization.snapshot(nsizes, cap_sets, time_sets),
        records=records, lp_objective=root_obj, milp=milp,
        total_lp_time=total_lp_time, milp_time=milp_out.wall_time,
        library=library, termination=termination,
    )
