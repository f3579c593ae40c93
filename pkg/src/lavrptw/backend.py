"""LP/MILP solving behind a small request/outcome interface.

The default backend drives HiGHS through scipy.  Dual values are normalized
so that a >=-row carries a non-negative dual under minimization and every
dual is reported as the sensitivity of the objective to that row's stated
right-hand side.  Select a backend with the LAVRPTW_BACKEND environment
variable (only "scipy-highs" ships); set LAVRPTW_SOLVE_LOG to append a
one-line record per solve.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

from lavrptw.model import BuiltModel

_BACKEND_ENV = "LAVRPTW_BACKEND"
_LOG_ENV = "LAVRPTW_SOLVE_LOG"
DEFAULT_BACKEND = "scipy-highs"


class SolverError(RuntimeError):
    pass


@dataclass
class SolveRequest:
    model: BuiltModel
    mode: str  # "lp" | "milp"
    time_limit: float | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.mode not in ("lp", "milp"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "milp" and (self.time_limit is None or self.time_limit <= 0):
            raise ValueError("milp mode requires a positive time limit")


@dataclass
class SolveOutcome:
    mode: str
    status: str  # optimal | feasible-limit | infeasible | error
    objective: float | None
    dual_bound: float | None
    x: np.ndarray | None
    duals: np.ndarray | None
    wall_time: float
    metadata: dict = field(default_factory=dict)


def _matrices(model: BuiltModel):
    """Split rows into equalities and <=-normalized inequalities."""
    eq_rows, eq_rhs, ub_rows, ub_rhs, ub_sign = [], [], [], [], []
    for handle, row in zip(model.constraints, model.rows):
        if handle.sense == "==":
            eq_rows.append(row)
            eq_rhs.append(handle.rhs)
        elif handle.sense == "<=":
            ub_rows.append(row)
            ub_rhs.append(handle.rhs)
            ub_sign.append(1.0)
        else:  # ">=" becomes -row <= -rhs
            ub_rows.append([(c, -v) for (c, v) in row])
            ub_rhs.append(-handle.rhs)
            ub_sign.append(-1.0)

    def to_csr(rows: list) -> sparse.csr_matrix:
        data, ri, ci = [], [], []
        for i, row in enumerate(rows):
            for col, coef in row:
                ri.append(i)
                ci.append(col)
                data.append(coef)
        return sparse.csr_matrix((data, (ri, ci)), shape=(len(rows), model.n_vars))

    return (to_csr(eq_rows), np.array(eq_rhs), to_csr(ub_rows), np.array(ub_rhs),
            np.array(ub_sign))


def _dual_vector(model: BuiltModel, eq_marginals: np.ndarray,
                 ub_marginals: np.ndarray, ub_sign: np.ndarray) -> np.ndarray:
    """Reassemble per-row duals in model order with normalized signs."""
    duals = np.zeros(model.n_cons)
    eq_i = ub_i = 0
    for i, handle in enumerate(model.constraints):
        if handle.sense == "==":
            duals[i] = eq_marginals[eq_i]
            eq_i += 1
        else:
            # marginal is d(obj)/d(b_ub); our rhs moved with sign ub_sign
            duals[i] = ub_marginals[ub_i] * ub_sign[ub_i]
            ub_i += 1
    return duals


def _log(line: str) -> None:
    path = os.environ.get(_LOG_ENV)
    if path:
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")


def solve(req: SolveRequest) -> SolveOutcome:
    backend = os.environ.get(_BACKEND_ENV, DEFAULT_BACKEND)
    if backend != DEFAULT_BACKEND:
        raise SolverError(f"backend {backend!r} is not available; only {DEFAULT_BACKEND} ships")
    start = time.perf_counter()
    outcome = _solve_scipy(req)
    outcome.wall_time = time.perf_counter() - start
    _log(f"{req.mode} kind={req.model.meta.get('kind')} vars={req.model.n_vars} "
         f"cons={req.model.n_cons} status={outcome.status} obj={outcome.objective} "
         f"bound={outcome.dual_bound} wall={outcome.wall_time:.3f}")
    return outcome


def _solve_scipy(req: SolveRequest) -> SolveOutcome:
    model = req.model
    a_eq, b_eq, a_ub, b_ub, ub_sign = _matrices(model)
    lb = np.array([v.lb for v in model.variables])
    ub = np.array([v.ub for v in model.variables])
    cost = np.array(model.objective)
    meta = {"backend": DEFAULT_BACKEND, "deterministic": True,
            "seed_supported": False}

    if req.mode == "lp":
        options = {"presolve": True}
        if req.time_limit:
            options["time_limit"] = req.time_limit
        res = linprog(cost, A_ub=a_ub if a_ub.shape[0] else None,
                      b_ub=b_ub if a_ub.shape[0] else None,
                      A_eq=a_eq if a_eq.shape[0] else None,
                      b_eq=b_eq if a_eq.shape[0] else None,
                      bounds=np.column_stack([lb, ub]), method="highs",
                      options=options)
        if res.status == 2:
            return SolveOutcome("lp", "infeasible", None, None, None, None, 0.0, meta)
        if res.status != 0:
            raise SolverError(f"LP solve failed: {res.message}")
        eq_m = np.asarray(res.eqlin.marginals) if a_eq.shape[0] else np.empty(0)
        ub_m = np.asarray(res.ineqlin.marginals) if a_ub.shape[0] else np.empty(0)
        duals = _dual_vector(model, eq_m, ub_m, ub_sign)
        return SolveOutcome("lp", "optimal", float(res.fun), float(res.fun),
                            np.asarray(res.x), duals, 0.0, meta)

    integrality = np.array([1 if v.integral else 0 for v in model.variables])
    constraints = []
    if a_eq.shape[0]:
        constraints.append(LinearConstraint(a_eq, b_eq, b_eq))
    if a_ub.shape[0]:
        constraints.append(LinearConstraint(a_ub, -np.inf, b_ub))
    res = milp(cost, constraints=constraints, integrality=integrality,
               bounds=Bounds(lb, ub),
               options={"time_limit": req.time_limit, "presolve": True})
    if res.status == 2:
        return SolveOutcome("milp", "infeasible", None, None, None, None, 0.0, meta)
    if res.status == 0:
        obj = float(res.fun)
        return SolveOutcome("milp", "optimal", obj, obj, np.asarray(res.x),
                            None, 0.0, meta)
    if res.status == 1 or res.x is not None:
        obj = float(res.fun) if res.x is not None else None
        bound = float(res.mip_dual_bound) if res.mip_dual_bound is not None else None
        x = np.asarray(res.x) if res.x is not None else None
        return SolveOutcome("milp", "feasible-limit", obj, bound, x, None, 0.0, meta)
    raise SolverError(f"MILP solve failed: {res.message}")
