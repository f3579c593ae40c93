"""Command-line front end: solve one instance with either method, sweep a
directory of instances into a results CSV, or dump the arc frontiers.

Exit codes: 0 when the final solve is optimal or hit its limit with an
incumbent, 2 when a model is infeasible, 1 for usage or runtime errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from lavrptw import buckets as bk
from lavrptw import la_arcs as la
from lavrptw.backend import SolveRequest, SolverError, solve
from lavrptw.discovery import DiscoveryConfig, DiscoveryResult, run
from lavrptw.instance import Instance, parse_solomon, truncate
from lavrptw.model import (MilpResult, build_baseline, build_final_milp,
                           extract_solution, write_mps)

CSV_HEADER = "file,approach,lp_obj,mip_dual_bound,milp_obj,milp_time,total_lp_time,ten_x"


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit with code 1
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _fmt(value, none=""):
    return none if value is None else f"{value:.1f}"


@dataclass
class RunRow:
    file: str
    approach: str  # la-disc | baseline
    lp_obj: float
    mip_dual_bound: float | None
    milp_obj: float | None
    milp_time: float
    total_lp_time: float
    ten_x: str = ""
    status: str = "optimal"

    def csv(self) -> str:
        return ",".join([
            self.file, self.approach, _fmt(self.lp_obj),
            _fmt(self.mip_dual_bound), _fmt(self.milp_obj),
            _fmt(self.milp_time), _fmt(self.total_lp_time), self.ten_x,
        ])

    def as_dict(self) -> dict:
        return {
            "file": self.file, "approach": self.approach,
            "lp_obj": self.lp_obj, "mip_dual_bound": self.mip_dual_bound,
            "milp_obj": self.milp_obj, "milp_time": self.milp_time,
            "total_lp_time": self.total_lp_time, "ten_x": self.ten_x,
            "status": self.status,
        }


def _load_instance(path: str, customers: int | None) -> Instance:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read instance file: {exc}") from exc
    inst = parse_solomon(text)
    if customers is not None:
        if customers < 1:
            raise CliError("--customers must be at least 1")
        if customers > inst.n:
            raise CliError(f"--customers {customers} exceeds the file's {inst.n}")
        inst = truncate(inst, customers)
    return inst


def _config_from_args(args) -> DiscoveryConfig:
    return DiscoveryConfig(ns=args.ns, ds=args.ds, ts=args.ts, zeta=args.zeta,
                           iter_max=args.iter_max, min_inc=args.min_inc,
                           epsilon=args.epsilon, milp_time_limit=args.time_limit)


def _solve_baseline(inst: Instance, name: str, time_limit: float) -> tuple[RunRow, MilpResult]:
    model = build_baseline(inst)
    lp_out = solve(SolveRequest(model, "lp"))
    milp_out = solve(SolveRequest(model, "milp", time_limit=time_limit))
    result = extract_solution(inst, model, milp_out)
    row = RunRow(file=name, approach="baseline",
                 lp_obj=lp_out.objective / 10.0,
                 mip_dual_bound=result.dual_bound, milp_obj=result.objective,
                 milp_time=milp_out.wall_time, total_lp_time=lp_out.wall_time,
                 status=result.status)
    return row, result


def _solve_la(inst: Instance, name: str, cfg: DiscoveryConfig) -> tuple[RunRow, DiscoveryResult]:
    res = run(inst, cfg)
    row = RunRow(file=name, approach="la-disc", lp_obj=res.lp_objective,
                 mip_dual_bound=res.milp.dual_bound, milp_obj=res.milp.objective,
                 milp_time=res.milp_time, total_lp_time=res.total_lp_time,
                 status=res.milp.status)
    return row, res


def _exit_code(status: str) -> int:
    if status in ("optimal", "feasible-limit"):
        return 0
    if status == "infeasible":
        return 2
    return 1


def _mark_ten_x(la_row: RunRow, base_row: RunRow) -> None:
    """Appendix-style flag: the tightened pipeline solved to optimality and
    the baseline either failed to finish or took at least ten times longer."""
    if la_row.status != "optimal":
        return
    if base_row.status != "optimal" or base_row.milp_time >= 10.0 * max(la_row.milp_time, 1e-9):
        la_row.ten_x = "YES"


def cmd_solve(args) -> int:
    inst = _load_instance(args.instance, args.customers)
    name = Path(args.instance).stem
    cfg = _config_from_args(args)

    if args.dump_frontiers:
        nb = la.build_neighborhoods(inst, cfg.ns)
        fr = la.FrontierSet(inst, nb)
        for line in la.frontier_dump_lines(fr):
            print(line, file=sys.stderr)

    if args.method == "baseline":
        row, result = _solve_baseline(inst, name, args.time_limit)
        routes = result.routes
        if args.export_mps:
            write_mps(build_baseline(inst), args.export_mps)
    else:
        row, res = _solve_la(inst, name, cfg)
        routes = res.milp.routes
        if args.iter_log:
            with open(args.iter_log, "w", encoding="utf-8") as fh:
                fh.write("iteration,lp_obj,iter_since_reset,n_vars,n_cons,"
                         "cap_buckets,time_buckets,sum_nsize,contracted,"
                         "cap_added,time_added,wall_time\n")
                for r in res.records:
                    fh.write(f"{r.index},{r.lp_objective:.4f},{r.iter_since_reset},"
                             f"{r.n_vars},{r.n_cons},{r.cap_buckets},{r.time_buckets},"
                             f"{r.sum_nsize},{int(r.contracted)},"
                             f"{r.cap_thresholds_added},{r.time_thresholds_added},"
                             f"{r.wall_time:.3f}\n")
        if args.export_mps:
            nsizes = dict(res.param.nsizes)
            caps = {u: bk.ThresholdSet(u, bk.CAPACITY, int(inst.demand[u]),
                                       inst.capacity, t)
                    for u, t in res.param.cap_thresholds}
            times = {u: bk.ThresholdSet(u, bk.TIME, int(inst.twmin[u]),
                                        int(inst.twmax[u]), t)
                     for u, t in res.param.time_thresholds}
            cg = bk.build_graph(caps, inst, bk.CAPACITY)
            tg = bk.build_graph(times, inst, bk.TIME)
            write_mps(build_final_milp(inst, nsizes, res.library, cg, tg),
                      args.export_mps)

    if args.out == "json":
        print(json.dumps({"row": row.as_dict(), "routes": routes}, indent=2))
    else:
        print(CSV_HEADER)
        print(row.csv())
        for route in routes:
            print("route " + "-".join(str(v) for v in route))
    return _exit_code(row.status)


def cmd_bench(args) -> int:
    directory = Path(args.dir)
    files = sorted(directory.glob("*.txt"))
    if not files:
        raise CliError(f"no .txt instances found in {directory}")
    sizes = [int(s) for s in args.sizes.split(",")] if args.sizes else [None]
    methods = ["la-disc", "baseline"] if args.methods == "both" else [
        "la-disc" if args.methods == "la" else "baseline"]
    cfg = _config_from_args(args)

    rows: list[RunRow] = []
    for path in files:
        base = parse_solomon(path.read_text())
        for size in sizes:
            if size is not None and size > base.n:
                print(f"skipping {path.name}: only {base.n} customers",
                      file=sys.stderr)
                continue
            inst = truncate(base, size) if size else base
            label = f"{path.stem}.{size}" if size else path.stem
            pair: dict[str, RunRow] = {}
            for method in methods:
                start = time.perf_counter()
                if method == "baseline":
                    row, _ = _solve_baseline(inst, label, args.time_limit)
                else:
                    row, _ = _solve_la(inst, label, cfg)
                pair[method] = row
                print(f"{label} {method}: obj={_fmt(row.milp_obj)} "
                      f"({time.perf_counter() - start:.1f}s)", file=sys.stderr)
            if "la-disc" in pair and "baseline" in pair:
                _mark_ten_x(pair["la-disc"], pair["baseline"])
            rows.extend(pair[m] for m in methods)

    out = Path(args.out)
    with out.open("w", encoding="utf-8") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(row.csv() + "\n")
    print(f"wrote {len(rows)} rows to {out}", file=sys.stderr)
    return 0


def cmd_frontier(args) -> int:
    inst = _load_instance(args.instance, args.customers)
    nb = la.build_neighborhoods(inst, args.ns)
    fr = la.FrontierSet(inst, nb)
    for line in la.frontier_dump_lines(fr):
        print(line)
    return 0


def _add_solver_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--time-limit", type=float, default=1000.0,
                   help="MILP wall-clock limit in seconds")
    p.add_argument("--ns", type=int, default=6, help="neighborhood size")
    p.add_argument("--ds", type=int, default=5, help="capacity bucket width")
    p.add_argument("--ts", type=float, default=50.0, help="time bucket width")
    p.add_argument("--zeta", type=int, default=9, help="stale iterations before reset")
    p.add_argument("--iter-max", type=int, default=10,
                   help="stale iterations before termination")
    p.add_argument("--min-inc", type=float, default=1.0,
                   help="bound improvement that triggers contraction")
    p.add_argument("--epsilon", type=float, default=1e-5,
                   help="slack on the per-size arc rows")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lavrptw", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve one instance")
    ps.add_argument("--instance", required=True)
    ps.add_argument("--customers", type=int, default=None)
    ps.add_argument("--method", choices=["la", "baseline"], default="la")
    ps.add_argument("--out", choices=["csv", "json"], default="csv")
    ps.add_argument("--dump-frontiers", action="store_true")
    ps.add_argument("--export-mps", default=None, metavar="PATH")
    ps.add_argument("--iter-log", default=None, metavar="PATH")
    _add_solver_options(ps)
    ps.set_defaults(func=cmd_solve)

    pb = sub.add_parser("bench", help="sweep a directory of instances")
    pb.add_argument("--dir", required=True)
    pb.add_argument("--sizes", default=None, help="comma list, e.g. 25,50")
    pb.add_argument("--methods", choices=["both", "la", "baseline"], default="both")
    pb.add_argument("--out", required=True, help="output CSV path")
    _add_solver_options(pb)
    pb.set_defaults(func=cmd_bench)

    pf = sub.add_parser("frontier", help="dump arc frontiers")
    pf.add_argument("--instance", required=True)
    pf.add_argument("--customers", type=int, default=None)
    pf.add_argument("--ns", type=int, default=6)
    pf.set_defaults(func=cmd_frontier)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    except (CliError, SolverError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
