import random

import pytest

from lavrptw import buckets as bk
from lavrptw import la_arcs as la
from lavrptw.backend import SolveRequest, solve
from lavrptw.discovery import (DiscoveryConfig, Parameterization, la_contract,
                               parameterization_diff, run)
from lavrptw.instance import route_check
from lavrptw.model import build_final_milp, build_psi_star, extract_solution

from conftest import random_instance
from oracles import brute_force_optimum


def test_la_contract_zero_duals():
    nsizes = {1: 4, 2: 3}
    out = la_contract({}, {}, nsizes)
    assert out == {1: 0, 2: 0}


def test_la_contract_direct_rule():
    nsizes = {1: 4}
    local = {(1, 2, 3, 2): 0.5, (1, 2, 3, 1): 0.0}
    final = {(1, 2, 1): 1e-9}
    assert la_contract(local, final, nsizes) == {1: 2}


def test_la_contract_matches_scan_oracle():
    rng = random.Random(9)
    for _ in range(50):
        nsizes = {u: rng.randint(0, 5) for u in range(1, 6)}
        local, final = {}, {}
        for u in nsizes:
            for k in range(1, 6):
                for w in range(1, 4):
                    if rng.random() < 0.3:
                        local[(u, w, w + 1, k)] = rng.choice([0.0, 1e-9, 0.5, -0.2])
                if rng.random() < 0.3:
                    final[(u, w, k)] = rng.choice([0.0, 1e-8, 0.7])
        got = la_contract(local, final, nsizes)
        for u, cap in nsizes.items():
            active = [k for k in range(1, cap + 1)
                      if any(key[0] == u and key[-1] == k and abs(v) > 1e-6
                             for key, v in local.items())
                      or any(key[0] == u and key[-1] == k and abs(v) > 1e-6
                             for key, v in final.items())]
            assert got[u] == (max(active) if active else 0)


def _param(nsizes, caps, times):
    return Parameterization.snapshot(nsizes, caps, times)


def test_parameterization_diff_cases():
    inst = random_instance(random.Random(1), 3, capacity=40)
    caps, times = bk.init_thresholds(inst, 5, 500)
    a = _param({1: 2, 2: 2, 3: 1}, caps, times)
    assert parameterization_diff(a, a).empty

    grown = dict(times)
    mid = (times[2].lower + times[2].cap) // 2
    grown[2] = times[2].with_uppers(tuple(sorted(set(times[2].uppers) | {mid})))
    b = _param({1: 2, 2: 2, 3: 1}, caps, grown)
    d = parameterization_diff(a, b)
    assert d.time_added == {2: (mid,)} and not d.time_removed and not d.nsize_changes


def test_parameterization_diff_random_oracle():
    rng = random.Random(3)
    inst = random_instance(rng, 4, capacity=40)
    caps, times = bk.init_thresholds(inst, 4, 400)
    for _ in range(20):
        n1 = {u: rng.randint(0, 3) for u in inst.customer_ids}
        n2 = {u: rng.randint(0, 3) for u in inst.customer_ids}
        c2 = {u: caps[u].with_uppers(tuple(sorted(
            w for w in caps[u].uppers if rng.random() > 0.2))) for u in caps}
        d = parameterization_diff(_param(n1, caps, times), _param(n2, c2, times))
        for u in inst.customer_ids:
            if n1[u] != n2[u]:
                assert d.nsize_changes[u] == (n1[u], n2[u])
            removed = set(caps[u].uppers) - set(c2[u].uppers)
            assert set(d.cap_removed.get(u, ())) == removed
        assert not d.cap_added and not d.time_added


def test_run_matches_brute_force_on_toy():
    rng = random.Random(17)
    inst = random_instance(rng, 3, capacity=30)
    res = run(inst, DiscoveryConfig(ns=3, milp_time_limit=30))
    assert res.milp.status == "optimal"
    assert round(res.milp.objective * 10) == brute_force_optimum(inst)
    for route in res.milp.routes:
        assert route_check(inst, route).feasible


def test_lp_objectives_monotone_and_bounded():
    rng = random.Random(29)
    inst = random_instance(rng, 7, capacity=60)
    res = run(inst, DiscoveryConfig(ns=4, milp_time_limit=30))
    objs = [r.lp_objective for r in res.records]
    assert all(b >= a - 1e-6 for a, b in zip(objs, objs[1:]))
    # the final root LP keeps the converged tightened value
    assert res.lp_objective >= objs[-1] - 1e-6


def test_contraction_safety():
    rng = random.Random(41)
    for _ in range(4):
        inst = random_instance(rng, 6, capacity=50)
        cfg = DiscoveryConfig(ns=4)
        nb = la.build_neighborhoods(inst, cfg.ns)
        fr = la.FrontierSet(inst, nb)
        lib = la.build_arc_library(inst, nb, fr)
        nsizes = {u: len(nb[u].members) for u in inst.customer_ids}
        caps, times = bk.init_thresholds(inst, cfg.ds, cfg.ts_tenths)

        def solve_star(ns_, cs, ts):
            cg = bk.build_graph(cs, inst, bk.CAPACITY)
            tg = bk.build_graph(ts, inst, bk.TIME)
            m = build_psi_star(inst, ns_, lib, cg, tg, epsilon=cfg.epsilon)
            return extract_solution(inst, m, solve(SolveRequest(m, "lp")))

        before = solve_star(nsizes, caps, times)
        merged_caps = bk.merge_equal_dual_buckets(caps, before.duals["cap_balance"])
        merged_times = bk.merge_equal_dual_buckets(times, before.duals["time_balance"])
        shrunk = la_contract(before.duals.get("la_local", {}),
                             before.duals.get("la_final", {}), nsizes)
        after = solve_star(shrunk, merged_caps, merged_times)
        assert after.objective >= before.objective - 1e-6


def test_fixpoint_reached_with_unbounded_iterations():
    rng = random.Random(53)
    inst = random_instance(rng, 6, capacity=50)
    cfg = DiscoveryConfig(ns=3, iter_max=10**9, milp_time_limit=30)
    res = run(inst, cfg)
    assert res.termination == "parameterization-fixed"
    finest_caps, finest_times = bk.init_thresholds(inst, 1, 1)
    bound = sum(len(finest_caps[u].buckets()) + len(finest_times[u].buckets())
                for u in inst.customer_ids)
    assert len(res.records) <= bound


def test_refinement_invariance_after_convergence():
    rng = random.Random(61)
    inst = random_instance(rng, 6, capacity=50)
    res = run(inst, DiscoveryConfig(ns=3, iter_max=10**9, milp_time_limit=30))
    assert res.termination == "parameterization-fixed"
    nb = la.build_neighborhoods(inst, 3)
    fr = la.FrontierSet(inst, nb)
    lib = la.build_arc_library(inst, nb, fr)
    nsizes = dict(res.param.nsizes)
    caps = {u: bk.ThresholdSet(u, bk.CAPACITY, int(inst.demand[u]), inst.capacity, t)
            for u, t in res.param.cap_thresholds}
    times = {u: bk.ThresholdSet(u, bk.TIME, int(inst.twmin[u]), int(inst.twmax[u]), t)
             for u, t in res.param.time_thresholds}

    def psi_lp(ns_, cs, ts):
        cg = bk.build_graph(cs, inst, bk.CAPACITY)
        tg = bk.build_graph(ts, inst, bk.TIME)
        m = build_final_milp(inst, ns_, lib, cg, tg)
        return solve(SolveRequest(m, "lp")).objective / 10.0

    converged = psi_lp(nsizes, caps, times)
    fcaps, ftimes = bk.init_thresholds(inst, 1, 1)
    finest = psi_lp(nsizes, fcaps, ftimes)
    assert finest == pytest.approx(converged, abs=1e-6)
