import itertools
import json
import math

import numpy as np
import pytest

from ftlab import fronttrack as ft
from ftlab import riemann as rm
from ftlab.errors import DomainViolation, InteractionOverflow, TraceUnavailable


def _synthetic(sys, xs, speeds, families=None, sigmas=None):
    """Solution with hand-set fronts (states are placeholders)."""
    n = len(xs)
    families = families or [1] * n
    sigmas = sigmas or [-0.01] * n
    st = [rm.WState.from_u(sys, sys.center + np.array([0.001 * k, 0.0])) for k in range(n + 1)]
    fronts = [ft.Front(x, 0.0, s, fam, "shock", sg, st[k], st[k + 1], s)
              for k, (x, s, fam, sg) in enumerate(zip(xs, speeds, families, sigmas))]
    return ft.PiecewiseSolution(sys, 1e-3, 0.0, st[0], fronts)


def _brute_q(families, sigmas):
    q = 0.0
    for a, b in itertools.combinations(range(len(sigmas)), 2):
        fa, fb = families[a], families[b]
        if fa > fb or (fa == fb and min(sigmas[a], sigmas[b]) < 0):
            q += abs(sigmas[a] * sigmas[b])
    return q


def test_constant_data(psys):
    sol = ft.init_solution(psys, 1e-3, [(0.0, psys.center)])
    g = ft.glimm_functionals(sol)
    assert sol.fronts == [] and (g.V, g.Q, g.U) == (0.0, 0.0, 0.0)
    ft.advance(sol, 0.7)
    assert sol.time == 0.7


def test_single_shock_front(psys):
    nu = 1e-3
    _, S, _ = rm.shock_curve_riemann(psys, np.zeros(2), 1, -3 * math.sqrt(nu))
    ul = psys.chart.to_state(np.zeros(2))
    sol = ft.init_solution(psys, nu, [(0.0, ul), (0.3, S)])
    fan = rm.solve_riemann(psys, nu, ul, S)
    assert len(sol.fronts) == 1
    assert sol.fronts[0].speed == fan.waves[0].speed
    ft.advance(sol, 0.4)
    assert sol.positions()[0] == 0.3 + fan.waves[0].speed * 0.4


def test_separated_jumps_additive(psys):
    nu = 1e-3
    a = psys.center
    b = a + np.array([0.01, -0.005])
    c = b + np.array([-0.004, 0.008])
    sol = ft.init_solution(psys, nu, [(0.0, a), (0.0, b), (1.0, c)])
    v1 = ft.glimm_functionals(ft.init_solution(psys, nu, [(0.0, a), (0.0, b)])).V
    v2 = ft.glimm_functionals(ft.init_solution(psys, nu, [(0.0, b), (1.0, c)])).V
    assert ft.glimm_functionals(sol).V == pytest.approx(v1 + v2, rel=1e-14)


def test_domain_violation(psys):
    with pytest.raises(DomainViolation):
        ft.init_solution(psys, 1e-3, [(0.0, psys.center), (0.0, psys.center + 0.05)], epsilon=1e-3)


def test_next_interaction_kinematics(psys):
    sol = _synthetic(psys, [-1.0, 1.0], [1.0, -1.0])
    t, x, pair = ft.next_interaction(sol)
    assert t == pytest.approx(1.0) and x == pytest.approx(0.0) and pair == (0, 1)


def test_next_interaction_race(psys, rng):
    for _ in range(50):
        xs = np.sort(rng.uniform(-1, 1, 3))
        sp = rng.uniform(-1, 1, 3)
        sol = _synthetic(psys, list(xs), list(sp))
        times = []
        for i in range(2):
            closing = sp[i] - sp[i + 1]
            times.append((xs[i + 1] - xs[i]) / closing if closing > 0 else math.inf)
        nxt = ft.next_interaction(sol)
        if min(times) == math.inf:
            assert nxt is None
        else:
            assert nxt[0] == pytest.approx(min(times), rel=1e-12)
            assert nxt[2][0] == int(np.argmin(times))


def test_next_interaction_tie_leftmost(psys):
    sol = _synthetic(psys, [-2.0, 0.0, 1.0, 3.0], [1.0, -1.0, 1.0, -1.0])
    assert ft.next_interaction(sol)[2] == (0, 1)


def test_fan_has_no_interaction(psys):
    sol = ft.init_solution(psys, 1e-3, [(0.0, psys.center), (0.0, psys.center + np.array([0.02, 0.01]))])
    assert len(sol.fronts) > 1 and ft.next_interaction(sol) is None


def test_glimm_brute_force(rng):
    for _ in range(200):
        n = rng.integers(0, 8)
        fam = list(rng.integers(1, 3, n))
        sig = list(rng.uniform(-0.02, 0.02, n))
        g = ft.glimm_from_waves(fam, sig, 40.0)
        assert g.Q == pytest.approx(_brute_q(fam, sig), abs=1e-15)
        assert g.V == pytest.approx(sum(abs(s) for s in sig))
        assert g.U == pytest.approx(g.V + 40.0 * g.Q)


def test_glimm_examples():
    assert ft.glimm_from_waves([], [], 40.0).U == 0.0
    assert ft.glimm_from_waves([1, 1], [0.001, 0.001], 40.0).Q == 0.0
    assert ft.glimm_from_waves([2, 1], [0.01, 0.02], 40.0).Q == pytest.approx(2e-4)


def test_head_on_interaction(psys):
    nu = 1e-4
    v0 = np.zeros(2)
    vm, _, _ = rm.shock_curve_riemann(psys, v0, 2, -0.03)
    vr, _, _ = rm.shock_curve_riemann(psys, vm, 1, -0.03)
    st = [psys.chart.to_state(v) for v in (v0, vm, vr)]
    sol = ft.init_solution(psys, nu, [(0.0, st[0]), (-0.1, st[1]), (0.1, st[2])])
    assert [f.family for f in sol.fronts] == [2, 1]
    ft.advance(sol, 1.0)
    assert len(sol.interaction_log) == 1
    rec = sol.interaction_log[0]
    (fi, si), (fj, sj) = rec.pair
    assert rec.delta_U <= -(sol.kappa / 2) * abs(si * sj) + 1e-10
    assert [f for f, _ in rec.outgoing] == [1, 2]


def test_random_runs_invariants(psys, rng):
    for _ in range(5):
        xs = np.sort(rng.uniform(-0.5, 0.5, 6))
        states = [psys.center + rng.uniform(-0.006, 0.006, 2) for _ in range(7)]
        sol = ft.from_profile(psys, 1e-3, xs, states)
        c = max(abs(np.linalg.eigvals(psys.jacobian(psys.center))).max() * 1.2, 1.0)
        U0 = ft.glimm_functionals(sol).U
        ft.advance(sol, 1.0)
        Us = [U0] + [r.V_after + sol.kappa * r.Q_after for r in sol.interaction_log]
        assert np.all(np.diff(Us) <= 1e-12 * max(Us))
        for r in sol.interaction_log:
            (_, si), (_, sj) = r.pair
            assert r.delta_U <= -(sol.kappa / 2) * abs(si * sj) + 1e-10
        pos = sol.positions()
        assert np.all(np.diff(pos) > 0)
        assert ft.max_speed(sol) < c
        for a, b in zip(sol.fronts, sol.fronts[1:]):
            assert a.right is b.left


def test_riemann_oracle_exact(psys):
    ul = psys.center
    ur = psys.center + np.array([0.01, -0.015])
    sol = ft.init_solution(psys, 1e-3, [(0.0, ul), (0.0, ur)])
    ft.advance(sol, 1.0)
    fan = rm.solve_riemann(psys, 1e-3, ul, ur)
    xb = np.array([w.speed for w in fan.waves])
    ub = np.array([fan.left_state.u] + [w.right_state.u for w in fan.waves])
    assert ft.l1_to_profile(sol, xb, ub, (-3, 3)) < 1e-12


def test_interaction_cap(psys):
    xs = np.linspace(-0.5, 0.5, 9)
    states = [psys.center + 0.004 * np.array([(-1) ** k, (-1) ** (k // 2)]) for k in range(10)]
    sol = ft.from_profile(psys, 1e-3, xs, states, max_interactions=2)
    with pytest.raises(InteractionOverflow):
        ft.advance(sol, 5.0)


def test_bv_and_tv_window(psys):
    _, S, _ = rm.shock_curve_riemann(psys, np.zeros(2), 1, -0.1)
    sol = ft.init_solution(psys, 1e-3, [(0.0, psys.chart.to_state(np.zeros(2))), (0.0, S)])
    h = np.linalg.norm(S - psys.chart.to_state(np.zeros(2)))
    assert ft.bv_norm(sol, (-1, 1)) == pytest.approx(h)
    assert ft.bv_norm(sol, (0.5, 1)) == 0.0
    assert ft.tv_window(sol, 0.1) == pytest.approx(h)


def test_l1_distance(psys):
    a = ft.init_solution(psys, 1e-3, [(0.0, psys.center)])
    b = ft.init_solution(psys, 1e-3, [(0.0, psys.center + np.array([0.01, 0.0]))])
    assert ft.l1_distance(a, a, (-1, 1)) == 0.0
    assert ft.l1_distance(a, b, (-1, 2)) == pytest.approx(0.03, rel=1e-14)


def test_serialization(psys):
    sol = ft.init_solution(psys, 1e-3, [(0.0, psys.center), (0.0, psys.center + np.array([0.01, 0.0]))])
    d = json.loads(sol.to_json())
    assert d["time"] == 0.0 and len(d["fronts"]) == len(sol.fronts)
    csv = sol.profile_csv(np.linspace(-1, 1, 5))
    assert csv.splitlines()[0] == "x,u1,u2" and len(csv.splitlines()) == 6


def test_shift_exact_shock_fixed_point(psys):
    nu = 1e-4
    _, S, lam = rm.shock_curve_riemann(psys, np.zeros(2), 1, -0.04)
    ul = psys.chart.to_state(np.zeros(2))
    sol = ft.init_solution(psys, nu, [(0.0, ul), (0.0, S)])
    sh = ft.set_shifted_mode(sol, sol)
    assert sh.fronts[0].speed == pytest.approx(lam, abs=1e-12)
    assert all(r.dissipation <= 1e-12 for r in sh.shift_log)


def test_shift_perturbed_bracket(psys, rng):
    nu = 1e-4
    _, S, _ = rm.shock_curve_riemann(psys, np.zeros(2), 1, -0.04)
    ul = psys.chart.to_state(np.zeros(2))
    sol = ft.init_solution(psys, nu, [(0.0, ul), (0.0, S)])
    comp = ft.from_profile(psys, nu, [-0.2, 0.0, 0.1], [ul, ul + np.array([0.002, -0.001]), S,
                                                       S + np.array([-0.001, 0.002])])
    sh = ft.set_shifted_mode(sol, comp)
    ft.advance(sh, 0.3)
    assert sh.shift_log
    for r in sh.shift_log:
        lo, hi = sh.shift.intervals[r.family]
        assert lo - 1e-12 <= r.hdot <= hi + 1e-12
        assert r.dissipation <= 1e-8


def test_shift_requires_companion(psys):
    sol = ft.init_solution(psys, 1e-3, [(0.0, psys.center)])
    with pytest.raises(TraceUnavailable):
        ft.set_shifted_mode(sol, object())
