import math

import numpy as np
import pytest

from ftlab import fronttrack as ft
from ftlab import riemann as rm
from ftlab import weight as wt


def _hand_solution(sys, families, sigmas, xs=None):
    n = len(sigmas)
    xs = xs if xs is not None else list(np.linspace(-0.5, 0.5, n)) if n else []
    st = [rm.WState.from_u(sys, sys.center) for _ in range(n + 1)]
    fronts = [ft.Front(x, 0.0, 0.0, f, "shock", s, st[k], st[k + 1], 0.0)
              for k, (x, f, s) in enumerate(zip(xs, families, sigmas))]
    return ft.PiecewiseSolution(sys, 1e-3, 0.0, st[0], fronts)


def test_empty_profile(psys):
    prof = wt.weight_profile(_hand_solution(psys, [], []))
    assert prof.V == 0 and prof.Q == 0
    assert np.array_equal(prof.values(), [1.0])
    assert wt.global_bounds(prof) == (1.0, 1.0)


@pytest.mark.parametrize("family,sign", [(1, -1), (2, 1)])
def test_ratio_across_front(psys, family, sign):
    s = 0.02
    prof = wt.weight_profile(_hand_solution(psys, [family], [-s]), C1=1.0)
    a = prof.values()
    assert a[1] / a[0] == pytest.approx(math.exp(sign * 0.75 * s), rel=1e-14)


def test_bracket_example():
    ratio = math.exp(-0.75e-3)
    lo, hi = wt.bracket(1, 1e-3, 1.0)
    assert (lo, hi) == pytest.approx((0.998, 0.9995))
    assert lo <= ratio <= hi
    assert wt.bracket(1, 0.0, 1.0) == (1.0, 1.0)


def test_front_brackets(psys):
    sol = _hand_solution(psys, [1, 2, 1], [-1e-3, 2e-3, -5e-4])
    rep = wt.check_front_brackets(wt.weight_profile(sol), sol)
    assert rep["passes"]
    big = _hand_solution(psys, [1], [-0.5])
    rep = wt.check_front_brackets(wt.weight_profile(big), big)
    ratio = math.exp(-0.375)
    lo, hi = 1 - 1.0, 1 - 0.25
    assert rep["passes"] == (lo <= ratio <= hi)


def test_global_bounds_closed_form(psys):
    prof = wt.weight_profile(_hand_solution(psys, [1], [-0.1]))
    hi, inv = wt.global_bounds(prof)
    assert hi == pytest.approx(math.exp(0.75 * 0.1))
    assert inv == pytest.approx(1.0)


def test_zero_strength_front_is_invisible(psys):
    a = wt.weight_profile(_hand_solution(psys, [1, 2], [-0.01, 0.02], xs=[-0.2, 0.3]))
    b = wt.weight_profile(_hand_solution(psys, [1, 1, 2], [-0.01, 0.0, 0.02], xs=[-0.2, 0.0, 0.3]))
    for x in (-1.0, -0.1, 0.1, 1.0):
        assert a(x) == b(x)


def test_log_round_trip(psys, rng):
    fam = list(rng.integers(1, 3, 20))
    sig = list(rng.uniform(-0.01, 0.01, 20))
    prof = wt.weight_profile(_hand_solution(psys, fam, sig))
    direct = []
    masses = wt.signed_masses(fam, sig)
    for k in range(21):
        direct.append(math.exp(0.75 * (prof.V + 1.5 * prof.kappa * prof.Q + sum(masses[:k]))))
    assert np.allclose(np.exp(np.log(prof.values())), direct, rtol=1e-14)


def test_interaction_decay_random_runs(psys, rng):
    for _ in range(4):
        xs = np.sort(rng.uniform(-0.5, 0.5, 5))
        states = [psys.center + rng.uniform(-0.005, 0.005, 2) for _ in range(6)]
        sol = ft.from_profile(psys, 1e-3, xs, states)
        rep = wt.check_interaction_decay(sol, 1.0)
        assert rep["passes"], rep
        assert rep["interactions"] == len(sol.interaction_log)


def test_same_family_shocks_decay(psys):
    nu = 1e-4
    v0 = np.zeros(2)
    v1, _, _ = rm.shock_curve_riemann(psys, v0, 1, -0.04)
    v2, _, _ = rm.shock_curve_riemann(psys, v1, 1, -0.04)
    st = [psys.chart.to_state(v) for v in (v0, v1, v2)]
    sol = ft.init_solution(psys, nu, [(0.0, st[0]), (-0.2, st[1]), (0.0, st[2])])
    rep = wt.check_interaction_decay(sol, 10.0)
    assert rep["interactions"] >= 1 and rep["passes"]


def test_csv(psys):
    prof = wt.weight_profile(_hand_solution(psys, [1], [-0.01]))
    assert prof.to_csv().splitlines()[0] == "x_breakpoint,a_left,a_right"
