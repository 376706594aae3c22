import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from ftlab import curves as cv
from ftlab import riemann as rm
from ftlab.system import wave_speed


def test_phi_values():
    assert rm.interpolation_phi(-3.0) == 1.0
    assert rm.interpolation_phi(-2.0) == 1.0
    assert rm.interpolation_phi(0.0) == 0.0
    assert rm.interpolation_phi(-1.0) == 0.0
    assert 0.0 < rm.interpolation_phi(-1.5) < 1.0
    s = np.linspace(-2.5, -0.5, 401)
    vals = [rm.interpolation_phi(x) for x in s]
    assert np.all(np.diff(vals) <= 0)
    d = [rm.interpolation_phi_prime(x) for x in s]
    assert min(d) >= -2.0 and max(d) <= 0.0
    h = 1e-6
    fd = (rm.interpolation_phi(-1.5 + h) - rm.interpolation_phi(-1.5 - h)) / (2 * h)
    assert fd == pytest.approx(rm.interpolation_phi_prime(-1.5), rel=1e-6)


def test_interpolated_curve_regimes(psys):
    v = np.zeros(2)
    nu = 1e-2
    assert np.array_equal(rm.interpolated_curve(psys, v, 1, 0.0, nu), v)
    assert np.array_equal(rm.interpolated_curve(psys, v, 1, 0.1, nu), rm.rarefaction_curve_riemann(v, 1, 0.1))
    sh, _, _ = rm.shock_curve_riemann(psys, v, 1, -0.25)
    assert np.array_equal(rm.interpolated_curve(psys, v, 1, -0.25, nu), sh)
    mid = rm.interpolated_curve(psys, v, 2, -0.15, nu)
    plus = rm.rarefaction_curve_riemann(v, 2, -0.15)
    minus, _, _ = rm.shock_curve_riemann(psys, v, 2, -0.15)
    phi = rm.interpolation_phi(-1.5)
    assert np.allclose(mid, phi * minus + (1 - phi) * plus)


def test_equal_states(psys):
    fan = rm.solve_riemann(psys, 1e-3, psys.center, psys.center)
    assert fan.sigma1 == 0.0 and fan.sigma2 == 0.0 and fan.waves == []


def test_rarefaction_three_pieces(psys):
    nu = 1e-3
    left = rm.WState.from_v(psys, np.zeros(2))
    right = rm.WState.from_v(psys, np.array([2.5 * nu, 0.0]))
    fan = rm.solve_riemann_states(psys, nu, left, right)
    assert [w.family for w in fan.waves] == [1, 1, 1]
    assert all(w.kind == "rarefaction" and abs(w.strength) <= nu + 1e-15 for w in fan.waves)
    assert [w.strength for w in fan.waves] == pytest.approx([nu, nu, 0.5 * nu], abs=1e-15)
    sp = [w.speed for w in fan.waves]
    assert np.all(np.diff(sp) > 0)
    # each speed is lambda_1 at the half-grid state of its cell
    for j, w in enumerate(fan.waves):
        u = psys.chart.to_state(np.array([(j + 0.5) * nu, 0.0]))
        assert w.speed == pytest.approx(wave_speed(psys, u, 1), abs=1e-14)


def test_pure_shock_speed(psys, burgers):
    nu = 1e-3
    sigma = -3 * math.sqrt(nu)
    v = np.zeros(2)
    _, S, lam = rm.shock_curve_riemann(psys, v, 1, sigma)
    fan = rm.solve_riemann(psys, nu, psys.chart.to_state(v), S)
    assert len(fan.waves) == 1 and fan.waves[0].kind == "shock"
    w = fan.waves[0]
    assert cv.rh_residual(psys, w.left_state.u, w.right_state.u, w.speed) < 1e-10
    assert wave_speed(psys, S, 1) < w.speed < wave_speed(psys, psys.chart.to_state(v), 1)
    # Burgers: the shock speed is the average of the two first components
    a, b = 0.06, 0.06 + sigma
    fan = rm.solve_riemann(burgers, nu, [a, 0.0], [b, 0.0])
    assert len(fan.waves) == 1
    assert fan.waves[0].speed == pytest.approx(0.5 * (a + b), abs=1e-14)


def test_fan_invariants(psys, rng):
    nu = 1e-3
    for _ in range(30):
        ul = psys.center + rng.uniform(-0.02, 0.02, 2)
        ur = psys.center + rng.uniform(-0.02, 0.02, 2)
        fan = rm.solve_riemann(psys, nu, ul, ur)
        sp = [w.speed for w in fan.waves]
        assert np.all(np.diff(sp) > 0)
        fams = [w.family for w in fan.waves]
        assert fams == sorted(fams)
        assert fan.waves[0].left_state is fan.left_state
        assert fan.waves[-1].right_state is fan.right_state
        for a, b in zip(fan.waves, fan.waves[1:]):
            assert a.right_state is b.left_state
        total = sum(abs(w.strength) for w in fan.waves)
        assert total == pytest.approx(abs(fan.sigma1) + abs(fan.sigma2), rel=1e-12, abs=1e-16)
        for w in fan.waves:
            if w.kind == "rarefaction":
                assert abs(w.strength) <= nu * (1 + 1e-12)
        # composition in Riemann coordinates
        vm1 = rm.interpolated_curve(psys, fan.left_state.v, 1, fan.sigma1, nu)
        vr = rm.interpolated_curve(psys, vm1, 2, fan.sigma2, nu)
        assert np.allclose(vr, fan.right_state.v, atol=1e-12)


def test_self_similar_burgers_rarefaction(burgers):
    # exact 1-rarefaction of u_t + (u^2/2)_x = 0: u = x/t between a and b
    for nu in (4e-3, 2e-3, 1e-3):
        a, b = 0.0, 0.05
        fan = rm.solve_riemann(burgers, nu, [a, 0.0], [b, 0.0])
        xs = np.linspace(a, b, 20001)
        approx = np.array([fan.state_at(x)[0] for x in xs])
        l1 = trapezoid(np.abs(approx - xs), xs)
        assert l1 <= nu * (b - a)


def test_approx_speed_error(psys):
    v = np.zeros(2)
    assert rm.approx_speed_error(psys, v, -2.5 * math.sqrt(1e-3), 1e-3) == (0.0, 0.0)
    nus = np.array([4e-3, 2e-3, 1e-3, 5e-4, 2.5e-4])
    curve, speed = [], []
    for nu in nus:
        c, s = rm.approx_speed_error(psys, v, -1.5 * math.sqrt(nu), nu)
        curve.append(c)
        speed.append(s)
    ratio = np.array(speed) / nus
    assert ratio.max() < 2 * ratio.min() + 1.0
    sig = 1.5 * np.sqrt(nus)
    assert np.polyfit(np.log(sig), np.log(curve), 1)[0] >= 2.5
    with pytest.raises(ValueError):
        rm.approx_speed_error(psys, v, 0.01, 1e-3)
