import numpy as np
import pytest

from ftlab import curves as cv
from ftlab.errors import LeftDomain, NoChart
from ftlab.system import FluxSystem, eigensystem, wave_speed


def test_rarefaction_initial_condition(psys):
    p = cv.rarefaction_curve(psys, psys.center, 1, 0.0)
    assert np.array_equal(p.state, psys.center)


def test_rarefaction_taylor_residual_is_cubic(psys):
    base = psys.center + np.array([0.01, 0.02])
    for fam in (1, 2):
        r = eigensystem(psys, base).r(fam)
        rr = cv.second_order_direction(psys, base, fam)
        res = []
        for s in (0.04, 0.02, 0.01):
            u = cv.rarefaction_curve(psys, base, fam, s).state
            res.append(np.linalg.norm(u - (base + s * r + 0.5 * s * s * rr)))
        assert res[0] / res[1] == pytest.approx(8.0, rel=0.15)
        assert res[1] / res[2] == pytest.approx(8.0, rel=0.15)


def test_rarefaction_speed_increase(asys):
    s = 0.01
    u = cv.rarefaction_curve(asys, [0.0, 0.0], 2, s).state
    dlam = wave_speed(asys, u, 2) - wave_speed(asys, [0.0, 0.0], 2)
    grad_dot_r = 2.0  # l2 f''(r2, r2) at the origin with l.r = 1
    assert dlam == pytest.approx(s * grad_dot_r, rel=0.05)
    s_vals, path = cv.rarefaction_path(asys, [0.0, 0.0], 1, np.linspace(0, 0.05, 11))
    lam = [wave_speed(asys, u, 1) for u in path]
    assert np.all(np.diff(lam) > 0)


def test_rarefaction_arclength(psys):
    s_vals, path = cv.rarefaction_path(psys, psys.center, 2, np.linspace(0, 0.08, 801))
    length = np.sum(np.linalg.norm(np.diff(path, axis=0), axis=1))
    assert length == pytest.approx(0.08, rel=1e-6)


def test_rarefaction_leaves_domain(psys):
    with pytest.raises(LeftDomain):
        cv.rarefaction_curve(psys, psys.center, 1, 0.5)


def test_shock_degenerate(psys):
    p = cv.shock_curve(psys, psys.center, 1, 0.0)
    assert np.allclose(p.state, psys.center)
    assert p.sigma == pytest.approx(wave_speed(psys, psys.center, 1))


def test_shock_rh_and_lax(psys):
    base = psys.center
    for fam in (1, 2):
        for s in (0.001, 0.01, 0.05, 0.1):
            p = cv.shock_curve(psys, base, fam, s)
            assert cv.rh_residual(psys, base, p.state, p.sigma) < 1e-10
            assert np.linalg.norm(p.state - base) == pytest.approx(s, abs=1e-10)
            assert wave_speed(psys, p.state, fam) < p.sigma < wave_speed(psys, base, fam)


def test_burgers_shock_closed_form(burgers):
    # family 1 only moves the first component: f1 = u^2/2, so S = (a - s, b), sigma = a - s/2
    base = np.array([0.05, -0.02])
    p = cv.shock_curve(burgers, base, 1, 0.04)
    assert np.allclose(p.state, [0.01, -0.02], atol=1e-12)
    assert p.sigma == pytest.approx(0.05 - 0.02, abs=1e-12)
    p = cv.shock_curve(burgers, base, 2, 0.04)
    assert np.allclose(p.state, [0.05, -0.06], atol=1e-12)
    assert p.sigma == pytest.approx(2 + (-0.02 - 0.06) / 2, abs=1e-12)


@pytest.mark.parametrize("name", ["p-system-gamma2", "appendix-a-quadratic"])
def test_shock_expansion_slopes(name):
    from ftlab.system import get_system

    S = get_system(name)
    s = np.logspace(-3, -1, 9)
    for fam in (1, 2):
        r = cv.shock_expansion_residuals(S, S.center, fam, s)
        speed_slope = np.polyfit(np.log(s), np.log(r["speed"]), 1)[0]
        state_slope = np.polyfit(np.log(s), np.log(r["state"]), 1)[0]
        assert speed_slope >= 1.7
        assert state_slope >= 2.5


def test_riemann_invariants_p_system(psys):
    u = psys.center + np.array([0.02, -0.03])
    v = cv.riemann_invariants(psys, u)
    assert np.allclose(cv.riemann_invariants_inverse(psys, v), u, atol=1e-8)
    s_vals, path = cv.rarefaction_path(psys, u, 1, np.linspace(0, 0.1, 11))
    v2 = [cv.riemann_invariants(psys, p)[1] for p in path]
    assert np.ptp(v2) < 1e-6


def test_riemann_invariants_linear(lin):
    u = np.array([0.3, -0.4])
    assert cv.riemann_invariants(lin, u) == pytest.approx((0.3, -0.4))


def test_no_chart(psys):
    bare = FluxSystem("bare", psys.flux, psys.jacobian, psys.hessian, psys.center, psys.radius)
    with pytest.raises(NoChart):
        cv.riemann_invariants(bare, psys.center)


def test_strengthening(psys):
    grid = np.linspace(0.01, 0.1, 10)
    for fam in (1, 2):
        rep = cv.check_strengthening(psys, psys.center, fam, grid)
        assert rep["passes"]
        assert all(r["d_eta"] > 0 for r in rep["rows"])
    small = cv.check_strengthening(psys, psys.center, 1, [2e-3])
    assert small["rows"][0]["limit_ratio"] == pytest.approx(1.0, abs=0.05)
    fam1 = cv.check_strengthening(psys, psys.center, 1, grid)
    assert all(r["d_sigma"] < 0 for r in fam1["rows"])
