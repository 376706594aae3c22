import json
import math

import numpy as np
import pytest
import sympy as sp

from ftlab import system as sy
from ftlab.errors import NoEntropy, NonHyperbolic, OutOfDomain


def test_builtin_registry(asys, psys, lin):
    names = {s.name for s in sy.builtin_systems()}
    assert {"appendix-a-quadratic", "p-system-gamma2", "linear-advection2"} <= names
    assert np.array_equal(asys.center, [0.0, 0.0])
    assert asys.entropy is None
    assert psys.entropy is not None
    H = lin.hessian(np.array([[0.1, -0.2], [0.3, 0.0]]))
    assert np.all(H == 0)
    with pytest.raises(KeyError):
        sy.get_system("no-such-system")


def test_appendix_a_eigensystem_at_origin(asys):
    e = sy.eigensystem(asys, [0.0, 0.0])
    assert e.lambda1 == pytest.approx(-2.0, abs=1e-14)
    assert e.lambda2 == pytest.approx(2.0, abs=1e-14)
    assert np.allclose(np.abs(e.r1), [1, 0]) and np.allclose(np.abs(e.r2), [0, 1])


def test_diagonal_jacobian_eigenvalues(burgers):
    e = sy.eigensystem(burgers, burgers.center)
    assert (e.lambda1, e.lambda2) == pytest.approx((0.0, 2.0))


def test_p_system_eigenvalues_symbolic(psys):
    v, w, lam = sp.symbols("v w lam")
    f = sp.Matrix([-w, v ** -2])
    J = f.jacobian([v, w])
    roots = sorted(float(r) for r in sp.solve((J - lam * sp.eye(2)).det().subs({v: 1, w: 0}), lam))
    e = sy.eigensystem(psys, [1.0, 0.0])
    assert (e.lambda1, e.lambda2) == pytest.approx(roots, abs=1e-13)
    assert roots[1] == pytest.approx(math.sqrt(2))


def test_eigendata_invariants(psys, asys, rng):
    for S in (psys, asys):
        for u in sy.ball_grid(S, 11):
            e = sy.eigensystem(S, u)
            assert e.lambda2 - e.lambda1 > sy.HYPERBOLICITY_GAP
            L = np.array([e.l1, e.l2])
            R = np.array([e.r1, e.r2]).T
            assert np.allclose(L @ R, np.eye(2), atol=1e-10)
            assert np.linalg.norm(e.r1) == pytest.approx(1.0) and np.linalg.norm(e.r2) == pytest.approx(1.0)
            for i in (1, 2):
                assert sy.gnl_value(S, u, i, e) > 0


def test_domain_and_hyperbolicity_errors(psys):
    with pytest.raises(OutOfDomain):
        sy.eigensystem(psys, [2.0, 0.0])
    degenerate = sy.make_linear_system(A=((1.0, 0.0), (0.0, 1.0)))
    with pytest.raises(NonHyperbolic):
        sy.eigensystem(degenerate, [0.0, 0.0])


def test_genuine_nonlinearity_values(asys, burgers, lin):
    rows = sy.check_genuine_nonlinearity(asys, [[0.0, 0.0]])
    assert rows[0]["gnl_value"] == pytest.approx(2.0)
    rows = sy.check_genuine_nonlinearity(burgers, [[0.0, 0.0]])
    assert [r["gnl_value"] for r in rows] == pytest.approx([1.0, 1.0])
    rows = sy.check_genuine_nonlinearity(lin, [[0.1, 0.2]])
    assert all(r["gnl_value"] == 0 and not r["ok"] for r in rows)


def test_smoller_johnson(asys, lin, psys):
    rep = sy.check_smoller_johnson(asys, [[0.0, 0.0]])
    fam1 = [r for r in rep["rows"] if r["family"] == 1][0]
    assert fam1["sj_value"] == pytest.approx(-2.0)
    assert rep["verdict"] == "FAILS"
    assert sy.check_smoller_johnson(lin, sy.ball_grid(lin, 7))["verdict"] == "PASSES"
    # every point of a small ball around the origin fails for the quadratic flux
    grid = sy.ball_grid(asys, 20, 0.1)
    vals = [sy.cross_value(asys, u, 1) for u in grid]
    assert max(vals) < 0


def test_p_system_cross_terms_symbolic(psys):
    # independent oracle: eigenvectors and second derivative of (-w, v^-2) with sympy
    v = sp.symbols("v", positive=True)
    c = sp.sqrt(2 * v ** -3)
    r1 = sp.Matrix([1, c]) / sp.sqrt(1 + c ** 2)
    r2 = sp.Matrix([-1, c]) / sp.sqrt(1 + c ** 2)
    R = sp.Matrix.hstack(r1, r2)
    Linv = R.inv()
    fvv = sp.diff(v ** -2, v, 2)

    def cross(i, j):
        rj = R[:, j]
        vec = sp.Matrix([0, fvv * rj[0] ** 2])
        return float((Linv[i, :] * vec)[0].subs(v, 1.0))

    for u in ([1.0, 0.0],):
        got1 = sy.cross_value(psys, u, 1)
        got2 = sy.cross_value(psys, u, 2)
        assert abs(got1) == pytest.approx(abs(cross(0, 1)), rel=1e-10)
        assert abs(got2) == pytest.approx(abs(cross(1, 0)), rel=1e-10)
    rep = sy.check_smoller_johnson(psys, sy.ball_grid(psys, 9, 0.1))
    assert rep["verdict"] in ("PASSES", "FAILS")


def test_entropy_pair(psys, lin):
    grid = sy.ball_grid(psys, 15)
    rep = sy.check_entropy_pair(psys, grid)
    assert rep["max_residual"] < 1e-10 and rep["passes"] and rep["hessian_positive_definite"]
    ent = psys.entropy
    bad = sy.FluxSystem(psys.name, psys.flux, psys.jacobian, psys.hessian, psys.center, psys.radius,
                        sy.EntropyPair(ent.eta, ent.grad_eta, ent.hess_eta, lambda u: ent.q(u) + u[..., 0]))
    rep = sy.check_entropy_pair(bad, [[1.0, 0.0], [1.1, 0.1]])
    assert rep["max_residual"] == pytest.approx(1.0, abs=1e-8)
    assert not rep["passes"]
    assert sy.check_entropy_pair(lin, sy.ball_grid(lin, 9))["max_residual"] < 1e-12


def test_no_entropy_error(asys):
    with pytest.raises(NoEntropy):
        sy.check_entropy_pair(asys, [[0.0, 0.0]])


def test_finite_difference_orders(psys, asys):
    for S in (psys, asys):
        u = S.center + np.array([0.03, -0.02])
        hs = np.array([1e-2, 5e-3, 2.5e-3, 1.25e-3])
        ej = [np.abs(sy.jacobian_fd(S, u, h) - S.jacobian(u)).max() for h in hs]
        slope = np.polyfit(np.log(hs), np.log(ej), 1)[0]
        assert abs(slope - 1.0) < 0.3
    u = psys.center + np.array([0.03, -0.02])
    eh = [np.abs(sy.hessian_fd(psys, u, h) - psys.hessian(u)).max() for h in hs]
    assert abs(np.polyfit(np.log(hs), np.log(eh), 1)[0] - 1.0) < 0.3


def test_hypothesis_report_is_json(asys):
    rows = sy.hypothesis_report(asys, [[0.0, 0.0]])
    text = json.dumps(rows)
    assert set(rows[0]) == {"state", "family", "gnl_value", "sj_value", "verdict"}
    assert "sj-fails" in text
