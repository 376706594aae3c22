"""Rarefaction and shock curves, Riemann invariants, strengthening checks."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContinuationFailure, LaxViolation, LeftDomain, NoChart
from .system import FluxSystem, eigensystem, wave_speed

RK4_STEP = 1e-3
CONTINUATION_STEP = 1e-3
NEWTON_TOL = 1e-12
LAX_TOL = 1e-12


@dataclass(frozen=True)
class WaveCurvePoint:
    s: float
    state: np.ndarray
    sigma: float
    kind: str

    def as_row(self) -> tuple:
        return (self.s, float(self.state[0]), float(self.state[1]), self.sigma)


def _r_field(sys: FluxSystem, u, family: int) -> np.ndarray:
    return eigensystem(sys, u, check_domain=False).r(family)


def _rk4_segment(sys, u, family, s_from, s_to, check_domain):
    n = max(1, int(math.ceil(abs(s_to - s_from) / RK4_STEP - 1e-12)))
    h = (s_to - s_from) / n
    for _ in range(n):
        k1 = _r_field(sys, u, family)
        k2 = _r_field(sys, u + 0.5 * h * k1, family)
        k3 = _r_field(sys, u + 0.5 * h * k2, family)
        k4 = _r_field(sys, u + h * k3, family)
        u = u + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if check_domain and not sys.contains(u):
            raise LeftDomain(f"rarefaction curve left the ball of {sys.name} at {u}")
    return u


def rarefaction_path(sys: FluxSystem, base, family: int, s_values, check_domain: bool = True):
    """States R(s) at each requested (signed) arclength, by fixed-step RK4."""
    base = np.asarray(base, dtype=float)
    s_values = np.asarray(s_values, dtype=float)
    out = np.empty((len(s_values), 2))
    for sign in (1.0, -1.0):
        idx = [k for k in np.argsort(sign * s_values) if sign * s_values[k] >= 0]
        u, s_prev = base.copy(), 0.0
        for k in idx:
            u = _rk4_segment(sys, u, family, s_prev, s_values[k], check_domain)
            s_prev = s_values[k]
            out[k] = u
    return s_values, out


def rarefaction_curve(sys: FluxSystem, base, family: int, s: float) -> WaveCurvePoint:
    base = np.asarray(base, dtype=float)
    if s == 0:
        return WaveCurvePoint(0.0, base.copy(), float("nan"), "rarefaction")
    _, pts = rarefaction_path(sys, base, family, [s])
    return WaveCurvePoint(float(s), pts[0], float("nan"), "rarefaction")


def _newton_hugoniot(sys, base, t, w, lam):
    """Solve (f(base + t w) - f(base))/t = lam w, |w| = 1 for (w, lam)."""
    fb = sys.flux(base)
    for _ in range(40):
        S = base + t * w
        A = sys.jacobian(S)
        if t != 0.0:
            dd = (sys.flux(S) - fb) / t
        else:
            dd = A @ w
        F = np.array([dd[0] - lam * w[0], dd[1] - lam * w[1], w @ w - 1.0])
        J = np.array([[A[0, 0] - lam, A[0, 1], -w[0]],
                      [A[1, 0], A[1, 1] - lam, -w[1]],
                      [2 * w[0], 2 * w[1], 0.0]])
        try:
            d = np.linalg.solve(J, F)
        except np.linalg.LinAlgError as exc:
            raise ContinuationFailure(f"singular Hugoniot Jacobian at t={t}") from exc
        w = w - d[:2]
        lam = lam - d[2]
        if np.max(np.abs(d)) < NEWTON_TOL:
            return w, lam
    raise ContinuationFailure(f"Hugoniot Newton stalled at t={t}")


def shock_path(sys: FluxSystem, base, family: int, s_values, side: str = "left", check_lax: bool = True,
               cap_slack: float = 1.0):
    """Shock states and speeds at each s >= 0 by continuation from s = 0.

    side='left': base is the left state, S = base - s r + O(s^2) is the right state.
    side='right': base is the right state, S = base + s r + O(s^2) is the left state.
    """
    base = np.asarray(base, dtype=float)
    sgn = -1.0 if side == "left" else 1.0
    s_values = np.asarray(s_values, dtype=float)
    if np.any(s_values < 0):
        raise ValueError("shock curve parameter must be nonnegative")
    if np.any(s_values > sys.s_max * cap_slack * (1 + 1e-12)):
        raise ContinuationFailure(f"s beyond continuation cap {sys.s_max} of {sys.name}")
    e = eigensystem(sys, base)
    w, lam = e.r(family).copy(), e.lam(family)
    lam_base = lam
    pts = [None] * len(s_values)
    s_prev = 0.0
    w_prev, lam_prev, s_pp = w, lam, 0.0
    for k in np.argsort(s_values):
        s_target = float(s_values[k])
        n = max(1, int(math.ceil((s_target - s_prev) / CONTINUATION_STEP - 1e-12))) if s_target > s_prev else 0
        h = (s_target - s_prev) / n if n else 0.0
        for m in range(n):
            s_new = s_prev + h
            if s_prev > s_pp:
                fac = (s_new - s_prev) / (s_prev - s_pp)
                w_guess = w + fac * (w - w_prev)
                lam_guess = lam + fac * (lam - lam_prev)
            else:
                w_guess, lam_guess = w, lam
            w_prev, lam_prev, s_pp = w, lam, s_prev
            w, lam = _newton_hugoniot(sys, base, sgn * s_new, w_guess, lam_guess)
            s_prev = s_new
        S = base + sgn * s_target * w
        if not sys.contains(S):
            raise LeftDomain(f"shock curve left the ball of {sys.name} at {S}")
        if check_lax and s_target > 0:
            lam_S = wave_speed(sys, S, family)
            lo, hi = (lam_S, lam_base) if side == "left" else (lam_base, lam_S)
            if not (lo - LAX_TOL < lam < hi + LAX_TOL):
                raise LaxViolation(f"Lax inequalities fail at s={s_target}: {lo} < {lam} < {hi}")
        pts[k] = WaveCurvePoint(s_target, S, float(lam), "shock")
    return pts


def shock_curve(sys: FluxSystem, base, family: int, s: float, side: str = "left") -> WaveCurvePoint:
    return shock_path(sys, base, family, [s], side=side)[0]


def rh_residual(sys: FluxSystem, left, right, sigma: float) -> float:
    left, right = np.asarray(left, float), np.asarray(right, float)
    return float(np.linalg.norm(sys.flux(right) - sys.flux(left) - sigma * (right - left)))


def riemann_invariants(sys: FluxSystem, u) -> tuple[float, float]:
    if sys.chart is None:
        raise NoChart(f"system {sys.name} has no Riemann-coordinate chart")
    v = sys.chart.to_riemann(np.asarray(u, dtype=float))
    return float(v[0]), float(v[1])


def riemann_invariants_inverse(sys: FluxSystem, v) -> np.ndarray:
    if sys.chart is None:
        raise NoChart(f"system {sys.name} has no Riemann-coordinate chart")
    return sys.chart.to_state(np.asarray(v, dtype=float))


def second_order_direction(sys: FluxSystem, u, family: int, h: float = 1e-5) -> np.ndarray:
    """Directional derivative (Dr_i) r_i at u by central differences."""
    u = np.asarray(u, dtype=float)
    r = _r_field(sys, u, family)
    return (_r_field(sys, u + h * r, family) - _r_field(sys, u - h * r, family)) / (2 * h)


def shock_expansion_residuals(sys: FluxSystem, base, family: int, s_values) -> dict:
    """Residuals of the second-order state expansion and the averaged-speed rule."""
    base = np.asarray(base, dtype=float)
    r = _r_field(sys, base, family)
    rr = second_order_direction(sys, base, family)
    lam_b = wave_speed(sys, base, family)
    pts = shock_path(sys, base, family, s_values)
    state_res, speed_res = [], []
    for p in pts:
        pred = base - r * p.s + 0.5 * p.s ** 2 * rr
        state_res.append(float(np.linalg.norm(p.state - pred)))
        speed_res.append(abs(p.sigma - 0.5 * (lam_b + wave_speed(sys, p.state, family))))
    return {"s": np.asarray(s_values, float), "state": np.array(state_res), "speed": np.array(speed_res)}


def check_strengthening(sys: FluxSystem, base, family: int, s_grid, h: float | None = None) -> dict:
    """Centered-difference derivatives of eta(base|S(s)) and sigma(s).

    Family 1 uses the left state as base, family 2 the right state, so the
    expected signs are d eta/ds > 0 always and d sigma/ds < 0 (family 1),
    > 0 (family 2).
    """
    ent = sys.require_entropy()
    base = np.asarray(base, dtype=float)
    side = "left" if family == 1 else "right"
    s_grid = np.asarray(s_grid, dtype=float)
    hh = np.array([h if h is not None else min(1e-4, s / 4) for s in s_grid])
    query = np.concatenate([s_grid - hh, s_grid + hh])
    pts = shock_path(sys, base, family, query, side=side, cap_slack=1.05)
    n = len(s_grid)

    def rel(b):
        return float(ent.eta(base) - ent.eta(b) - ent.grad_eta(b) @ (base - b))

    e = eigensystem(sys, base)
    r = e.r(family)
    curv = float(r @ ent.hess_eta(base) @ r)
    rows = []
    for k in range(n):
        lo, hi = pts[k], pts[n + k]
        d_eta = (rel(hi.state) - rel(lo.state)) / (2 * hh[k])
        d_sigma = (hi.sigma - lo.sigma) / (2 * hh[k])
        sign_ok = d_sigma < 0 if family == 1 else d_sigma > 0
        rows.append({"s": float(s_grid[k]), "d_eta": d_eta, "d_sigma": d_sigma,
                     "limit_ratio": d_eta / (curv * s_grid[k]), "ok": bool(d_eta > 0 and sign_ok)})
    return {"family": family, "side": side, "rows": rows, "passes": all(r["ok"] for r in rows)}
