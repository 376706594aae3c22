"""The nu-approximate Riemann solver, working in Riemann coordinates.

Weak waves of each family follow a curve that is the rarefaction curve for
sigma >= -sqrt(nu), the shock curve for sigma <= -2 sqrt(nu), and a smooth
blend in between.  Rarefactions are cut into pieces at the grid v_i = j*nu;
shocks travel at a speed blended from the Rankine-Hugoniot speed and a grid
average of characteristic speeds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FanOrderingViolation, NewtonDivergence, NoChart
from .system import FluxSystem, eigenvalues, wave_speed

ZERO_WAVE = 1e-15
COMPOSITION_TOL = 1e-13
_GRID_SNAP = 1e-13


def interpolation_phi(s: float) -> float:
    """1 for s <= -2, 0 for s >= -1, quintic smoothstep in between."""
    if s <= -2.0:
        return 1.0
    if s >= -1.0:
        return 0.0
    t = s + 2.0
    return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


def interpolation_phi_prime(s: float) -> float:
    if s <= -2.0 or s >= -1.0:
        return 0.0
    t = s + 2.0
    return -30.0 * t * t * (1.0 - t) ** 2


class WState:
    """A state stored once in both coordinate systems."""

    __slots__ = ("v", "u")

    def __init__(self, v, u):
        self.v = np.asarray(v, dtype=float)
        self.u = np.asarray(u, dtype=float)

    @classmethod
    def from_u(cls, sys: FluxSystem, u) -> "WState":
        u = np.asarray(u, dtype=float)
        return cls(_chart(sys).to_riemann(u), u)

    @classmethod
    def from_v(cls, sys: FluxSystem, v) -> "WState":
        v = np.asarray(v, dtype=float)
        return cls(v, _chart(sys).to_state(v))

    def __repr__(self):
        return f"WState(v={self.v.tolist()}, u={self.u.tolist()})"


def _chart(sys: FluxSystem):
    ch = sys.chart
    if ch is None:
        raise NoChart(f"system {sys.name} has no Riemann-coordinate chart")
    return ch


@dataclass
class ElementaryWave:
    family: int
    kind: str
    left_state: WState
    right_state: WState
    speed: float
    strength: float


@dataclass
class RiemannFan:
    left_state: WState
    middle_state: WState
    right_state: WState
    sigma1: float
    sigma2: float
    waves: list = field(default_factory=list)
    nu: float = 0.0

    def state_at(self, xi: float) -> np.ndarray:
        """Physical state of the fan along the ray x = xi * t."""
        st = self.left_state
        for w in self.waves:
            if xi > w.speed:
                st = w.right_state
            else:
                break
        return st.u


def shock_curve_riemann(sys: FluxSystem, v, family: int, sigma: float, u=None):
    """Point of the i-Hugoniot locus whose i-th Riemann coordinate is v_i + sigma.

    Returns (coordinates, physical state, Rankine-Hugoniot speed).  The i-th
    coordinate is set to v_i + sigma exactly.
    """
    ch = _chart(sys)
    v = np.asarray(v, dtype=float)
    u = ch.to_state(v) if u is None else np.asarray(u, dtype=float)
    i = family - 1
    j = 1 - i
    if sigma == 0.0:
        return v.copy(), u.copy(), wave_speed(sys, u, family)
    e = np.zeros(2)
    e[i] = sigma
    u_rar = ch.to_state(v + e)
    w = (u_rar - u) / sigma
    lam = wave_speed(sys, 0.5 * (u + u_rar), family)
    fu = sys.flux(u)
    vi0 = ch.to_riemann(u)
    prev = np.inf
    for it in range(60):
        S = u + sigma * w
        A = sys.jacobian(S)
        G = ch.gradient(S)
        vS = ch.to_riemann(S)
        dd = (sys.flux(S) - fu) / sigma
        F = np.array([dd[0] - lam * w[0], dd[1] - lam * w[1], (vS[i] - vi0[i]) / sigma - 1.0])
        J = np.array([[A[0, 0] - lam, A[0, 1], -w[0]],
                      [A[1, 0], A[1, 1] - lam, -w[1]],
                      [G[i, 0], G[i, 1], 0.0]])
        d = np.linalg.solve(J, F)
        w = w - d[:2]
        lam = lam - d[2]
        size = abs(d[0]) + abs(d[1]) + abs(d[2])
        if size < 1e-14 * (1.0 + abs(lam)):
            break
        if it > 3 and size < 1e-10 and size > 0.5 * prev:
            break
        prev = size
    else:
        raise NewtonDivergence(f"Hugoniot solve in Riemann coordinates failed for sigma={sigma}")
    S = u + sigma * w
    vS = ch.to_riemann(S)
    out = np.empty(2)
    out[i] = v[i] + sigma
    out[j] = v[j] + (vS[j] - vi0[j])
    return out, S, float(lam)


def rarefaction_curve_riemann(v, family: int, sigma: float) -> np.ndarray:
    out = np.array(v, dtype=float)
    out[family - 1] += sigma
    return out


def interpolated_curve(sys: FluxSystem, v, family: int, sigma: float, nu: float) -> np.ndarray:
    phi = interpolation_phi(sigma / math.sqrt(nu))
    plus = rarefaction_curve_riemann(v, family, sigma)
    if phi == 0.0:
        return plus
    minus, _, _ = shock_curve_riemann(sys, v, family, sigma)
    if phi == 1.0:
        return minus
    return phi * minus + (1.0 - phi) * plus


def _transverse_shift(sys, v, family, sigma, nu):
    """Change of the other coordinate along the interpolated curve, and shock data."""
    phi = interpolation_phi(sigma / math.sqrt(nu))
    if phi == 0.0:
        return 0.0, None
    minus, S, lam_s = shock_curve_riemann(sys, v, family, sigma)
    j = 2 - family
    return phi * (minus[j] - v[j]), (minus, S, lam_s, phi)


def _grid_index(a: float, nu: float):
    k = round(a / nu)
    if abs(a - k * nu) <= _GRID_SNAP * max(1.0, abs(a)):
        return k, True
    return math.floor(a / nu), False


def _half_grid_speeds(sys, family, js, other, nu):
    js = np.asarray(js, dtype=float)
    vv = np.empty((len(js), 2))
    vv[:, family - 1] = (js + 0.5) * nu
    vv[:, 2 - family] = other
    return eigenvalues(sys, _chart(sys).to_state(vv))[:, family - 1]


def _rarefaction_pieces(sys, family, left: WState, right: WState, nu):
    i = family - 1
    other = left.v[1 - i]
    a, b = left.v[i], right.v[i]
    ja, _ = _grid_index(a, nu)
    jb, b_on = _grid_index(b, nu)
    cuts = [j for j in range(ja + 1, jb + (0 if b_on else 1)) if a + _GRID_SNAP < j * nu < b - _GRID_SNAP]
    if cuts and b - cuts[-1] * nu <= ZERO_WAVE:
        cuts.pop()
    cells = [ja] + cuts
    speeds = _half_grid_speeds(sys, family, cells, other, nu)
    if cuts:
        vv = np.empty((len(cuts), 2))
        vv[:, i] = np.asarray(cuts, dtype=float) * nu
        vv[:, 1 - i] = other
        uu = _chart(sys).to_state(vv)
        mids = [WState(vv[k], uu[k]) for k in range(len(cuts))]
    else:
        mids = []
    states = [left] + mids + [right]
    return [ElementaryWave(family, "rarefaction", states[k], states[k + 1], float(speeds[k]),
                           states[k + 1].v[i] - states[k].v[i]) for k in range(len(cells))]


def grid_average_speed(sys, family, left_v, lo, hi, nu):
    """Measure-weighted average of half-grid speeds over [lo, hi]."""
    i = family - 1
    other = left_v[1 - i]
    width = hi - lo
    j0 = _grid_index(lo, nu)[0]
    if width <= 0:
        return float(_half_grid_speeds(sys, family, [j0], other, nu)[0])
    js = np.arange(j0, math.floor(hi / nu) + 1)
    meas = np.minimum(hi, (js + 1) * nu) - np.maximum(lo, js * nu)
    keep = meas > 0
    sp = _half_grid_speeds(sys, family, js[keep], other, nu)
    return float(np.dot(meas[keep], sp) / width)


def _shock_wave(sys, family, left: WState, right: WState, sigma, nu, shock_data):
    i = family - 1
    lo, hi = sorted((left.v[i], left.v[i] + sigma))
    phi = 0.0 if shock_data is None else shock_data[3]
    speed_r = grid_average_speed(sys, family, left.v, lo, hi, nu) if phi < 1.0 else 0.0
    if phi > 0.0:
        lam_s = shock_data[2]
    else:
        lam_s = 0.0
    speed = phi * lam_s + (1.0 - phi) * speed_r
    return ElementaryWave(family, "shock", left, right, speed, sigma)


def _wave_family(sys, family, left, right, sigma, nu, shock_data):
    if sigma > 0:
        return _rarefaction_pieces(sys, family, left, right, nu)
    if sigma < 0:
        return [_shock_wave(sys, family, left, right, sigma, nu, shock_data)]
    return []


def solve_riemann_states(sys: FluxSystem, nu: float, left: WState, right: WState) -> RiemannFan:
    """Riemann fan between two stored states; the outer state objects are reused."""
    vl, vr = left.v, right.v
    sig = np.array([vr[0] - vl[0], vr[1] - vl[1]])

    def residual(s):
        d2, _ = _transverse_shift(sys, vl, 1, s[0], nu)
        vm = np.array([vl[0] + s[0], vl[1] + d2])
        d1, _ = _transverse_shift(sys, vm, 2, s[1], nu)
        return np.array([vm[0] + d1 - vr[0], vm[1] + s[1] - vr[1]])

    G = residual(sig)
    if np.max(np.abs(G)) > COMPOSITION_TOL:
        J = np.empty((2, 2))
        h = 1e-7
        for k in range(2):
            e = np.zeros(2)
            e[k] = h
            J[:, k] = (residual(sig + e) - residual(sig - e)) / (2 * h)
        for it in range(60):
            step = np.linalg.solve(J, G)
            sig = sig - step
            G = residual(sig)
            if np.max(np.abs(G)) <= COMPOSITION_TOL or np.max(np.abs(step)) < 1e-16:
                break
        else:
            raise NewtonDivergence("composition equations for the middle state did not converge")
        if np.max(np.abs(G)) > 1e-12:
            raise NewtonDivergence(f"middle-state residual {np.max(np.abs(G)):.3g} above 1e-12")
    s1, s2 = float(sig[0]), float(sig[1])
    d2, sd1 = _transverse_shift(sys, vl, 1, s1, nu)
    vm = np.empty(2)
    vm[1] = vl[1] + d2 if sd1 is not None else vl[1]
    vm_tmp = np.array([vl[0] + s1, vm[1]])
    d1, sd2 = _transverse_shift(sys, vm_tmp, 2, s2, nu)
    vm[0] = vr[0] - d1 if sd2 is not None else vr[0]
    if sd1 is None and sd2 is not None:
        vm[0] = vl[0] + s1
    if abs(vm[0] - vl[0]) < ZERO_WAVE and sd1 is None:
        vm[0] = vl[0]
    s1 = vm[0] - vl[0]
    s2 = vr[1] - vm[1]
    if abs(s1) < ZERO_WAVE:
        middle, s1 = left, 0.0
    elif abs(s2) < ZERO_WAVE:
        middle, s2 = right, 0.0
    else:
        middle = WState.from_v(sys, vm)
    waves = _wave_family(sys, 1, left, middle, s1, nu, sd1) + _wave_family(sys, 2, middle, right, s2, nu, sd2)
    for a, b in zip(waves, waves[1:]):
        if not b.speed > a.speed:
            raise FanOrderingViolation(f"fan speeds not increasing: {a.speed} then {b.speed}")
    return RiemannFan(left, middle, right, s1, s2, waves, nu)


def solve_riemann(sys: FluxSystem, nu: float, u_l, u_r) -> RiemannFan:
    left = WState.from_u(sys, u_l)
    right = left if np.array_equal(np.asarray(u_l, float), np.asarray(u_r, float)) else WState.from_u(sys, u_r)
    return solve_riemann_states(sys, nu, left, right)


def approx_speed_error(sys: FluxSystem, v_l, sigma: float, nu: float, family: int = 1):
    """(|Phi - shock curve|, |blended speed - Rankine-Hugoniot speed|) for sigma < 0."""
    if sigma >= 0:
        raise ValueError("approx_speed_error needs sigma < 0")
    v_l = np.asarray(v_l, dtype=float)
    phi = interpolation_phi(sigma / math.sqrt(nu))
    if phi == 1.0:
        return 0.0, 0.0
    minus, S, lam_s = shock_curve_riemann(sys, v_l, family, sigma)
    plus = rarefaction_curve_riemann(v_l, family, sigma)
    blended = phi * minus + (1.0 - phi) * plus
    i = family - 1
    lo, hi = sorted((v_l[i], v_l[i] + sigma))
    lam_r = grid_average_speed(sys, family, v_l, lo, hi, nu)
    speed = phi * lam_s + (1.0 - phi) * lam_r
    return float(np.linalg.norm(blended - minus)), float(abs(speed - lam_s))
