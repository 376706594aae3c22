"""Relative entropy quantities, pseudo-distances and the rarefaction contraction checks."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import rarefaction_path
from .errors import CRangeViolation
from .system import FluxSystem, ball_grid, eigensystem, eigenvalues

FAN_POINTS = 64


@dataclass(frozen=True)
class RelativeQuantities:
    eta_rel: float
    q_rel: float
    f_rel: np.ndarray


def eta_rel(sys: FluxSystem, a, b):
    ent = sys.require_entropy()
    a, b = np.asarray(a, float), np.asarray(b, float)
    return ent.eta(a) - ent.eta(b) - np.sum(ent.grad_eta(b) * (a - b), axis=-1)


def q_rel(sys: FluxSystem, a, b):
    ent = sys.require_entropy()
    a, b = np.asarray(a, float), np.asarray(b, float)
    return ent.q(a) - ent.q(b) - np.sum(ent.grad_eta(b) * (sys.flux(a) - sys.flux(b)), axis=-1)


def f_rel(sys: FluxSystem, a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return sys.flux(a) - sys.flux(b) - np.einsum("...ij,...j->...i", sys.jacobian(b), a - b)


def relative_quantities(sys: FluxSystem, a, b) -> RelativeQuantities:
    return RelativeQuantities(float(eta_rel(sys, a, b)), float(q_rel(sys, a, b)), np.asarray(f_rel(sys, a, b)))


def equivalence_constants(sys: FluxSystem, n: int = 15, radius: float | None = None) -> dict:
    """inf/sup of eta(a|b)/|a-b|^2 and sup |q(a;b)|/eta(a|b) over grid pairs."""
    g = ball_grid(sys, n, radius)
    A = np.repeat(g, len(g), axis=0)
    B = np.tile(g, (len(g), 1))
    d2 = np.sum((A - B) ** 2, axis=-1)
    keep = d2 > 0
    A, B, d2 = A[keep], B[keep], d2[keep]
    e = eta_rel(sys, A, B)
    q = q_rel(sys, A, B)
    ratio = e / d2
    return {"eta_lower": float(ratio.min()), "eta_upper": float(ratio.max()),
            "q_over_eta": float(np.max(np.abs(q) / e)), "min_eta": float(e.min())}


def speed_of_information(sys: FluxSystem, radius: float | None = None, n: int = 15, margin: float = 1.05) -> float:
    """Bound on wave speeds and on |q(a;b)|/eta(a|b) over the ball, times a margin."""
    lam = eigenvalues(sys, ball_grid(sys, 25, radius))
    c = float(np.max(np.abs(lam)))
    if sys.entropy is not None:
        c = max(c, equivalence_constants(sys, n, radius)["q_over_eta"])
    return c * margin


# ---------------------------------------------------------------------------
# shocks


def shock_dissipation_coefficients(sys: FluxSystem, traces, u_L, u_R, a1: float, a2: float):
    """(A, B) with D(hdot) = A - hdot * B."""
    um, up = np.asarray(traces[0], float), np.asarray(traces[1], float)
    A = a2 * float(q_rel(sys, up, u_R)) - a1 * float(q_rel(sys, um, u_L))
    B = a2 * float(eta_rel(sys, up, u_R)) - a1 * float(eta_rel(sys, um, u_L))
    return A, B


def shock_dissipation(sys: FluxSystem, traces, u_L, u_R, hdot: float, a1: float, a2: float,
                      family: int | None = None, s0: float | None = None, C1: float = 1.0,
                      check_brackets: bool = True) -> float:
    if check_brackets and family is not None and s0 is not None:
        from .fronttrack import check_weight_bracket

        check_weight_bracket(family, s0, a1, a2, C1)
    A, B = shock_dissipation_coefficients(sys, traces, u_L, u_R, a1, a2)
    return A - hdot * B


def _pc_integral(sys, xs, states, lo, hi, target):
    """int_lo^hi eta(u|target) for the piecewise-constant u (breakpoints xs, len+1 states)."""
    if hi <= lo:
        return 0.0
    xs = np.asarray(xs, float)
    inner = xs[(xs > lo) & (xs < hi)]
    cuts = np.concatenate([[lo], inner, [hi]])
    mid = 0.5 * (cuts[1:] + cuts[:-1])
    idx = np.searchsorted(xs, mid, side="right")
    vals = eta_rel(sys, np.asarray(states)[idx], np.broadcast_to(target, (len(idx), 2)))
    return float(np.sum(vals * np.diff(cuts)))


def shock_pseudodistance(sys: FluxSystem, u_num, u_L, u_R, h: float, a1: float, a2: float, interval) -> float:
    """a1 int_{lo}^{h} eta(u|u_L) + a2 int_{h}^{hi} eta(u|u_R) at the current time of u_num."""
    lo, hi = interval
    xs, states = u_num.positions(), u_num.state_array()
    hc = min(max(h, lo), hi)
    return a1 * _pc_integral(sys, xs, states, lo, hc, np.asarray(u_L, float)) + \
        a2 * _pc_integral(sys, xs, states, hc, hi, np.asarray(u_R, float))


def front_entropy_rates(sys: FluxSystem, sol) -> np.ndarray:
    """[q] - speed [eta] across each front; nonpositive for admissible shocks."""
    ent = sys.require_entropy()
    out = []
    for f in sol.fronts:
        ul, ur = f.left.u, f.right.u
        out.append(float((ent.q(ur) - ent.q(ul)) - f.speed * (ent.eta(ur) - ent.eta(ul))))
    return np.array(out)


# ---------------------------------------------------------------------------
# rarefactions


class RarefactionProfile:
    """Exact centered rarefaction from u_L of strength s0, tabulated along its curve."""

    def __init__(self, sys: FluxSystem, base, family: int, s0: float, n_table: int = 401):
        if s0 <= 0:
            raise ValueError("rarefaction strength must be positive")
        self.sys = sys
        self.base = np.asarray(base, dtype=float)
        self.family = int(family)
        self.s0 = float(s0)
        self.s_table = np.linspace(0.0, self.s0, n_table)
        _, self.u_table = rarefaction_path(sys, self.base, family, self.s_table)
        self.lam_table = eigenvalues(sys, self.u_table)[:, family - 1]
        if np.any(np.diff(self.lam_table) <= 0):
            raise ValueError("wave speed is not increasing along the rarefaction curve")
        self.u_R = self.u_table[-1]
        self.v_L = float(self.lam_table[0])
        self.v_R = float(self.lam_table[-1])

    def y(self, t: float, x):
        xi = np.asarray(x, dtype=float) / t
        return np.interp(xi, self.lam_table, self.s_table)

    def state_of_y(self, y):
        y = np.asarray(y, dtype=float)
        return np.stack([np.interp(y, self.s_table, self.u_table[:, k]) for k in (0, 1)], axis=-1)

    def ubar(self, t: float, x):
        return self.state_of_y(self.y(t, x))

    def weight(self, t: float, x, C: float):
        sign = -1.0 if self.family == 1 else 1.0
        return np.exp(sign * C * self.y(t, x))

    def sigma_bar(self) -> float:
        return abs(self.v_R - self.v_L) + float(np.max(np.linalg.norm(self.u_table - self.base, axis=-1)))


def rarefaction_weight(profile: RarefactionProfile, t: float, x, C: float, C2: float | None = None):
    if C2 is not None and not (C2 / 4 <= C <= 4 * C2):
        raise CRangeViolation(f"C = {C} outside [{C2 / 4}, {4 * C2}]")
    return profile.weight(t, x, C)


def rarefaction_pseudodistance(sys: FluxSystem, u_num, profile: RarefactionProfile, t: float, C: float,
                               interval) -> float:
    """int a(t,x) eta(u|ubar) over the interval; Simpson inside the fan, exact outside."""
    lo, hi = interval
    xs, states = u_num.positions(), u_num.state_array()
    xl, xr = profile.v_L * t, profile.v_R * t
    a_l = float(profile.weight(t, xl - 1.0, C))
    a_r = float(profile.weight(t, xr + 1.0, C))
    total = a_l * _pc_integral(sys, xs, states, lo, min(xl, hi), profile.base)
    total += a_r * _pc_integral(sys, xs, states, max(xr, lo), hi, profile.u_R)
    flo, fhi = max(xl, lo), min(xr, hi)
    if fhi > flo:
        ys = np.linspace(0.0, profile.s0, FAN_POINTS + 1)
        grid = t * np.interp(ys, profile.s_table, profile.lam_table)
        cuts = np.unique(np.concatenate([[flo, fhi], grid[(grid > flo) & (grid < fhi)],
                                         xs[(xs > flo) & (xs < fhi)]]))
        a, b = cuts[:-1], cuts[1:]
        m = 0.5 * (a + b)
        idx = np.searchsorted(xs, m, side="right")
        u = states[idx]

        def g(x):
            return profile.weight(t, x, C) * eta_rel(sys, u, profile.ubar(t, x))

        total += float(np.sum((b - a) / 6.0 * (g(a) + 4 * g(m) + g(b))))
    return total


def positivity_lhs(sys: FluxSystem, u, ubar, C: float, family: int = 1):
    """Extra terms of the weighted rarefaction inequality; positive means contraction."""
    u, ubar = np.atleast_2d(u), np.atleast_2d(ubar)
    ent = sys.require_entropy()
    lam = eigenvalues(sys, ubar)[:, family - 1]
    r = np.array([eigensystem(sys, b, check_domain=False).r(family) for b in ubar])
    cross = np.einsum("ni,nij,nj->n", r, ent.hess_eta(ubar), f_rel(sys, u, ubar))
    core = q_rel(sys, u, ubar) - lam * eta_rel(sys, u, ubar)
    sign = 1.0 if family == 1 else -1.0
    return sign * C * core + cross


def positivity_scan(sys: FluxSystem, ubar_grid, perturbation_grid, C: float, family: int = 1) -> dict:
    """min over the product grid of the extra terms divided by |u - ubar|^2."""
    ub = np.atleast_2d(np.asarray(ubar_grid, float))
    dp = np.atleast_2d(np.asarray(perturbation_grid, float))
    dp = dp[np.linalg.norm(dp, axis=-1) > 0]
    U = (ub[:, None, :] + dp[None, :, :]).reshape(-1, 2)
    B = np.repeat(ub, len(dp), axis=0)
    lhs = positivity_lhs(sys, U, B, C, family)
    quot = lhs / np.sum((U - B) ** 2, axis=-1)
    m = float(quot.min())
    return {"C": C, "min_quotient": m, "K3_est": 2.0 * m, "passes": bool(m > 0)}


def perturbation_rings(radii, n_angles: int = 32) -> np.ndarray:
    th = np.linspace(0, 2 * np.pi, n_angles, endpoint=False)
    return np.concatenate([r * np.stack([np.cos(th), np.sin(th)], -1) for r in radii])


def minimal_weight_constant(sys: FluxSystem, ubar_grid, perturbation_grid, family: int = 1,
                            c_max: float = 1e4) -> float:
    """Smallest C making the positivity scan pass, by bisection on a log scale."""
    lo, hi = 0.0, 1.0
    while not positivity_scan(sys, ubar_grid, perturbation_grid, hi, family)["passes"]:
        lo, hi = hi, hi * 2
        if hi > c_max:
            return math.inf
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if positivity_scan(sys, ubar_grid, perturbation_grid, mid, family)["passes"]:
            hi = mid
        else:
            lo = mid
    return hi


def fan_estimate_terms(sys: FluxSystem, history, profile: RarefactionProfile, v: float, t: float,
                       a1: float = 1.0, a2: float = 1.0) -> dict:
    """Time-integrated flux difference along the ray x = v tau and its bound ingredients.

    ``history`` yields (t0, t1, snapshot) triples of a front-tracking run
    (see fronttrack.iter_intervals); traces on the ray are exact because the
    snapshot is piecewise constant between events.
    """
    if not (min(profile.v_L, profile.v_R) - 1e-14 <= v <= max(profile.v_L, profile.v_R) + 1e-14):
        raise ValueError("ray speed outside the fan")
    u_L, u_R = profile.base, profile.u_R
    lhs = 0.0
    mass = 0.0
    for t0, t1, snap in history:
        if t0 >= t:
            break
        t1 = min(t1, t)
        if t1 <= t0:
            continue
        # split the interval where the ray meets a front
        pos0 = snap.positions()
        spd = snap.speeds()
        with np.errstate(divide="ignore", invalid="ignore"):
            tc = t0 + (pos0 - v * t0) / (v - spd)
        cuts = np.unique(np.concatenate([[t0, t1], tc[(tc > t0) & (tc < t1)]]))
        for a, b in zip(cuts[:-1], cuts[1:]):
            tm = 0.5 * (a + b)
            xs = pos0 + spd * (tm - t0)
            k = int(np.searchsorted(xs, v * tm, side="right"))
            states = snap.state_array()
            on_ray = k > 0 and abs(xs[k - 1] - v * tm) <= 1e-12 * (1 + abs(v * tm))
            um = states[k - 1] if on_ray else states[k]
            up = states[k]
            val = a2 * (float(q_rel(sys, up, u_R)) - v * float(eta_rel(sys, up, u_R))) - \
                a1 * (float(q_rel(sys, um, u_L)) - v * float(eta_rel(sys, um, u_L)))
            lhs += val * (b - a)
        mass += interval_dissipation_mass(sys, snap, profile, t0, t1)
    sb = profile.sigma_bar()
    return {"lhs": lhs, "sigma_bar": sb, "sigma_bar_sq_t": sb * sb * t, "sigma_bar_mass": sb * mass,
            "dissipation_mass": mass}


def interval_dissipation_mass(sys: FluxSystem, snap, profile: RarefactionProfile, t0: float, t1: float) -> float:
    """Entropy dissipation of an event-free snapshot inside the fan cone over [t0, t1]."""
    rates = front_entropy_rates(sys, snap)
    mass = 0.0
    for k, f in enumerate(snap.fronts):
        if rates[k] >= 0:
            continue
        lo_t, hi_t = _time_in_cone(f.position(t0), f.speed, t0, t1, profile.v_L, profile.v_R)
        mass += -rates[k] * max(0.0, hi_t - lo_t)
    return float(mass)


def _time_in_cone(x0, s, t0, t1, vl, vr):
    """Subinterval of [t0, t1] where vl tau <= x0 + s (tau - t0) <= vr tau."""
    lo, hi = t0, t1
    for c, sign in ((vl, 1.0), (vr, -1.0)):
        # sign * (x0 + s(tau - t0) - c tau) >= 0
        slope = sign * (s - c)
        val0 = sign * (x0 - c * t0)
        if abs(slope) < 1e-300:
            if val0 < 0:
                return t0, t0
            continue
        root = t0 - val0 / slope
        if slope > 0:
            lo = max(lo, root)
        else:
            hi = min(hi, root)
    return lo, max(lo, hi)

