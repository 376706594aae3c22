"""Event-driven front tracking with Glimm functional bookkeeping.

A :class:`PiecewiseSolution` holds the leftmost state and an ordered list of
fronts.  Each front stores its position at a reference time together with a
constant speed, so positions between events are exact affine functions of
time.  ``advance`` repeatedly finds the earliest collision of adjacent
fronts, solves the Riemann problem between the outer states and splices the
resulting fan in.  In shifted mode, shock fronts instead follow a shift speed
computed from the traces of a companion solution.
"""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import (
    DomainViolation,
    InteractionOverflow,
    TraceUnavailable,
    WeightBracketViolation,
)
from .riemann import WState, shock_curve_riemann, solve_riemann_states
from .system import FluxSystem, ball_grid, eigenvalues

DEFAULT_KAPPA = 40.0
DEFAULT_EPSILON = 0.5
INTERACTION_CAP = 1_000_000
SHIFT_FLOOR = 1e-10
_POS_TOL = 1e-12


@dataclass(eq=False)
class Front:
    x: float
    t_ref: float
    speed: float
    family: int
    kind: str
    sigma: float
    left: WState
    right: WState
    classical_speed: float = float("nan")

    def position(self, t: float) -> float:
        return self.x + self.speed * (t - self.t_ref)

    def rebase(self, t: float) -> None:
        self.x = self.position(t)
        self.t_ref = t


@dataclass
class InteractionRecord:
    time: float
    position: float
    incoming: list
    outgoing: list
    delta_U: float
    delta_Q: float
    delta_V: float
    V_before: float = 0.0
    Q_before: float = 0.0
    V_after: float = 0.0
    Q_after: float = 0.0
    incoming_kinds: list = field(default_factory=list)
    outgoing_kinds: list = field(default_factory=list)
    pair: tuple = ()


@dataclass(frozen=True)
class GlimmFunctionals:
    V: float
    Q: float
    U: float
    kappa: float


@dataclass
class ShiftRecord:
    time: float
    family: int
    sigma: float
    hdot: float
    dissipation: float
    rh_speed: float
    a1: float
    a2: float


@dataclass
class ShiftConfig:
    C1: float = 1.0
    kappa: float = DEFAULT_KAPPA
    intervals: dict = field(default_factory=dict)
    check_brackets: bool = True


@dataclass(frozen=True)
class _FrontArrays:
    x: np.ndarray
    t_ref: np.ndarray
    speed: np.ndarray
    family: np.ndarray
    sigma: np.ndarray

    def splice(self, a: int, b: int, new: list) -> "_FrontArrays":
        def cat(old, vals, dtype=float):
            return np.concatenate([old[:a], np.asarray(vals, dtype=dtype), old[b:]])

        return _FrontArrays(cat(self.x, [f.x for f in new]), cat(self.t_ref, [f.t_ref for f in new]),
                            cat(self.speed, [f.speed for f in new]),
                            cat(self.family, [f.family for f in new], np.int64),
                            cat(self.sigma, [f.sigma for f in new]))


class PiecewiseSolution:
    def __init__(self, sys: FluxSystem, nu: float, time: float, leftmost: WState, fronts: list,
                 kappa: float = DEFAULT_KAPPA, epsilon: float = DEFAULT_EPSILON,
                 max_interactions: int = INTERACTION_CAP):
        self.sys = sys
        self.nu = float(nu)
        self.time = float(time)
        self.leftmost = leftmost
        self.fronts = list(fronts)
        self.mode = "classical"
        self.interaction_log: list[InteractionRecord] = []
        self.shift_log: list[ShiftRecord] = []
        self.kappa = float(kappa)
        self.epsilon = float(epsilon)
        self.max_interactions = int(max_interactions)
        self.companion: PiecewiseSolution | None = None
        self.shift: ShiftConfig | None = None
        self.n_events = 0
        self._cache: _FrontArrays | None = None

    def _arrays(self) -> "_FrontArrays":
        """Per-front scalars as arrays, rebuilt after any change not made by _resolve."""
        c = self._cache
        if c is None or len(c.x) != len(self.fronts):
            fr = self.fronts
            c = _FrontArrays(np.array([f.x for f in fr], dtype=float), np.array([f.t_ref for f in fr], dtype=float),
                             np.array([f.speed for f in fr], dtype=float),
                             np.array([f.family for f in fr], dtype=np.int64),
                             np.array([f.sigma for f in fr], dtype=float))
            self._cache = c
        return c

    def invalidate(self) -> None:
        """Drop cached front arrays; call after mutating fronts directly."""
        self._cache = None

    # -- views -------------------------------------------------------------
    def positions(self, t: float | None = None) -> np.ndarray:
        t = self.time if t is None else t
        c = self._arrays()
        return c.x + c.speed * (t - c.t_ref)

    def speeds(self) -> np.ndarray:
        return self._arrays().speed.copy()

    def states(self) -> list[WState]:
        return [self.leftmost] + [f.right for f in self.fronts]

    def state_array(self) -> np.ndarray:
        return np.array([s.u for s in self.states()], dtype=float)

    def state_at(self, x: float, side: str = "right") -> np.ndarray:
        pos = self.positions()
        k = int(np.searchsorted(pos, x, side="right" if side == "right" else "left"))
        return self.states()[k].u

    def copy(self) -> "PiecewiseSolution":
        new = copy.copy(self)
        new.fronts = [copy.copy(f) for f in self.fronts]
        new.interaction_log = list(self.interaction_log)
        new.shift_log = list(self.shift_log)
        if self.companion is not None:
            new.companion = self.companion.copy()
        return new

    def to_dict(self) -> dict:
        return {
            "system": self.sys.name,
            "nu": self.nu,
            "time": self.time,
            "mode": self.mode,
            "leftmost_state": self.leftmost.u.tolist(),
            "fronts": [
                {"x": f.position(self.time), "speed": f.speed, "family": f.family, "kind": f.kind,
                 "sigma": f.sigma, "left": f.left.u.tolist(), "right": f.right.u.tolist()}
                for f in self.fronts
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def sample(self, xs) -> np.ndarray:
        """Profile values on a grid (right-continuous at fronts)."""
        xs = np.asarray(xs, dtype=float)
        idx = np.searchsorted(self.positions(), xs, side="right")
        return self.state_array()[idx]

    def profile_csv(self, xs) -> str:
        vals = self.sample(xs)
        lines = ["x,u1,u2"] + [f"{x!r},{a!r},{b!r}" for x, (a, b) in zip(np.asarray(xs, float), vals)]
        return "\n".join(lines) + "\n"

    def interaction_csv(self) -> str:
        lines = ["time,position,n_in,n_out,delta_V,delta_Q,delta_U"]
        for r in self.interaction_log:
            lines.append(f"{r.time!r},{r.position!r},{len(r.incoming)},{len(r.outgoing)},"
                         f"{r.delta_V!r},{r.delta_Q!r},{r.delta_U!r}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Glimm functionals


def glimm_from_waves(families, sigmas, kappa: float) -> GlimmFunctionals:
    sig = np.asarray(sigmas, dtype=float)
    V = float(np.sum(np.abs(sig)))
    Q = kernels.glimm_q(np.asarray(families, dtype=np.int64), sig) if len(sig) else 0.0
    return GlimmFunctionals(V, Q, V + kappa * Q, kappa)


def glimm_functionals(sol: PiecewiseSolution, kappa: float | None = None) -> GlimmFunctionals:
    k = sol.kappa if kappa is None else kappa
    c = sol._arrays()
    return glimm_from_waves(c.family, c.sigma, k)


def approaching(fam_a: int, sig_a: float, fam_b: int, sig_b: float) -> bool:
    """Whether wave a (left) and wave b (right) approach each other."""
    if fam_a > fam_b:
        return True
    return fam_a == fam_b and min(sig_a, sig_b) < 0


# ---------------------------------------------------------------------------
# construction


def _fronts_from_fan(fan, x: float, t: float) -> list[Front]:
    return [Front(x, t, w.speed, w.family, w.kind, float(w.strength), w.left_state, w.right_state, w.speed)
            for w in fan.waves]


def init_solution(sys: FluxSystem, nu: float, step_data, kappa: float = DEFAULT_KAPPA,
                  epsilon: float = DEFAULT_EPSILON, time: float = 0.0,
                  max_interactions: int = INTERACTION_CAP) -> PiecewiseSolution:
    """Front-tracking data from a step function.

    ``step_data`` is a list of (x_k, state_k): state_0 holds on (-inf, x_1)
    (its x is ignored) and state_k on (x_k, x_{k+1}).
    """
    data = [(float(x), np.asarray(u, dtype=float)) for x, u in step_data]
    if not data:
        raise ValueError("step data must contain at least one state")
    for _, u in data:
        if not sys.contains(u):
            raise DomainViolation(f"initial state {u} outside the ball of {sys.name}")
    xs = [x for x, _ in data[1:]]
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValueError("jump positions must be strictly increasing")
    states = [WState.from_u(sys, data[0][1])]
    for _, u in data[1:]:
        if np.array_equal(u, states[-1].u):
            states.append(states[-1])
        else:
            states.append(WState.from_u(sys, u))
    fronts: list[Front] = []
    for k, x in enumerate(xs):
        if states[k] is states[k + 1]:
            continue
        fan = solve_riemann_states(sys, nu, states[k], states[k + 1])
        fronts.extend(_fronts_from_fan(fan, x, time))
    sol = PiecewiseSolution(sys, nu, time, states[0], fronts, kappa, epsilon, max_interactions)
    _relink(sol)
    g = glimm_functionals(sol)
    if g.U >= epsilon:
        raise DomainViolation(f"U = {g.U:.4g} is not below epsilon = {epsilon}")
    return sol


def from_profile(sys: FluxSystem, nu: float, breakpoints, states, **kw) -> PiecewiseSolution:
    """Step data from breakpoints x_1 < ... < x_n and n+1 states."""
    states = list(states)
    data = [(-math.inf, states[0])] + list(zip(breakpoints, states[1:]))
    return init_solution(sys, nu, data, **kw)


def _relink_local(sol: PiecewiseSolution, lo: int, hi: int) -> None:
    """_relink restricted to fronts lo..hi (inclusive, clipped)."""
    prev = sol.leftmost if lo == 0 else sol.fronts[lo - 1].right
    for f in sol.fronts[lo:hi + 1]:
        if f.left is not prev:
            f.left = prev
        prev = f.right


def _relink(sol: PiecewiseSolution) -> None:
    """Make consecutive fronts share state objects."""
    prev = sol.leftmost
    for f in sol.fronts:
        if f.left is not prev:
            f.left = prev
        prev = f.right


# ---------------------------------------------------------------------------
# events


def next_interaction(sol: PiecewiseSolution):
    """(t*, x*, (i, i+1)) of the earliest adjacent collision, or None."""
    if len(sol.fronts) < 2:
        return None
    i, dt = kernels.earliest_collision(sol.positions(), sol.speeds())
    if i < 0:
        return None
    t = sol.time + dt
    return t, sol.fronts[i].position(t), (i, i + 1)


def _group(sol: PiecewiseSolution, i: int, t: float, x: float):
    tol = _POS_TOL * (1.0 + abs(x))
    a, b = i, i + 1
    while a > 0 and abs(sol.fronts[a - 1].position(t) - x) <= tol:
        a -= 1
    while b + 1 < len(sol.fronts) and abs(sol.fronts[b + 1].position(t) - x) <= tol:
        b += 1
    return a, b


def _resolve(sol: PiecewiseSolution, i: int, t: float) -> InteractionRecord:
    x = sol.fronts[i].position(t)
    a, b = _group(sol, i, t, x)
    before = glimm_functionals(sol)
    incoming = sol.fronts[a:b + 1]
    trigger = ((sol.fronts[i].family, sol.fronts[i].sigma), (sol.fronts[i + 1].family, sol.fronts[i + 1].sigma))
    left, right = incoming[0].left, incoming[-1].right
    fan = solve_riemann_states(sol.sys, sol.nu, left, right)
    new = _fronts_from_fan(fan, x, t)
    cache = sol._arrays()
    sol.fronts[a:b + 1] = new
    sol._cache = cache.splice(a, b + 1, new)
    _relink_local(sol, a, a + len(new))
    after = glimm_functionals(sol)
    rec = InteractionRecord(
        time=t, position=x,
        incoming=[(f.family, f.sigma) for f in incoming],
        outgoing=[(f.family, f.sigma) for f in new],
        delta_U=after.U - before.U, delta_Q=after.Q - before.Q, delta_V=after.V - before.V,
        V_before=before.V, Q_before=before.Q, V_after=after.V, Q_after=after.Q,
        incoming_kinds=[f.kind for f in incoming], outgoing_kinds=[f.kind for f in new],
        pair=trigger,
    )
    sol.interaction_log.append(rec)
    return rec


def _move_to(sol: PiecewiseSolution, t: float) -> None:
    for f in sol.fronts:
        f.rebase(t)
    sol.time = t
    sol._cache = None


def advance(sol: PiecewiseSolution, t_target: float) -> PiecewiseSolution:
    """Evolve in place to t_target and return the solution."""
    if t_target < sol.time:
        raise ValueError("cannot advance backwards in time")
    if sol.mode == "shifted":
        return _advance_shifted(sol, t_target)
    while step(sol, t_target) is not None:
        pass
    _move_to(sol, t_target)
    return sol


def step(sol: PiecewiseSolution, t_limit: float = math.inf) -> InteractionRecord | None:
    """Process the next classical interaction if it happens no later than t_limit."""
    nxt = next_interaction(sol)
    if nxt is None or nxt[0] > t_limit:
        return None
    t, _, (i, _) = nxt
    sol.time = t
    rec = _resolve(sol, i, t)
    sol.n_events += 1
    if len(sol.interaction_log) > sol.max_interactions:
        raise InteractionOverflow(f"more than {sol.max_interactions} interactions")
    return rec


def evolve(sys: FluxSystem, nu: float, step_data, t: float, **kw) -> PiecewiseSolution:
    sol = init_solution(sys, nu, step_data, **kw)
    return advance(sol, t)


def iter_intervals(sol: PiecewiseSolution, t_end: float):
    """Advance sol (in place) yielding (t0, t1, snapshot) for each event-free interval."""
    while sol.time < t_end:
        if sol.mode == "shifted":
            t_next = min(_next_shifted_event(sol)[0], t_end)
        else:
            nxt = next_interaction(sol)
            t_next = t_end if nxt is None else min(nxt[0], t_end)
        snap = sol.copy()
        snap.companion = None
        yield sol.time, t_next, snap
        advance(sol, t_next)


# ---------------------------------------------------------------------------
# norms


def breakpoints(sol: PiecewiseSolution, t: float | None = None):
    return sol.positions(t), sol.state_array()


def bv_norm(sol: PiecewiseSolution, interval) -> float:
    lo, hi = interval
    pos = sol.positions()
    tot = 0.0
    for x, f in zip(pos, sol.fronts):
        if lo <= x <= hi:
            tot += float(np.linalg.norm(f.right.u - f.left.u))
    return tot


def tv_window(sol: PiecewiseSolution, L: float) -> float:
    """max over a of the variation inside [a, a + L]."""
    pos = sol.positions()
    jumps = np.array([np.linalg.norm(f.right.u - f.left.u) for f in sol.fronts])
    best, acc, j = 0.0, 0.0, 0
    for i in range(len(pos)):
        while j < len(pos) and pos[j] <= pos[i] + L:
            acc += jumps[j]
            j += 1
        best = max(best, acc)
        acc -= jumps[i]
    return float(best)


def l1_distance(sol_a: PiecewiseSolution, sol_b: PiecewiseSolution, interval) -> float:
    xa, ua = breakpoints(sol_a)
    xb, ub = breakpoints(sol_b)
    return kernels.pc_l1(xa, ua, xb, ub, float(interval[0]), float(interval[1]))


def l1_to_profile(sol: PiecewiseSolution, xb, ub, interval) -> float:
    """L1 distance to a piecewise-constant profile given by breakpoints and len+1 values."""
    xa, ua = breakpoints(sol)
    return kernels.pc_l1(xa, ua, np.asarray(xb, float), np.asarray(ub, float), float(interval[0]), float(interval[1]))


def max_speed(sol: PiecewiseSolution) -> float:
    return max((abs(f.speed) for f in sol.fronts), default=0.0)


# ---------------------------------------------------------------------------
# shifted mode


def admissible_interval(sys: FluxSystem, family: int, radius: float | None = None) -> tuple[float, float]:
    """Shift-speed bracket from wave speeds over the ball of the given radius.

    1-shocks: [inf lambda1 - g/2, sup lambda1]; 2-shocks: [inf lambda2, sup lambda2 + g/2],
    with g the smallest eigenvalue gap on the ball.
    """
    rho = sys.radius if radius is None else min(radius, sys.radius)
    grid = ball_grid(sys, 25, rho)
    lam = eigenvalues(sys, grid)
    gap = float(np.min(lam[:, 1] - lam[:, 0]))
    if family == 1:
        return float(lam[:, 0].min() - gap / 2), float(lam[:, 0].max())
    return float(lam[:, 1].min()), float(lam[:, 1].max() + gap / 2)


def _is_shifted(sol: PiecewiseSolution, f: Front) -> bool:
    return f.kind == "shock" and abs(f.sigma) >= SHIFT_FLOOR


def _physical_shock_right(sol: PiecewiseSolution, f: Front):
    """(u_L, u_R, rh speed) of the physical shock attached to a shock front."""
    _, S, lam = shock_curve_riemann(sol.sys, f.left.v, f.family, f.sigma, u=f.left.u)
    if f.sigma <= -2.0 * math.sqrt(sol.nu):
        return f.left.u, f.right.u, lam
    return f.left.u, S, lam


def shift_speed(sys: FluxSystem, front: Front, trace_left, trace_right, a1: float, a2: float,
                interval=None, u_L=None, u_R=None, rh_speed=None, check_brackets: bool = True,
                C1: float = 1.0):
    """Speed minimizing the dissipation D over the admissible interval, and D there.

    D(hdot) = a2[q(u+;u_R) - hdot eta(u+|u_R)] - a1[q(u-;u_L) - hdot eta(u-|u_L)]
    is affine in hdot, so the minimizer is an endpoint unless the slope vanishes,
    in which case the front keeps its classical speed.
    """
    from .relent import shock_dissipation_coefficients

    uL = front.left.u if u_L is None else np.asarray(u_L, float)
    uR = front.right.u if u_R is None else np.asarray(u_R, float)
    if check_brackets:
        check_weight_bracket(front.family, abs(front.sigma), a1, a2, C1)
    lo, hi = interval if interval is not None else admissible_interval(sys, front.family)
    A, B = shock_dissipation_coefficients(sys, (trace_left, trace_right), uL, uR, a1, a2)
    scale = 1e-13 * (abs(a1) + abs(a2))
    if B > scale:
        h = hi
    elif B < -scale:
        h = lo
    else:
        base = front.classical_speed if rh_speed is None else rh_speed
        h = min(max(base, lo), hi)
    return float(h), float(A - h * B)


def check_weight_bracket(family: int, s0: float, a1: float, a2: float, C1: float = 1.0, tol: float = 1e-12):
    r = a1 / a2
    if family == 1:
        lo, hi = 1 + C1 * s0 / 2, 1 + 2 * C1 * s0
    else:
        lo, hi = 1 - 2 * C1 * s0, 1 - C1 * s0 / 2
    if not (lo - tol <= r <= hi + tol):
        raise WeightBracketViolation(f"a1/a2 = {r:.6g} outside [{lo:.6g}, {hi:.6g}] for family {family}")


def set_shifted_mode(sol: PiecewiseSolution, companion: PiecewiseSolution, C1: float = 1.0,
                     kappa: float | None = None, radius: float | None = None,
                     check_brackets: bool = True) -> PiecewiseSolution:
    """Copy of sol whose shocks follow shift speeds relative to the companion."""
    if not isinstance(companion, PiecewiseSolution):
        raise TraceUnavailable("companion must be a piecewise-constant solution")
    if sol.sys.entropy is None:
        from .errors import NoEntropy

        raise NoEntropy("shifted front tracking needs an entropy pair")
    if abs(companion.time - sol.time) > 1e-14:
        raise TraceUnavailable("companion and solution must be at the same time")
    new = sol.copy()
    new.mode = "shifted"
    new.companion = companion.copy()
    new.shift = ShiftConfig(
        C1=C1, kappa=sol.kappa if kappa is None else kappa,
        intervals={i: admissible_interval(sol.sys, i, radius) for i in (1, 2)},
        check_brackets=check_brackets,
    )
    _update_shift_speeds(new)
    return new


def _traces_slots(comp: PiecewiseSolution, x: float):
    """Companion fronts coinciding with x and the states around them."""
    pos = comp.positions()
    tol = _POS_TOL * (1.0 + abs(x))
    lo = int(np.searchsorted(pos, x - tol, side="left"))
    hi = int(np.searchsorted(pos, x + tol, side="right"))
    states = comp.states()
    coincident = comp.fronts[lo:hi]
    slot_states = states[lo:hi + 1]
    return coincident, slot_states


def _shift_for_front(sol: PiecewiseSolution, k: int, weights) -> None:
    f = sol.fronts[k]
    cfg = sol.shift
    comp = sol.companion
    x = f.position(sol.time)
    uL, uR, lam_rh = _physical_shock_right(sol, f)
    a1, a2 = weights[k]
    interval = cfg.intervals[f.family]
    coincident, slots = _traces_slots(comp, x)

    def pick(tl, tr):
        return shift_speed(sol.sys, f, tl, tr, a1, a2, interval, uL, uR, f.classical_speed,
                           cfg.check_brackets, cfg.C1)

    cs = [c.speed for c in coincident]
    chosen = None
    if not coincident:
        h, D = pick(slots[0].u, slots[0].u)
        chosen = (h, D)
    else:
        bounds = [-math.inf] + cs + [math.inf]
        options = [pick(s.u, s.u) for s in slots]
        for m, (h, D) in enumerate(options):
            if bounds[m] < h < bounds[m + 1]:
                chosen = (h, D)
                break
        if chosen is None:
            for m, c in enumerate(cs):
                if options[m][0] >= c and options[m + 1][0] <= c:
                    from .relent import shock_dissipation

                    D = shock_dissipation(sol.sys, (slots[m].u, slots[m + 1].u), uL, uR, c, a1, a2,
                                          check_brackets=False)
                    chosen = (c, D)
                    break
        if chosen is None:
            chosen = options[0]
    f.speed = chosen[0]
    sol.shift_log.append(ShiftRecord(sol.time, f.family, f.sigma, chosen[0], chosen[1], lam_rh, a1, a2))


def _front_weights(sol: PiecewiseSolution):
    from .weight import front_side_weights

    cfg = sol.shift
    return front_side_weights([f.family for f in sol.fronts], [f.sigma for f in sol.fronts], cfg.C1, cfg.kappa)


def _update_shift_speeds(sol: PiecewiseSolution) -> None:
    for f in sol.fronts:
        f.rebase(sol.time)
    weights = _front_weights(sol)
    for k, f in enumerate(sol.fronts):
        if _is_shifted(sol, f):
            _shift_for_front(sol, k, weights)
        else:
            f.speed = f.classical_speed
    sol._cache = None


def _next_crossing(sol: PiecewiseSolution):
    comp = sol.companion
    cpos = comp.positions()
    cspd = comp.speeds()
    best = math.inf
    if len(cpos) == 0:
        return best
    for f in sol.fronts:
        if not _is_shifted(sol, f):
            continue
        x = f.position(sol.time)
        gap = cpos - x
        closing = f.speed - cspd
        tol = _POS_TOL * (1.0 + abs(x))
        with np.errstate(divide="ignore", invalid="ignore"):
            dt = np.where((np.abs(gap) > tol) & (gap * closing > 0), gap / closing, np.inf)
        m = float(dt.min())
        if m < best:
            best = m
    return sol.time + best


def _next_shifted_event(sol: PiecewiseSolution):
    own = next_interaction(sol)
    comp = next_interaction(sol.companion)
    t_own = own[0] if own else math.inf
    t_comp = comp[0] if comp else math.inf
    t_cross = _next_crossing(sol)
    t = min(t_own, t_comp, t_cross)
    return t, own, comp


def _advance_shifted(sol: PiecewiseSolution, t_target: float) -> PiecewiseSolution:
    comp = sol.companion
    while True:
        t, own, cnext = _next_shifted_event(sol)
        if t > t_target:
            break
        sol.time = t
        if own is not None and own[0] <= t:
            _resolve(sol, own[2][0], t)
        advance(comp, t)
        _update_shift_speeds(sol)
        sol.n_events += 1
        if sol.n_events > sol.max_interactions:
            raise InteractionOverflow(f"more than {sol.max_interactions} events in shifted run")
    advance(comp, t_target)
    _move_to(sol, t_target)
    return sol
