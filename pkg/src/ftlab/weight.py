"""Exponential weight built from Glimm functionals and signed front masses.

log a(t, x) = (3 C1 / 4) (V + 1.5 kappa Q + m(x)), where m(x) adds -|sigma|
for every 1-front and +|sigma| for every 2-front strictly left of x.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fronttrack as ft


@dataclass(frozen=True)
class WeightProfile:
    time: float
    breakpoints: np.ndarray
    signed_masses: np.ndarray
    V: float
    Q: float
    C1: float
    kappa: float

    @property
    def prefactor(self) -> float:
        return self.V + 1.5 * self.kappa * self.Q

    def log_values(self) -> np.ndarray:
        """log a on each of the len(breakpoints)+1 intervals, left to right."""
        m = np.concatenate([[0.0], np.cumsum(self.signed_masses)])
        return 0.75 * self.C1 * (self.prefactor + m)

    def values(self) -> np.ndarray:
        return np.exp(self.log_values())

    def __call__(self, x, side: str = "right"):
        idx = np.searchsorted(self.breakpoints, x, side="right" if side == "right" else "left")
        return self.values()[idx]

    def to_csv(self) -> str:
        vals = self.values()
        lines = ["x_breakpoint,a_left,a_right"]
        for k, x in enumerate(self.breakpoints):
            lines.append(f"{x!r},{vals[k]!r},{vals[k + 1]!r}")
        return "\n".join(lines) + "\n"


def signed_masses(families, sigmas) -> np.ndarray:
    fam = np.asarray(families)
    a = np.abs(np.asarray(sigmas, dtype=float))
    return np.where(fam == 1, -a, a)


def weight_profile(sol: ft.PiecewiseSolution, C1: float = 1.0, kappa: float | None = None,
                   t: float | None = None) -> WeightProfile:
    k = sol.kappa if kappa is None else kappa
    t = sol.time if t is None else t
    fams = [f.family for f in sol.fronts]
    sigs = [f.sigma for f in sol.fronts]
    g = ft.glimm_from_waves(fams, sigs, k)
    return WeightProfile(t, sol.positions(t), signed_masses(fams, sigs), g.V, g.Q, float(C1), k)


def front_side_weights(families, sigmas, C1: float, kappa: float) -> list[tuple[float, float]]:
    """(a just left, a just right) of every front."""
    g = ft.glimm_from_waves(families, sigmas, kappa)
    prof = WeightProfile(0.0, np.zeros(len(sigmas)), signed_masses(families, sigmas), g.V, g.Q, C1, kappa)
    vals = prof.values()
    return [(float(vals[k]), float(vals[k + 1])) for k in range(len(sigmas))]


def bracket(family: int, strength: float, C1: float) -> tuple[float, float]:
    s = abs(strength)
    if family == 1:
        return 1 - 2 * C1 * s, 1 - C1 * s / 2
    return 1 + C1 * s / 2, 1 + 2 * C1 * s


def check_front_brackets(profile: WeightProfile, sol: ft.PiecewiseSolution) -> dict:
    vals = profile.values()
    rows, bad = [], []
    for k, f in enumerate(sol.fronts):
        ratio = vals[k + 1] / vals[k]
        lo, hi = bracket(f.family, f.sigma, profile.C1)
        ok = lo <= ratio <= hi
        rows.append({"index": k, "family": f.family, "sigma": f.sigma, "ratio": float(ratio),
                     "lo": lo, "hi": hi, "ok": bool(ok)})
        if not ok:
            bad.append(k)
    return {"rows": rows, "violations": bad, "passes": not bad}


def compare_profiles(before: WeightProfile, after: WeightProfile, exclude=(), rtol: float = 1e-10,
                     xtol: float = 1e-9) -> float:
    """Largest log a(after) - log a(before) over x away from the excluded points.

    Returns the excess over log(1 + rtol); nonpositive means decay holds.
    """
    cuts = np.unique(np.concatenate([before.breakpoints, after.breakpoints]))
    if len(cuts):
        probes = np.concatenate([[cuts[0] - 1.0], 0.5 * (cuts[1:] + cuts[:-1]), [cuts[-1] + 1.0]])
    else:
        probes = np.array([0.0])
    for x in exclude:
        probes = probes[np.abs(probes - x) > xtol * (1.0 + abs(x))]
    if not len(probes):
        return -math.log1p(rtol)
    lb = before.log_values()[np.searchsorted(before.breakpoints, probes, side="right")]
    la = after.log_values()[np.searchsorted(after.breakpoints, probes, side="right")]
    return float(np.max(la - lb) - math.log1p(rtol))


def check_interaction_decay(sol: ft.PiecewiseSolution, t_end: float, C1: float = 1.0,
                            kappa: float | None = None, brackets: bool = True) -> dict:
    """Advance sol (in place) to t_end, comparing weight profiles across every interaction."""
    k = sol.kappa if kappa is None else kappa
    decay_bad, bracket_bad, bound_bad = [], [], []
    n = 0

    def audit(prof):
        if brackets and not check_front_brackets(prof, sol)["passes"]:
            bracket_bad.append(sol.time)
        hi, inv = global_bounds(prof)
        if hi * inv > cumulative_mass_bound(prof) * (1 + 1e-12):
            bound_bad.append(sol.time)

    audit(weight_profile(sol, C1, k))
    while True:
        nxt = ft.next_interaction(sol)
        if nxt is None or nxt[0] > t_end:
            break
        before = weight_profile(sol, C1, k, t=nxt[0])
        rec = ft.step(sol, nxt[0])
        after = weight_profile(sol, C1, k)
        n += 1
        excess = compare_profiles(before, after, exclude=[rec.position])
        if excess > 0:
            decay_bad.append({"time": rec.time, "position": rec.position, "excess": excess})
        audit(after)
    ft._move_to(sol, t_end)
    return {"interactions": n, "decay_violations": decay_bad, "bracket_violations": bracket_bad,
            "bound_violations": bound_bad,
            "passes": not (decay_bad or bracket_bad or bound_bad)}


def global_bounds(profile: WeightProfile) -> tuple[float, float]:
    lv = profile.log_values()
    return float(math.exp(lv.max())), float(math.exp(-lv.min()))


def cumulative_mass_bound(profile: WeightProfile) -> float:
    return math.exp(0.75 * profile.C1 * (2 * profile.V + 3 * profile.kappa * profile.Q))
