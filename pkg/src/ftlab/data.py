"""Initial-data toolkit: mollification, rough generators, variation and fractional norms."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from . import kernels
from .errors import ResolutionTooCoarse

# integral of exp(-1/(1-x^2)) over (-1, 1)
BUMP_MASS = 0.44399381616807943


@dataclass
class SampledFunction:
    x: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if len(self.x) != len(self.values):
            raise ValueError("grid and values differ in length")
        if len(self.x) > 2:
            d = np.diff(self.x)
            if np.max(np.abs(d - d[0])) > 1e-9 * abs(d[0]):
                raise ValueError("grid spacing must be uniform")

    @property
    def hx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.x[0]), float(self.x[-1])

    @property
    def is_vector(self) -> bool:
        return self.values.ndim == 2

    def restrict(self, lo: float, hi: float) -> "SampledFunction":
        keep = (self.x >= lo - 1e-12) & (self.x <= hi + 1e-12)
        return SampledFunction(self.x[keep], self.values[keep], dict(self.meta))

    def sup_norm(self) -> float:
        v = self.values
        return float(np.max(np.linalg.norm(v, axis=-1) if self.is_vector else np.abs(v)))

    def to_csv(self) -> str:
        v = self.values if self.is_vector else self.values[:, None]
        cols = ["x"] + [f"u{k + 1}" for k in range(v.shape[1])]
        lines = [",".join(cols)]
        for x, row in zip(self.x, v):
            lines.append(",".join(repr(float(a)) for a in (x, *row)))
        return "\n".join(lines) + "\n"


def uniform_grid(lo: float, hi: float, n: int) -> np.ndarray:
    return np.linspace(lo, hi, n)


# ---------------------------------------------------------------------------
# mollification


def bump(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2)) / BUMP_MASS
    return out


def mollifier_kernel(delta: float, hx: float):
    """(offsets, weights) of gamma_delta sampled on the symmetric grid k*hx."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    m = int(math.floor(delta / hx))
    k = np.arange(-m, m + 1)
    offs = k * hx
    w = bump(np.abs(offs) / delta) / delta
    # renormalize so the trapezoid sum is exactly one on this grid
    w = w / (np.sum(w) * hx)
    return offs, w


def mollify(u: SampledFunction, delta: float, pad: str = "edge") -> SampledFunction:
    """u * gamma_delta on the same grid; values beyond the domain come from padding."""
    hx = u.hx
    if hx > delta / 8 * (1 + 1e-12):
        raise ResolutionTooCoarse(f"grid spacing {hx} exceeds delta/8 = {delta / 8}")
    _, w = mollifier_kernel(delta, hx)
    m = (len(w) - 1) // 2
    vals = u.values if u.is_vector else u.values[:, None]
    mode = "wrap" if pad == "wrap" else "edge"
    padded = np.pad(vals, ((m, m), (0, 0)), mode=mode)
    out = np.stack([fftconvolve(padded[:, k], w * hx, mode="valid") for k in range(vals.shape[1])], axis=-1)
    if not u.is_vector:
        out = out[:, 0]
    return SampledFunction(u.x.copy(), out, {**u.meta, "mollified": delta})


# ---------------------------------------------------------------------------
# variation and norms


def _increments(u: SampledFunction) -> np.ndarray:
    d = np.diff(u.values, axis=0)
    return np.linalg.norm(d, axis=-1) if u.is_vector else np.abs(d)


def total_variation(u: SampledFunction) -> float:
    return float(np.sum(_increments(u)))


def tv_exact(u: SampledFunction, L: float) -> float:
    """max over grid windows [x_i, x_i + L] of the discrete variation inside."""
    inc = _increments(u)
    c = np.concatenate([[0.0], np.cumsum(inc)])
    j = np.searchsorted(u.x, u.x + L * (1 + 1e-12), side="right") - 1
    return float(np.max(c[j] - c[np.arange(len(u.x))]))


def l2_distance(u: SampledFunction, v: SampledFunction, lo: float | None = None, hi: float | None = None) -> float:
    keep = np.ones(len(u.x), dtype=bool)
    if lo is not None:
        keep &= u.x >= lo
    if hi is not None:
        keep &= u.x <= hi
    d = u.values[keep] - v.values[keep]
    sq = np.sum(d * d, axis=-1) if u.is_vector else d * d
    return float(math.sqrt(np.sum(sq) * u.hx))


def lp_norm(values, hx: float, p: float) -> float:
    v = np.asarray(values, dtype=float)
    a = np.linalg.norm(v, axis=-1) if v.ndim == 2 else np.abs(v)
    return float((np.sum(a ** p) * hx) ** (1.0 / p))


def sobolev_seminorm(u: SampledFunction, s: float, p: float = 2.0, min_offset: int = 2) -> dict:
    """Gagliardo W^{s,p} seminorm by double sum over grid offsets >= min_offset."""
    if not (0 < s < 1) or p < 1:
        raise ValueError("need 0 < s < 1 and p >= 1")
    total = kernels.gagliardo(u.values, u.hx, float(s), float(p), int(min_offset))
    return {"seminorm": total ** (1.0 / p), "truncation_band": min_offset * u.hx, "s": s, "p": p}


def holder_exponent(u: SampledFunction, max_level: int | None = None) -> dict:
    """Slope of log max-oscillation against log offset over dyadic offsets."""
    n = len(u.x)
    levels = int(math.log2(n // 8)) if max_level is None else max_level
    hs, osc = [], []
    for k in range(levels):
        m = 2 ** k
        d = u.values[m:] - u.values[:-m]
        a = np.linalg.norm(d, axis=-1) if u.is_vector else np.abs(d)
        hs.append(m * u.hx)
        osc.append(float(a.max()))
    fit = loglog_fit(hs, osc)
    return {"exponent": fit["slope"], "r2": fit["r2"], "h": hs, "osc": osc}


def loglog_fit(xs, ys) -> dict:
    from scipy.stats import linregress

    lx, ly = np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float))
    r = linregress(lx, ly)
    return {"slope": float(r.slope), "intercept": float(r.intercept), "r2": float(r.rvalue ** 2), "n": len(xs)}


def besov_commutator_decay(flux, u: SampledFunction, alpha: float, deltas, margin: float | None = None,
                           floor: float = 1e-13) -> dict:
    """||d/dx u_delta||_{L3} * ||f(u_delta) - f(u)_delta||_{L3/2} against delta.

    ``flux`` maps an (n, 2) or (n,) array of states to fluxes.  Norms are
    taken away from the boundary by the largest delta.
    """
    deltas = np.sort(np.asarray(deltas, dtype=float))
    lo, hi = u.domain
    edge = deltas.max() if margin is None else margin
    keep = (u.x >= lo + 2 * edge) & (u.x <= hi - 2 * edge)
    fu = SampledFunction(u.x, flux(u.values))
    vals = []
    for d in deltas:
        ud = mollify(u, d)
        comm = np.asarray(flux(ud.values)) - mollify(fu, d).values
        grad = np.gradient(ud.values, u.hx, axis=0)
        vals.append(lp_norm(grad[keep], u.hx, 3.0) * lp_norm(comm[keep], u.hx, 1.5))
    vals = np.array(vals)
    if np.max(vals) < floor:
        return {"deltas": deltas.tolist(), "values": vals.tolist(), "slope": None, "skipped": True,
                "passes": True, "threshold": 3 * alpha - 1 - 0.15}
    fit = loglog_fit(deltas, vals)
    thr = 3 * alpha - 1 - 0.15
    return {"deltas": deltas.tolist(), "values": vals.tolist(), "slope": fit["slope"], "r2": fit["r2"],
            "skipped": False, "threshold": thr, "passes": bool(fit["slope"] >= thr)}


# ---------------------------------------------------------------------------
# generators


def _rng(seed, k: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed).spawn(k + 1)[k])


def _fgn(n: int, hurst: float, rng: np.random.Generator) -> np.ndarray:
    """Fractional Gaussian noise of length n by circulant embedding."""
    k = np.arange(n + 1, dtype=float)
    cov = 0.5 * (np.abs(k + 1) ** (2 * hurst) - 2 * k ** (2 * hurst) + np.abs(k - 1) ** (2 * hurst))
    row = np.concatenate([cov, cov[-2:0:-1]])
    lam = np.fft.fft(row).real
    lam = np.maximum(lam, 0.0)
    m = len(row)
    z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    w = np.fft.fft(np.sqrt(lam / m) * z)
    return w.real[:n]


def _into_ball(raw: np.ndarray, center, epsilon: float) -> np.ndarray:
    """Affine rescaling of zero-mean paths so every sample lies in B_epsilon(center)."""
    raw = raw - raw.mean(axis=0)
    r = np.max(np.linalg.norm(raw, axis=-1)) if raw.ndim == 2 else np.max(np.abs(raw))
    scale = 0.0 if r == 0 else epsilon / r
    return np.asarray(center, float) + raw * scale


def fbm_path(hurst: float, seed: int, grid, epsilon: float = 0.01, center=(0.0, 0.0), components: int = 2):
    if not (0 < hurst < 1):
        raise ValueError("Hurst index must lie in (0, 1)")
    grid = np.asarray(grid, dtype=float)
    n = len(grid)
    cols = []
    for k in range(components):
        inc = _fgn(n - 1, hurst, _rng(seed, k))
        cols.append(np.concatenate([[0.0], np.cumsum(inc)]))
    raw = np.stack(cols, axis=-1)
    if components == 1:
        vals = _into_ball(raw[:, 0], center[0] if np.ndim(center) else center, epsilon)
    else:
        vals = _into_ball(raw, center, epsilon)
    return SampledFunction(grid, vals, {"generator": "fbm", "hurst": hurst, "seed": seed, "epsilon": epsilon})


def weierstrass(alpha: float, grid, seed: int | None = None, epsilon: float = 0.01, center=(0.0, 0.0),
                components: int = 2, base: int = 2, period: float | None = None):
    """sum_k base^{-k alpha} cos(2 pi base^k x / period + phase_k), down to the grid scale."""
    grid = np.asarray(grid, dtype=float)
    P = (grid[-1] - grid[0]) if period is None else period
    hx = grid[1] - grid[0]
    kmax = int(math.ceil(math.log(P / hx, base))) + 2
    cols = []
    for c in range(components):
        ph = np.zeros(kmax) if seed is None else _rng(seed, c).uniform(0, 2 * np.pi, kmax)
        if seed is None and c == 1:
            ph = np.full(kmax, np.pi / 2)
        col = np.zeros_like(grid)
        for k in range(kmax):
            col += base ** (-k * alpha) * np.cos(2 * np.pi * base ** k * (grid - grid[0]) / P + ph[k])
        cols.append(col)
    raw = np.stack(cols, axis=-1)
    if components == 1:
        vals = _into_ball(raw[:, 0], center[0] if np.ndim(center) else center, epsilon)
    else:
        vals = _into_ball(raw, center, epsilon)
    return SampledFunction(grid, vals, {"generator": "weierstrass", "alpha": alpha, "seed": seed,
                                        "epsilon": epsilon})


def random_step(seed: int, n_jumps: int, grid, epsilon: float = 0.01, center=(0.0, 0.0), components: int = 2):
    grid = np.asarray(grid, dtype=float)
    rng = _rng(seed)
    cuts = np.sort(rng.choice(np.arange(1, len(grid) - 1), size=n_jumps, replace=False))
    levels = rng.uniform(-1, 1, (n_jumps + 1, components))
    idx = np.searchsorted(cuts, np.arange(len(grid)), side="right")
    raw = levels[idx]
    if components == 1:
        vals = _into_ball(raw[:, 0], center[0] if np.ndim(center) else center, epsilon)
    else:
        vals = _into_ball(raw, center, epsilon)
    return SampledFunction(grid, vals, {"generator": "random_step", "n_jumps": n_jumps, "seed": seed,
                                        "epsilon": epsilon, "jump_index": cuts.tolist()})


def generate(spec: dict, grid) -> SampledFunction:
    """Dispatch a JSON-style generator config."""
    kind = spec["kind"]
    opts = {k: v for k, v in spec.items() if k != "kind"}
    if "center" in opts:
        opts["center"] = tuple(opts["center"])
    if kind == "fbm":
        return fbm_path(grid=grid, **opts)
    if kind == "weierstrass":
        return weierstrass(grid=grid, **opts)
    if kind == "random_step":
        return random_step(grid=grid, **opts)
    raise ValueError(f"unknown generator {kind!r}")


def generator_config_json(spec: dict) -> str:
    return json.dumps(spec, sort_keys=True)


# ---------------------------------------------------------------------------
# piecewise-constant approximation for the solver


def cell_average_steps(u: SampledFunction, cell: float, lo: float | None = None, hi: float | None = None):
    """Breakpoints and cell-average states of u on cells of width about ``cell``."""
    a = u.domain[0] if lo is None else lo
    b = u.domain[1] if hi is None else hi
    n = max(1, int(round((b - a) / cell)))
    edges = np.linspace(a, b, n + 1)
    idx = np.clip(np.searchsorted(edges, u.x, side="right") - 1, 0, n - 1)
    inside = (u.x >= a) & (u.x <= b)
    vals = u.values if u.is_vector else u.values[:, None]
    sums = np.zeros((n, vals.shape[1]))
    np.add.at(sums, idx[inside], vals[inside])
    counts = np.bincount(idx[inside], minlength=n).astype(float)
    if np.any(counts == 0):
        raise ResolutionTooCoarse(f"cells of width {cell} hold no samples at spacing {u.hx}")
    avg = sums / counts[:, None]
    return edges[1:-1], avg


def step_profile_values(breakpoints, states, x) -> np.ndarray:
    return np.asarray(states)[np.searchsorted(breakpoints, x, side="right")]
