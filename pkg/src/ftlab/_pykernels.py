"""Pure numpy implementations of the hot loops; the compiled module mirrors them."""
from __future__ import annotations

import numpy as np


def earliest_collision(pos, speed):
    """Index i and delay dt of the first meeting of fronts i and i+1, or (-1, inf)."""
    pos = np.asarray(pos, dtype=float)
    speed = np.asarray(speed, dtype=float)
    if len(pos) < 2:
        return -1, np.inf
    closing = speed[:-1] - speed[1:]
    gap = pos[1:] - pos[:-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        dt = np.where(closing > 0, np.maximum(gap, 0.0) / closing, np.inf)
    i = int(np.argmin(dt))
    if not np.isfinite(dt[i]):
        return -1, np.inf
    return i, float(dt[i])


def glimm_q(families, sigma):
    """Sum of |s_a s_b| over approaching pairs a left of b."""
    fam = np.asarray(families)
    sig = np.asarray(sigma, dtype=float)
    a = np.abs(sig)
    one = fam == 1
    two = ~one
    neg = sig < 0
    # prefix sums over strictly earlier fronts
    c2 = np.concatenate([[0.0], np.cumsum(np.where(two, a, 0.0))])[:-1]
    c1 = np.concatenate([[0.0], np.cumsum(np.where(one, a, 0.0))])[:-1]
    c1n = np.concatenate([[0.0], np.cumsum(np.where(one & neg, a, 0.0))])[:-1]
    c2n = np.concatenate([[0.0], np.cumsum(np.where(two & neg, a, 0.0))])[:-1]
    q1 = np.where(one, a * (c2 + np.where(neg, c1, c1n)), 0.0)
    q2 = np.where(two, a * np.where(neg, c2, c2n), 0.0)
    return float(np.sum(q1) + np.sum(q2))


def pc_l1(xa, ua, xb, ub, lo, hi):
    """Exact L1 distance on [lo, hi] of two piecewise-constant vector profiles.

    Profile a takes value ua[k] on (xa[k-1], xa[k]); len(ua) = len(xa) + 1.
    """
    if hi <= lo:
        return 0.0
    xa = np.asarray(xa, dtype=float)
    xb = np.asarray(xb, dtype=float)
    ua = np.asarray(ua, dtype=float).reshape(len(xa) + 1, -1)
    ub = np.asarray(ub, dtype=float).reshape(len(xb) + 1, -1)
    cuts = np.concatenate([[lo, hi], xa[(xa > lo) & (xa < hi)], xb[(xb > lo) & (xb < hi)]])
    cuts = np.unique(cuts)
    mid = 0.5 * (cuts[1:] + cuts[:-1])
    ia = np.searchsorted(xa, mid, side="right")
    ib = np.searchsorted(xb, mid, side="right")
    d = np.linalg.norm(ua[ia] - ub[ib], axis=-1)
    return float(np.sum(d * np.diff(cuts)))


def gagliardo(values, hx, s, p, min_offset):
    """Double-sum Gagliardo seminorm to the power p over offsets >= min_offset."""
    u = np.asarray(values, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    n = len(u)
    total = 0.0
    for k in range(max(1, int(min_offset)), n):
        d = np.linalg.norm(u[k:] - u[:-k], axis=-1) if u.shape[1] > 1 else np.abs(u[k:, 0] - u[:-k, 0])
        total += 2.0 * np.sum(d ** p) / (k * hx) ** (1.0 + s * p)
    return float(total * hx * hx)
