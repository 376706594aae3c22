"""Flux systems, eigenstructure and structural hypothesis checks.

A :class:`FluxSystem` bundles a 2x2 flux with its analytic Jacobian and
second derivative, a reference state ``center`` with a validated radius,
an optional entropy pair and an optional chart of Riemann coordinates.
All array-valued callables accept states of shape ``(..., 2)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .errors import NoEntropy, NonHyperbolic, OutOfDomain

HYPERBOLICITY_GAP = 1e-6
_LINEAR_TOL = 1e-12


@dataclass(frozen=True)
class EntropyPair:
    eta: Callable[[np.ndarray], np.ndarray]
    grad_eta: Callable[[np.ndarray], np.ndarray]
    hess_eta: Callable[[np.ndarray], np.ndarray]
    q: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class FluxSystem:
    name: str
    flux: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    hessian: Callable[[np.ndarray], np.ndarray]
    center: np.ndarray
    radius: float
    entropy: Optional[EntropyPair] = None
    chart_factory: Optional[Callable[["FluxSystem"], object]] = None
    s_max: float = 0.1
    description: str = ""
    meta: dict = field(default_factory=dict)

    def second_derivative(self, u, a, b) -> np.ndarray:
        """Bilinear form f''(u)(a, b), returned as a vector."""
        return np.einsum("...kij,...i,...j->...k", self.hessian(u), a, b)

    @cached_property
    def chart(self):
        if self.chart_factory is None:
            return None
        return self.chart_factory(self)

    def contains(self, u, slack: float = 1.0) -> bool:
        u = np.asarray(u, dtype=float)
        return bool(np.all(np.linalg.norm(u - self.center, axis=-1) <= self.radius * slack * (1 + 1e-12)))

    def require_entropy(self) -> EntropyPair:
        if self.entropy is None:
            raise NoEntropy(f"system {self.name!r} carries no entropy pair")
        return self.entropy


@dataclass(frozen=True)
class EigenData:
    lambda1: float
    lambda2: float
    r1: np.ndarray
    r2: np.ndarray
    l1: np.ndarray
    l2: np.ndarray

    def lam(self, i: int) -> float:
        return self.lambda1 if i == 1 else self.lambda2

    def r(self, i: int) -> np.ndarray:
        return self.r1 if i == 1 else self.r2

    def l(self, i: int) -> np.ndarray:
        return self.l1 if i == 1 else self.l2


def _check_domain(sys: FluxSystem, u: np.ndarray, slack: float = 1.0) -> None:
    if not np.all(np.isfinite(u)):
        raise OutOfDomain(f"non-finite state {u}")
    dist = float(np.linalg.norm(u - sys.center))
    if dist > sys.radius * slack * (1 + 1e-12):
        raise OutOfDomain(f"state {u} lies {dist:.3g} from center of {sys.name}, radius {sys.radius}")


def eigenvalues(sys: FluxSystem, u) -> np.ndarray:
    """Vectorized eigenvalues (..., 2) in increasing order; no domain check."""
    A = sys.jacobian(np.asarray(u, dtype=float))
    tr = A[..., 0, 0] + A[..., 1, 1]
    disc = (A[..., 0, 0] - A[..., 1, 1]) ** 2 + 4.0 * A[..., 0, 1] * A[..., 1, 0]
    if np.any(disc < HYPERBOLICITY_GAP ** 2):
        raise NonHyperbolic(f"eigenvalue gap below {HYPERBOLICITY_GAP} for {sys.name}")
    g = np.sqrt(disc)
    return np.stack([(tr - g) / 2.0, (tr + g) / 2.0], axis=-1)


def wave_speed(sys: FluxSystem, u, family: int) -> float:
    A = sys.jacobian(np.asarray(u, dtype=float))
    a, b, c, d = A[0, 0], A[0, 1], A[1, 0], A[1, 1]
    disc = (a - d) ** 2 + 4.0 * b * c
    if disc < HYPERBOLICITY_GAP ** 2:
        raise NonHyperbolic(f"eigenvalue gap below {HYPERBOLICITY_GAP} at {u}")
    g = np.sqrt(disc)
    return float((a + d + (g if family == 2 else -g)) / 2.0)


def _eigvec(A: np.ndarray, lam: float) -> np.ndarray:
    a, b, c, d = A[0, 0], A[0, 1], A[1, 0], A[1, 1]
    c1 = np.array([b, lam - a])
    c2 = np.array([lam - d, c])
    v = c1 if np.dot(c1, c1) >= np.dot(c2, c2) else c2
    return v / np.linalg.norm(v)


def _orient(v: np.ndarray) -> np.ndarray:
    k = 0 if abs(v[0]) > _LINEAR_TOL else 1
    return v if v[k] > 0 else -v


def eigensystem(sys: FluxSystem, u, check_domain: bool = True) -> EigenData:
    """Eigenvalues, unit right eigenvectors and dual left eigenvectors at u.

    Right eigenvectors are oriented so that grad(lambda_i).r_i > 0; when that
    quantity vanishes (linear fields) the first nonzero component is positive.
    """
    u = np.asarray(u, dtype=float)
    if check_domain:
        _check_domain(sys, u)
    A = sys.jacobian(u)
    a, b, c, d = A[0, 0], A[0, 1], A[1, 0], A[1, 1]
    disc = (a - d) ** 2 + 4.0 * b * c
    if not disc >= HYPERBOLICITY_GAP ** 2:
        raise NonHyperbolic(f"eigenvalue gap {np.sqrt(max(disc, 0.0)):.3g} at {u}")
    g = np.sqrt(disc)
    lam = ((a + d - g) / 2.0, (a + d + g) / 2.0)
    rs = [_orient(_eigvec(A, lam[0])), _orient(_eigvec(A, lam[1]))]
    H = sys.hessian(u)
    for i in range(2):
        L = np.linalg.inv(np.column_stack(rs))
        gnl = L[i] @ np.einsum("kij,i,j->k", H, rs[i], rs[i])
        if gnl < -_LINEAR_TOL:
            rs[i] = -rs[i]
    L = np.linalg.inv(np.column_stack(rs))
    return EigenData(lam[0], lam[1], rs[0], rs[1], L[0].copy(), L[1].copy())


def gnl_value(sys: FluxSystem, u, family: int, eig: EigenData | None = None) -> float:
    """l_i f''(r_i, r_i), which equals grad(lambda_i).r_i under l.r = 1."""
    e = eig if eig is not None else eigensystem(sys, u)
    r = e.r(family)
    return float(e.l(family) @ sys.second_derivative(np.asarray(u, float), r, r))


def cross_value(sys: FluxSystem, u, i: int, eig: EigenData | None = None) -> float:
    """l_i f''(r_j, r_j) with j the other family."""
    e = eig if eig is not None else eigensystem(sys, u)
    j = 2 if i == 1 else 1
    r = e.r(j)
    return float(e.l(i) @ sys.second_derivative(np.asarray(u, float), r, r))


def ball_grid(sys: FluxSystem, n: int = 50, radius: float | None = None) -> np.ndarray:
    """States of an n-by-n square grid that fall inside the closed ball."""
    rho = sys.radius if radius is None else radius
    t = np.linspace(-rho, rho, n)
    X, Y = np.meshgrid(t, t, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=-1)
    keep = np.linalg.norm(pts, axis=-1) <= rho * (1 + 1e-12)
    return sys.center + pts[keep]


def check_genuine_nonlinearity(sys: FluxSystem, grid) -> list[dict]:
    rows = []
    for u in np.atleast_2d(np.asarray(grid, dtype=float)):
        e = eigensystem(sys, u)
        for i in (1, 2):
            val = gnl_value(sys, u, i, e)
            rows.append({"state": [float(u[0]), float(u[1])], "family": i,
                         "gnl_value": val, "ok": bool(val > 0)})
    return rows


def check_smoller_johnson(sys: FluxSystem, grid) -> dict:
    """Cross-family signs l_i f''(r_j, r_j); the necessary condition needs them >= 0."""
    rows = []
    for u in np.atleast_2d(np.asarray(grid, dtype=float)):
        e = eigensystem(sys, u)
        for i in (1, 2):
            val = cross_value(sys, u, i, e)
            rows.append({"state": [float(u[0]), float(u[1])], "family": i,
                         "sj_value": val, "ok": bool(val >= -_LINEAR_TOL)})
    verdict = "PASSES" if all(r["ok"] for r in rows) else "FAILS"
    return {"rows": rows, "verdict": verdict}


def grad_q_complex_step(sys: FluxSystem, u: np.ndarray, h: float = 1e-30) -> np.ndarray:
    ent = sys.require_entropy()
    u = np.asarray(u, dtype=float)
    out = np.empty(u.shape)
    for k in range(2):
        z = u.astype(complex)
        z[..., k] += 1j * h
        out[..., k] = np.imag(ent.q(z)) / h
    return out


def check_entropy_pair(sys: FluxSystem, grid, tol: float = 1e-10) -> dict:
    """Max over the grid of |grad q - grad eta f'|, with grad q by complex step."""
    ent = sys.require_entropy()
    U = np.atleast_2d(np.asarray(grid, dtype=float))
    gq = grad_q_complex_step(sys, U)
    ge = ent.grad_eta(U)
    rhs = np.einsum("...i,...ij->...j", ge, sys.jacobian(U))
    res = np.linalg.norm(gq - rhs, axis=-1)
    hess = ent.hess_eta(U)
    pd = bool(np.all(np.linalg.eigvalsh(hess) > 0))
    worst = float(res.max()) if res.size else 0.0
    return {"max_residual": worst, "passes": bool(worst < tol), "hessian_positive_definite": pd}


def hypothesis_report(sys: FluxSystem, grid) -> list[dict]:
    """JSON-ready rows {state, family, gnl_value, sj_value, verdict}."""
    out = []
    for u in np.atleast_2d(np.asarray(grid, dtype=float)):
        e = eigensystem(sys, u)
        for i in (1, 2):
            g = gnl_value(sys, u, i, e)
            s = cross_value(sys, u, i, e)
            verdict = "ok" if (g > 0 and s >= -_LINEAR_TOL) else ("gnl-fails" if g <= 0 else "sj-fails")
            out.append({"state": [float(u[0]), float(u[1])], "family": i,
                        "gnl_value": g, "sj_value": s, "verdict": verdict})
    return out


def jacobian_fd(sys: FluxSystem, u, h: float) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    cols = []
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        cols.append((sys.flux(u + e) - sys.flux(u)) / h)
    return np.stack(cols, axis=-1)


def hessian_fd(sys: FluxSystem, u, h: float) -> np.ndarray:
    """One-sided differences of the analytic Jacobian, shape (2, 2, 2) as [k, i, j]."""
    u = np.asarray(u, dtype=float)
    H = np.empty((2, 2, 2))
    J0 = sys.jacobian(u)
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        H[:, :, j] = (sys.jacobian(u + e) - J0) / h
    return H


# ---------------------------------------------------------------------------
# built-in systems


def _appendix_a() -> FluxSystem:
    def flux(u):
        x, y = u[..., 0], u[..., 1]
        return np.stack([(x - 1) ** 2 + 3 * x * y - y ** 2, (y + 1) ** 2 + 3 * x * y - x ** 2], axis=-1)

    def jac(u):
        x, y = u[..., 0], u[..., 1]
        return np.stack([
            np.stack([2 * (x - 1) + 3 * y, 3 * x - 2 * y], axis=-1),
            np.stack([3 * y - 2 * x, 2 * (y + 1) + 3 * x], axis=-1),
        ], axis=-2)

    H = np.array([[[2.0, 3.0], [3.0, -2.0]], [[-2.0, 3.0], [3.0, 2.0]]])

    def hess(u):
        return np.broadcast_to(H, np.shape(u)[:-1] + (2, 2, 2)).copy()

    from .charts import polynomial_chart

    return FluxSystem(
        name="appendix-a-quadratic", flux=flux, jacobian=jac, hessian=hess,
        center=np.zeros(2), radius=0.15, entropy=None, chart_factory=polynomial_chart,
        s_max=0.1, description="quadratic flux, genuinely nonlinear, fails the cross-family sign condition",
    )


def make_p_system(gamma: float = 2.0, center=(1.0, 0.0), radius: float = 0.3) -> FluxSystem:
    """Isentropic gas dynamics in Lagrangian form, state (v, w), p(v) = v**-gamma."""
    if gamma <= 1.0:
        raise ValueError("gamma must exceed 1")
    g = float(gamma)

    def flux(u):
        v, w = u[..., 0], u[..., 1]
        return np.stack([-w, v ** (-g)], axis=-1)

    def jac(u):
        v = u[..., 0]
        z = np.zeros_like(v)
        return np.stack([np.stack([z, z - 1.0], axis=-1), np.stack([-g * v ** (-g - 1), z], axis=-1)], axis=-2)

    def hess(u):
        v = u[..., 0]
        H = np.zeros(np.shape(u)[:-1] + (2, 2, 2))
        H[..., 1, 0, 0] = g * (g + 1) * v ** (-g - 2)
        return H

    def eta(u):
        v, w = u[..., 0], u[..., 1]
        return 0.5 * w * w + v ** (1 - g) / (g - 1)

    def grad_eta(u):
        v, w = u[..., 0], u[..., 1]
        return np.stack([-(v ** (-g)), w], axis=-1)

    def hess_eta(u):
        v = u[..., 0]
        H = np.zeros(np.shape(u)[:-1] + (2, 2))
        H[..., 0, 0] = g * v ** (-g - 1)
        H[..., 1, 1] = 1.0
        return H

    def q(u):
        v, w = u[..., 0], u[..., 1]
        return v ** (-g) * w

    from .charts import p_system_chart

    name = "p-system-gamma2" if g == 2.0 else f"p-system-gamma{g:g}"
    return FluxSystem(
        name=name, flux=flux, jacobian=jac, hessian=hess, center=np.asarray(center, float),
        radius=radius, entropy=EntropyPair(eta, grad_eta, hess_eta, q),
        chart_factory=lambda s: p_system_chart(s, g), s_max=0.1,
        description=f"p-system with p(v)=v^-{g:g}", meta={"gamma": g},
    )


def make_linear_system(A=((-1.0, 0.0), (0.0, 1.0)), radius: float = 1.0) -> FluxSystem:
    """Symmetric linear flux f(u) = A u with quadratic entropy."""
    A = np.asarray(A, dtype=float)
    if not np.allclose(A, A.T):
        raise ValueError("linear fixture expects a symmetric matrix")

    def flux(u):
        return np.einsum("ij,...j->...i", A, u)

    def jac(u):
        return np.broadcast_to(A, np.shape(u)[:-1] + (2, 2)).copy()

    def hess(u):
        return np.zeros(np.shape(u)[:-1] + (2, 2, 2))

    ent = EntropyPair(
        eta=lambda u: 0.5 * np.sum(u * u, axis=-1),
        grad_eta=lambda u: np.array(u, dtype=float, copy=True),
        hess_eta=lambda u: np.broadcast_to(np.eye(2), np.shape(u)[:-1] + (2, 2)).copy(),
        q=lambda u: 0.5 * np.einsum("...i,ij,...j->...", u, A, u),
    )
    from .charts import linear_chart

    return FluxSystem(
        name="linear-advection2", flux=flux, jacobian=jac, hessian=hess, center=np.zeros(2),
        radius=radius, entropy=ent, chart_factory=linear_chart, s_max=0.1,
        description="symmetric linear system (linearly degenerate fields)",
    )


def make_decoupled_burgers(radius: float = 0.3) -> FluxSystem:
    """Two uncoupled Burgers-type equations f = (u^2/2, 2v + v^2/2)."""

    def flux(u):
        x, y = u[..., 0], u[..., 1]
        return np.stack([0.5 * x * x, 2 * y + 0.5 * y * y], axis=-1)

    def jac(u):
        x, y = u[..., 0], u[..., 1]
        z = np.zeros_like(x)
        return np.stack([np.stack([x, z], axis=-1), np.stack([z, 2 + y], axis=-1)], axis=-2)

    def hess(u):
        H = np.zeros(np.shape(u)[:-1] + (2, 2, 2))
        H[..., 0, 0, 0] = 1.0
        H[..., 1, 1, 1] = 1.0
        return H

    ent = EntropyPair(
        eta=lambda u: 0.5 * np.sum(u * u, axis=-1),
        grad_eta=lambda u: np.array(u, dtype=float, copy=True),
        hess_eta=lambda u: np.broadcast_to(np.eye(2), np.shape(u)[:-1] + (2, 2)).copy(),
        q=lambda u: u[..., 0] ** 3 / 3 + u[..., 1] ** 2 + u[..., 1] ** 3 / 3,
    )
    from .charts import linear_chart

    return FluxSystem(
        name="decoupled-burgers", flux=flux, jacobian=jac, hessian=hess, center=np.zeros(2),
        radius=radius, entropy=ent, chart_factory=linear_chart, s_max=0.1,
        description="two decoupled genuinely nonlinear scalar laws",
    )


_REGISTRY: dict[str, FluxSystem] = {}


def builtin_systems() -> list[FluxSystem]:
    if not _REGISTRY:
        for s in (_appendix_a(), make_p_system(2.0), make_linear_system(), make_decoupled_burgers()):
            _REGISTRY[s.name] = s
    return list(_REGISTRY.values())


def get_system(name: str) -> FluxSystem:
    builtin_systems()
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown system {name!r}; known: {sorted(_REGISTRY)}") from None
