"""Charts of Riemann coordinates.

Every chart maps a physical state u to coordinates v = (v1, v2) with v_i
constant along rarefaction curves of the other family, v(center) = 0 and
grad(v_i).r_i = 1 at the center.  Three kinds are provided: a linear map,
the closed form for the p-system, and a least-squares polynomial fit for
systems without a closed form.
"""
from __future__ import annotations

import numpy as np

from .errors import NewtonDivergence, NoChart


class Chart:
    kind = "abstract"

    def to_riemann(self, u) -> np.ndarray:
        raise NotImplementedError

    def to_state(self, v) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, u) -> np.ndarray:
        """Rows are grad v1 and grad v2 at u."""
        raise NotImplementedError


class LinearChart(Chart):
    kind = "linear"

    def __init__(self, L, center):
        self.L = np.asarray(L, dtype=float)
        self.Linv = np.linalg.inv(self.L)
        self.center = np.asarray(center, dtype=float)

    def to_riemann(self, u):
        return np.einsum("ij,...j->...i", self.L, np.asarray(u, float) - self.center)

    def to_state(self, v):
        return self.center + np.einsum("ij,...j->...i", self.Linv, np.asarray(v, float))

    def gradient(self, u):
        return np.broadcast_to(self.L, np.shape(u)[:-1] + (2, 2)).copy()


def linear_chart(sys) -> LinearChart:
    from .system import eigensystem

    e = eigensystem(sys, sys.center)
    return LinearChart(np.vstack([e.l1, e.l2]), sys.center)


class PSystemChart(Chart):
    """v1 ~ w + phi(v), v2 ~ w - phi(v) with phi' = sqrt(-p'), scaled at the center."""

    kind = "closed-form"

    def __init__(self, gamma: float, center):
        self.g = float(gamma)
        self.center = np.asarray(center, dtype=float)
        c0 = self._c(self.center[0])
        self.scale = 2.0 * c0 / np.sqrt(1.0 + c0 * c0)
        self.z0 = np.array([self.center[1] + self._phi(self.center[0]),
                            self.center[1] - self._phi(self.center[0])])

    def _c(self, v):
        return np.sqrt(self.g) * v ** (-(self.g + 1) / 2)

    def _phi(self, v):
        g = self.g
        return 2 * np.sqrt(g) / (1 - g) * (v ** ((1 - g) / 2) - 1.0)

    def _phi_inv(self, p):
        g = self.g
        base = 1.0 + (1 - g) * p / (2 * np.sqrt(g))
        if np.any(base <= 0):
            raise NoChart("Riemann coordinates outside the range of the p-system chart")
        return base ** (2 / (1 - g))

    def to_riemann(self, u):
        u = np.asarray(u, dtype=float)
        v, w = u[..., 0], u[..., 1]
        if np.any(v <= 0):
            raise NoChart("specific volume must be positive")
        ph = self._phi(v)
        return np.stack([(w + ph - self.z0[0]) / self.scale, (w - ph - self.z0[1]) / self.scale], axis=-1)

    def to_state(self, r):
        r = np.asarray(r, dtype=float)
        z1 = r[..., 0] * self.scale + self.z0[0]
        z2 = r[..., 1] * self.scale + self.z0[1]
        return np.stack([self._phi_inv((z1 - z2) / 2), (z1 + z2) / 2], axis=-1)

    def gradient(self, u):
        u = np.asarray(u, dtype=float)
        c = self._c(u[..., 0])
        one = np.ones_like(c)
        return np.stack([np.stack([c, one], -1), np.stack([-c, one], -1)], -2) / self.scale


def p_system_chart(sys, gamma: float) -> PSystemChart:
    return PSystemChart(gamma, sys.center)


def _monomials(deg):
    return [(a, b) for n in range(deg + 1) for a in range(n + 1) for b in (n - a,)]


class PolynomialChart(Chart):
    """Polynomial Riemann coordinates in the scaled variable (u - center)/rho."""

    kind = "polynomial"

    def __init__(self, coeffs: np.ndarray, deg: int, center, rho: float):
        self.coeffs = np.asarray(coeffs, dtype=float)  # shape (2, n_mono)
        self.deg = deg
        self.exps = np.array(_monomials(deg))
        self.center = np.asarray(center, dtype=float)
        self.rho = float(rho)

    def _basis(self, u):
        z = (np.asarray(u, float) - self.center) / self.rho
        x, y = z[..., 0:1], z[..., 1:2]
        a, b = self.exps[:, 0], self.exps[:, 1]
        return x ** a * y ** b

    def _basis_grad(self, u):
        z = (np.asarray(u, float) - self.center) / self.rho
        x, y = z[..., 0:1], z[..., 1:2]
        a, b = self.exps[:, 0], self.exps[:, 1]
        dx = np.where(a > 0, a * x ** np.maximum(a - 1, 0) * y ** b, 0.0) / self.rho
        dy = np.where(b > 0, b * x ** a * y ** np.maximum(b - 1, 0), 0.0) / self.rho
        return dx, dy

    def to_riemann(self, u):
        return np.einsum("...m,im->...i", self._basis(u), self.coeffs)

    def gradient(self, u):
        dx, dy = self._basis_grad(u)
        gx = np.einsum("...m,im->...i", dx, self.coeffs)
        gy = np.einsum("...m,im->...i", dy, self.coeffs)
        return np.stack([gx, gy], axis=-1)

    def to_state(self, v, tol: float = 1e-14, maxit: int = 50):
        v = np.asarray(v, dtype=float)
        flat = v.reshape(-1, 2)
        G0 = self.gradient(self.center)
        u = self.center + np.linalg.solve(G0, flat.T).T
        for _ in range(maxit):
            r = self.to_riemann(u) - flat
            du = np.linalg.solve(self.gradient(u), r[..., None])[..., 0]
            u = u - du
            if np.max(np.abs(du)) < tol * max(1.0, float(np.max(np.abs(u)))):
                return u.reshape(v.shape)
        raise NewtonDivergence("polynomial chart inversion did not converge")


def fit_polynomial_chart(sys, deg: int = 8, reach: float = 1.3, n_colloc: int = 31,
                         curve_weight: float = 10.0) -> PolynomialChart:
    """Least-squares Riemann coordinates.

    v_i satisfies grad(v_i).r_j = 0 at collocation points in the ball and
    equals arclength along the i-rarefaction curve through the center.
    """
    from .curves import rarefaction_path
    from .system import eigensystem

    rho = sys.radius * reach
    t = np.linspace(-rho, rho, n_colloc)
    X, Y = np.meshgrid(t, t, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], -1)
    pts = sys.center + pts[np.linalg.norm(pts, axis=-1) <= rho]
    chart = PolynomialChart(np.zeros((2, len(_monomials(deg)))), deg, sys.center, rho)
    dx, dy = chart._basis_grad(pts)
    eig = [eigensystem(sys, p, check_domain=False) for p in pts]
    s_samples = np.linspace(-rho, rho, 4 * n_colloc + 1)
    coeffs = []
    for i in (1, 2):
        j = 2 if i == 1 else 1
        rj = np.array([e.r(j) for e in eig])
        A1 = dx * rj[:, :1] + dy * rj[:, 1:]
        path_s, path_u = rarefaction_path(sys, sys.center, i, s_samples, check_domain=False)
        A2 = chart._basis(path_u) * curve_weight
        b = np.concatenate([np.zeros(len(A1)), path_s * curve_weight])
        sol, *_ = np.linalg.lstsq(np.vstack([A1, A2]), b, rcond=None)
        coeffs.append(sol)
    chart = PolynomialChart(np.array(coeffs), deg, sys.center, rho)
    chart.coeffs[:, 0] -= chart.to_riemann(sys.center)
    return chart


def polynomial_chart(sys) -> PolynomialChart:
    return fit_polynomial_chart(sys)
