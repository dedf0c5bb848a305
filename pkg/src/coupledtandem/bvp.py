"""Boundary value route for 0 < p < 1.

On the kernel zero set the functional equation reduces to

    p Pi0(0, y) - (C/F)(x, y) Pi0(0, 0) = (1 - p) Pi0(x, 0).

For ``x`` on the slit ``[0, x2]`` the right side is real and ``y`` runs over
the closed contour L, so ``Im Pi0(0, y)`` is known on L.  Mapping the
interior of L conformally onto the unit disk turns this into a Dirichlet
problem for the imaginary part, solved by the Schwarz integral (the
discrete conjugate function on a uniform grid).  The map itself comes from
the Theodorsen fixed point for the boundary correspondence.

L passes through ``y = 0`` and the real point ``r2 = Y0(x2) > 0``, so the
map is normalised at the midpoint ``c0 = r2 / 2``: ``gamma0(0) = c0``,
``gamma0(1) = r2``, ``gamma0(-1) = 0``.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .kernel import (KernelFunctions, RootCountError, branch_points, polar_radius, x_roots,
                     y_roots)
from .model import ModelParams, empty_probability, require_stable

log = logging.getLogger(__name__)

N_GRID = 512
THEODORSEN_TOL = 1e-12
THEODORSEN_MAXIT = 200
KERNEL_NEAR = 1e-4
LIMIT_RADIUS = 1e-3
LIMIT_POINTS = 16


class TheodorsenError(RuntimeError):
    pass


class MapInversionError(RuntimeError):
    pass


class BoundaryPoleError(ArithmeticError):
    """``F`` vanishes where the boundary relation needs ``C/F``."""


def conjugate(u: np.ndarray) -> np.ndarray:
    """Discrete conjugate function of real samples on a uniform periodic grid."""
    n = u.size
    uh = np.fft.rfft(u)
    mult = -1j * np.ones(uh.size)
    mult[0] = 0.0
    if n % 2 == 0:
        mult[-1] = 0.0
    return np.fft.irfft(mult * uh, n)


def _analytic_coeffs(u: np.ndarray) -> np.ndarray:
    """Taylor coefficients of the analytic function whose real part on |z| = 1 is ``u``."""
    n = u.size
    uh = np.fft.rfft(u) / n
    c = 2 * uh
    c[0] = uh[0]
    if n % 2 == 0:
        c[-1] = uh[-1]
    return c


def _polyval(c: np.ndarray, z):
    return np.polynomial.polynomial.polyval(z, c)


@dataclass(frozen=True)
class ConformalMap:
    """``gamma0``: unit disk -> interior of a star-shaped contour about ``center``."""

    n_grid: int
    center: float
    phi: np.ndarray
    psi: np.ndarray
    rho_of_psi: np.ndarray
    log_coeffs: np.ndarray = field(repr=False)
    iterations: int = 0
    contraction: float = 0.0
    rho_fn: Callable = field(repr=False, default=None)

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.n_grid, 2 * np.pi / self.n_grid)

    @property
    def boundary_points(self) -> np.ndarray:
        return self.center + self.rho_of_psi * np.exp(1j * self.psi)

    def gamma0(self, z):
        z = np.asarray(z, dtype=complex)
        return self.center + z * np.exp(_polyval(self.log_coeffs, z))

    def dgamma0(self, z):
        z = np.asarray(z, dtype=complex)
        e = np.exp(_polyval(self.log_coeffs, z))
        dl = _polyval(np.polynomial.polynomial.polyder(self.log_coeffs), z)
        return e * (1 + z * dl)

    def correspondence_residual(self) -> float:
        """Largest defect of the fixed-point equation and of ``gamma0`` on the boundary grid."""
        fixed = self.psi - self.phi - conjugate(np.log(self.rho_fn(self.psi)))
        on_grid = self.gamma0(np.exp(1j * self.phi)) - self.boundary_points
        return max(float(np.abs(fixed).max()), float(np.abs(on_grid).max()))

    def contains(self, y, tol: float = 0.0) -> np.ndarray:
        """Point-in-contour test (closed interior when ``tol >= 0``)."""
        y = np.asarray(y, dtype=complex)
        w = y - self.center
        return np.abs(w) <= self.rho_fn(np.angle(w)) * (1 + tol)

    def gamma(self, y, tol: float = 1e-13, maxit: int = 50) -> complex:
        """Inverse map by Newton iteration seeded from the boundary correspondence."""
        y = complex(y)
        w = y - self.center
        if w == 0:
            return 0j
        th = np.angle(w)
        rad = abs(w) / float(self.rho_fn(th))
        # angle phi with psi(phi) = th, from the monotone boundary correspondence
        ext_psi = np.concatenate([self.psi - 2 * np.pi, self.psi, self.psi + 2 * np.pi])
        ext_phi = np.concatenate([self.phi - 2 * np.pi, self.phi, self.phi + 2 * np.pi])
        ph = float(np.interp(th, ext_psi, ext_phi))
        z = min(rad, 1.0) * np.exp(1j * ph)
        for _ in range(maxit):
            step = (complex(self.gamma0(z)) - y) / complex(self.dgamma0(z))
            z -= step
            if abs(step) <= tol:
                break
        else:
            z = self._ray_bisect(y)
        if abs(complex(self.gamma0(z)) - y) > 1e-9 * max(1.0, abs(y)):
            raise MapInversionError(f"could not invert the conformal map at y={y}")
        return complex(z)

    def _ray_bisect(self, y: complex) -> complex:
        # fallback: bisection on the modulus along the ray of the seed angle
        w = y - self.center
        ph = np.angle(w)
        lo, hi = 0.0, 1.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if abs(complex(self.gamma0(mid * np.exp(1j * ph))) - self.center) < abs(w):
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi) * np.exp(1j * ph)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["phi", "psi", "re_y", "im_y"])
        for ph, ps, y in zip(self.phi, self.psi, self.boundary_points):
            wr.writerow([repr(float(ph)), repr(float(ps)), repr(float(y.real)), repr(float(y.imag))])
        return buf.getvalue()


def theodorsen_solve(rho_fn: Callable, center: float = 0.0, n_grid: int = N_GRID,
                     tol: float = THEODORSEN_TOL, maxit: int = THEODORSEN_MAXIT) -> ConformalMap:
    """Boundary correspondence ``psi(phi) = phi + conj[log rho(psi)](phi)`` by fixed-point iteration.

    ``rho_fn`` gives the polar radius of the contour about ``center`` as a
    vectorised function of the angle.
    """
    if n_grid < 8 or n_grid & (n_grid - 1):
        raise ValueError("n_grid must be a power of two >= 8")
    phi = 2 * np.pi * np.arange(n_grid) / n_grid
    psi = phi.copy()
    changes = []
    for it in range(1, maxit + 1):
        new = phi + conjugate(np.log(rho_fn(psi)))
        change = float(np.abs(new - psi).max())
        psi = new
        changes.append(change)
        if change <= tol:
            break
    else:
        rate = changes[-1] / changes[-2] if len(changes) > 1 and changes[-2] else float("nan")
        raise TheodorsenError(
            f"no convergence after {maxit} iterations (last change {changes[-1]:.3e}, "
            f"observed contraction {rate:.3f}; the contour may violate the epsilon-condition)")
    contraction = changes[-1] / changes[-2] if len(changes) > 1 and changes[-2] else 0.0
    rho = rho_fn(psi)
    coeffs = _analytic_coeffs(np.log(rho))
    return ConformalMap(n_grid, float(center), phi, psi, rho, coeffs, it, contraction, rho_fn)


def model_map(params: ModelParams, n_grid: int = N_GRID) -> ConformalMap:
    """Conformal map for the interior of the model contour L."""
    if not 0 < params.p < 1:
        raise ValueError("the boundary value route needs 0 < p < 1")
    kf = KernelFunctions(params)
    br = branch_points(params)
    r2 = float(y_roots(br.x2, params, strict=False)[0].real)
    center = 0.5 * r2
    return theodorsen_solve(lambda t: polar_radius(kf, br.x2, center, t)[0], center, n_grid)


def circle_map_error(n_grid: int = 256, a: float = 0.3) -> tuple[ConformalMap, float]:
    """Theodorsen check on the unit disk centred at ``a``, whose map is known exactly."""
    def rho(t):
        return a * np.cos(t) + np.sqrt(1 - (a * np.sin(t)) ** 2)

    cm = theodorsen_solve(rho, 0.0, n_grid)
    z = 0.9 * np.exp(2j * np.pi * np.arange(64) / 64)
    exact = a + (z - a) / (1 - a * z)
    zb = np.exp(1j * cm.phi)
    exact_b = a + (zb - a) / (1 - a * zb)
    err = max(float(np.abs(cm.gamma0(z) - exact).max()), float(np.abs(cm.boundary_points - exact_b).max()))
    return cm, err


# ---------------------------------------------------------------------------
# the boundary condition and the solution


def slit_preimage(y, params: ModelParams):
    """Real ``x`` on the slit with ``Y(x) = y`` for ``y`` on L (``|y|^2 = x (1-p) nu2 / (p nu1)``)."""
    return np.abs(y) ** 2 * params.p * params.nu1 / ((1 - params.p) * params.nu2)


def boundary_value_c(y, params: ModelParams):
    """``Im[Pi0(0,0) C(x, y) / F(x, y)]`` at points of L, ``x`` the slit preimage."""
    y = np.asarray(y, dtype=complex)
    kf = KernelFunctions(params)
    x = slit_preimage(y, params)
    F = kf.F(x, y)
    C = kf.C(x, y)
    real = np.abs(y.imag) <= 1e-14 * np.maximum(1.0, np.abs(y))
    if np.any((np.abs(F) < 1e-13) & ~real):
        raise BoundaryPoleError("F vanishes at a non-real point of L")
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.imag(empty_probability(params) * C / F)
    return np.where(real, 0.0, val)


def _circle_mean(f: Callable[[complex], complex], z: complex) -> complex:
    """Value of an analytic ``f`` at a removable point, as its mean over a small circle."""
    w = np.exp(2j * np.pi * (np.arange(LIMIT_POINTS) + 0.5) / LIMIT_POINTS)
    return complex(np.mean([f(z + LIMIT_RADIUS * wk) for wk in w]))


@dataclass(frozen=True)
class BvpSolution:
    params: ModelParams
    map: ConformalMap
    K: float
    boundary_c: np.ndarray = field(repr=False)
    schwarz_coeffs: np.ndarray = field(repr=False)

    @property
    def p00(self) -> float:
        return empty_probability(self.params)

    def _schwarz(self, z):
        return self.K + 1j * _polyval(self.schwarz_coeffs, z)

    def pi0_axis_y(self, y) -> complex:
        """``Pi0(0, y)``: Schwarz integral inside L, kernel continuation elsewhere."""
        y = complex(y)
        if y == 0:
            return complex(self.p00)
        if bool(self.map.contains(y)):
            return complex(self._schwarz(self.map.gamma(y)))
        return self._axis_by_continuation(y)

    def _axis_by_continuation(self, y: complex) -> complex:
        q = self.params
        kf = KernelFunctions(q)
        x0 = x_roots(y, q, strict=False)[0]
        # a little slack: the removable-point circle around y = 1 leaves the disk by LIMIT_RADIUS
        if abs(x0) > 1 + 10 * LIMIT_RADIUS:
            raise RootCountError(f"no x-root of the kernel in the unit disk at y={y}")
        F = kf.F(x0, y)
        if abs(F) < 1e-9:
            if abs(kf.C(x0, y)) > 1e-9:
                raise BoundaryPoleError(f"F(X0(y), y) = 0 at y={y}: pole of the continued Pi0(0, y)")
            return _circle_mean(self._axis_by_continuation, y)
        b = self.pi0_axis_x(x0, avoid=y)
        return complex(((1 - q.p) * b + kf.C(x0, y) / F * self.p00) / q.p)

    def pi0_axis_x(self, x, avoid: complex | None = None) -> complex:
        """``Pi0(x, 0)`` from the kernel relation at a root ``y`` of ``H(x, .)`` inside L."""
        x = complex(x)
        q = self.params
        if x == 0:
            return complex(self.p00)
        kf = KernelFunctions(q)
        roots = y_roots(x, q, strict=False)
        inside = [r for r in roots if bool(self.map.contains(r, 1e-12))
                  and (avoid is None or abs(r - avoid) > 1e-9)]
        if not inside:
            raise RootCountError(f"no kernel root inside L at x={x}")
        y = inside[0]
        F = kf.F(x, y)
        if abs(F) < 1e-9:
            if abs(kf.C(x, y)) > 1e-9:
                raise BoundaryPoleError(f"F(x, Y0(x)) = 0 at x={x}")
            # removable (the point x = 1, y = 1)
            return _circle_mean(self.pi0_axis_x, x)
        a = complex(self._schwarz(self.map.gamma(y)))
        return complex((q.p * a - kf.C(x, y) / F * self.p00) / (1 - q.p))

    def _pi0_direct(self, x: complex, y: complex) -> complex:
        kf = KernelFunctions(self.params)
        num = (kf.A(x, y) * self.pi0_axis_x(x) + kf.B(x, y) * self.pi0_axis_y(y)
               + kf.C(x, y) * self.p00)
        return complex(kf.D(x) * num / kf.H(x, y))

    def pi0(self, x, y) -> complex:
        """``Pi0(x, y)``; within ``KERNEL_NEAR`` of the kernel zero set the circle mean in y is used."""
        x, y = complex(x), complex(y)
        if x == 0:
            return self.pi0_axis_y(y)
        if y == 0:
            return self.pi0_axis_x(x)
        roots = y_roots(x, self.params, strict=False)
        if min(abs(y - r) for r in roots) < KERNEL_NEAR:
            return _circle_mean(lambda s: self._pi0_direct(x, s), y)
        return self._pi0_direct(x, y)

    def pgf(self, x, y) -> tuple[complex, complex]:
        pi0 = self.pi0(x, y)
        return pi0, self.params.gamma * pi0 / KernelFunctions(self.params).D(complex(x))


def bvp_solve(params: ModelParams, n_grid: int = N_GRID) -> BvpSolution:
    require_stable(params)
    cmap = model_map(params, n_grid)
    c = boundary_value_c(cmap.boundary_points, params)
    v = c / params.p
    coeffs = _analytic_coeffs(v)
    # gamma0(-1) = 0, where Pi0(0, 0) is known: fix the real constant there
    K = empty_probability(params) + float(np.real(-1j * _polyval(coeffs, -1.0)))
    return BvpSolution(params, cmap, K, c, coeffs)


def pi0_on_0y(y, sol: BvpSolution) -> complex:
    return sol.pi0_axis_y(y)


def pi0_on_x0(x, sol: BvpSolution) -> complex:
    return sol.pi0_axis_x(x)


def bvp_pgf(x, y, sol: BvpSolution) -> tuple[complex, complex]:
    return sol.pgf(x, y)


# ---------------------------------------------------------------------------
# means


def one_sided_derivative(g: Callable[[float], complex], at: float, value_at: complex,
                         h: float = 1e-3, levels: int = 3) -> float:
    """Richardson-extrapolated backward difference of ``g`` at ``at``."""
    table = []
    for k in range(levels):
        hk = h / 2 ** k
        table.append([(value_at - g(at - hk)) / hk])
    for j in range(1, levels):
        for k in range(j, levels):
            f = 2 ** j
            table[k].append((f * table[k][j - 1] - table[k - 1][j - 1]) / (f - 1))
    return float(np.real(table[-1][-1]))


def bvp_metrics(sol: BvpSolution, params: ModelParams | None = None, h: float = 1e-3) -> tuple[float, float]:
    """``(EQ1, EQ2)`` by one-sided differences of ``Pi0 + Pi1`` approaching (1, 1) from inside."""
    q = sol.params if params is None else params
    kf = KernelFunctions(q)

    def total_x(x):
        return sol._pi0_direct(complex(x), 1.0 + 0j) * (1 + q.gamma / kf.D(x))

    def total_y(y):
        return sol._pi0_direct(1.0 + 0j, complex(y)) * (1 + q.gamma / q.tau)

    EQ1 = one_sided_derivative(total_x, 1.0, 1.0, h)
    EQ2 = one_sided_derivative(total_y, 1.0, 1.0, h)
    coarse = one_sided_derivative(total_x, 1.0, 1.0, 4 * h), one_sided_derivative(total_y, 1.0, 1.0, 4 * h)
    drift = max(abs(EQ1 - coarse[0]) / abs(EQ1), abs(EQ2 - coarse[1]) / abs(EQ2))
    if drift > 1e-4:
        log.warning("mean estimates move by %.2e (relative) between step %g and %g", drift, h, 4 * h)
    return EQ1, EQ2


def pole_scan(sol: BvpSolution, n: int = 40, threshold: float = 1e-3) -> list[complex]:
    """Grid points of the unit disk outside L where ``|F(X0(y), y)|`` is small."""
    q = sol.params
    kf = KernelFunctions(q)
    hits = []
    g = np.linspace(-1, 1, n)
    for re in g:
        for im in g:
            y = complex(re, im)
            if abs(y) > 1 or y == 0 or bool(sol.map.contains(y)):
                continue
            x0 = x_roots(y, q, strict=False)[0]
            if abs(kf.F(x0, y)) < threshold:
                hits.append(y)
    return hits
