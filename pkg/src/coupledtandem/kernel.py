"""Algebraic objects attached to the functional equations.

Every polynomial here is written with plain arithmetic so it can be evaluated
on complex scalars, numpy arrays, :class:`~coupledtandem.jets.Jet1` (for
functions of ``x`` alone) or :class:`~coupledtandem.jets.TaylorJet2`.

The kernel is ``H(x, y) = D(x) R(x, y) - tau*gamma*x*y``; as a quadratic in
``y`` its discriminant ``Delta(x)`` has the branch points ``0 = x1 < x2 < 1``
and the slit ``[0, x2]`` is mapped by the root pair onto the closed contour L.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import brentq

from .model import ModelParams

IN_DISK_TOL = 1e-9
NEGLIGIBLE = 1e-14


class RootCountError(RuntimeError):
    """A root-location statement (exactly one root in a disk, one branch point, ...) failed."""


class KernelFunctions:
    """Parameter-bound evaluators for the polynomial families of the model."""

    def __init__(self, params: ModelParams):
        self.params = params
        q = params
        self.lam0, self.lam1, self.nu1, self.nu2 = q.lambda0, q.lambda1, q.nu1, q.nu2
        self.gam, self.tau, self.p = q.gamma, q.tau, q.p

    # functions of x alone
    def D(self, x):
        return self.lam1 * (1 - x) + self.tau

    def d(self, x):
        """Coefficient of ``y`` in G, i.e. ``G(x, y) = d(x) y - nu2 D(x)``."""
        return self.D(x) * (self.nu2 + self.lam0 * (1 - x)) + self.lam1 * self.gam * (1 - x)

    def y_tilde(self, x):
        """The unique zero ``y`` of ``G(x, .)``."""
        den = self.d(x)
        if not hasattr(den, "coeffs") and np.any(np.asarray(den) == 0):
            raise ZeroDivisionError("pole of Y~(x)")
        return self.nu2 * self.D(x) / den

    # the functional-equation families
    def R(self, x, y):
        p = self.p
        return (x * y * (self.lam0 * (1 - x) + self.gam) + self.nu1 * p * y * (x - y)
                + self.nu2 * (1 - p) * x * (y - 1))

    def F(self, x, y):
        return self.nu2 * x * (y - 1) + self.nu1 * y * (y - x)

    def A(self, x, y):
        return (1 - self.p) * self.F(x, y)

    def B(self, x, y):
        return -self.p * self.F(x, y)

    def C(self, x, y):
        p = self.p
        return self.nu1 * (1 - p) * y * (x - y) + self.nu2 * p * x * (y - 1)

    def H(self, x, y):
        return self.D(x) * self.R(x, y) - self.tau * self.gam * x * y

    def G(self, x, y):
        return self.D(x) * (self.lam0 * y * (1 - x) + self.nu2 * (y - 1)) + self.lam1 * self.gam * y * (1 - x)

    def xG10(self, x, y):
        """``x * G10(x, y)``, a polynomial (G10 itself has a 1/x term)."""
        return self.D(x) * (self.nu2 * x * (y - 1) - self.nu1 * y * (x - y))

    def xG00(self, x, y):
        """``x * G00(x, y)``."""
        return self.D(x) * self.nu1 * y * (x - y)

    def G10(self, x, y):
        if np.any(np.asarray(x) == 0):
            raise ZeroDivisionError("G10 has a 1/x term; use xG10 at x = 0")
        return self.xG10(x, y) / x

    def G00(self, x, y):
        if np.any(np.asarray(x) == 0):
            raise ZeroDivisionError("G00 has a 1/x term; use xG00 at x = 0")
        return self.xG00(x, y) / x

    def kernel_u(self, x, y):
        """The bracket in ``H(x, y) = x y (D(x) u(x, y) - gamma tau)``."""
        p = self.p
        return (self.lam0 * (1 - x) + self.nu1 * p * (1 - y / x)
                + self.nu2 * (1 - p) * (1 - 1 / y) + self.gam)

    def K1(self, x, y):
        """Reduced kernel of the p = 1 system (``H = y K1`` when p = 1)."""
        return (self.D(x) * (self.lam0 * x * (1 - x) + self.nu1 * (x - y))
                + self.lam1 * self.gam * x * (1 - x))

    # coefficient lists (ascending powers) -----------------------------
    def _poly_D(self):
        return np.array([self.lam1 + self.tau, -self.lam1])

    def y_quadratic(self, x):
        """``(a0, a1, a2)`` with ``H(x, y) = a2 y^2 + a1 y + a0``."""
        p, Dx = self.p, self.D(x)
        a2 = -p * self.nu1 * Dx
        a1 = Dx * x * (self.lam0 * (1 - x) + self.gam + p * self.nu1 + (1 - p) * self.nu2) - self.tau * self.gam * x
        a0 = -(1 - p) * self.nu2 * x * Dx
        return a0, a1, a2

    def x_cubic(self, y):
        """Ascending coefficients of ``x -> H(x, y)``."""
        p = self.p
        r = np.array([
            -self.nu1 * p * y * y,
            y * (self.lam0 + self.gam) + self.nu1 * p * y + self.nu2 * (1 - p) * (y - 1),
            -self.lam0 * y,
        ], dtype=complex)
        out = P.polymul(self._poly_D(), r)
        out[1] -= self.tau * self.gam * y
        return out

    def u_cubic(self, y):
        """Ascending coefficients of ``x -> K1(x, y)``."""
        inner = np.array([-self.nu1 * y, self.lam0 + self.nu1, -self.lam0], dtype=complex)
        out = P.polymul(self._poly_D(), inner)
        out = P.polyadd(out, self.lam1 * self.gam * np.array([0.0, 1.0, -1.0]))
        return out

    def fg_polys(self):
        """Ascending coefficients of ``f`` and ``g`` with ``Delta(x) = x (f(x) + g(x))``."""
        p = self.p
        S = p * self.nu1 + (1 - p) * self.nu2
        Dp = self._poly_D()
        s = np.array([self.lam0 + S, -self.lam0])            # lambda0 (1 - x) + S
        e = self.lam1 * np.array([1.0, -1.0])                # lambda1 (1 - x)
        f = P.polymul(P.polymul(Dp, Dp),
                      P.polysub(P.polymul([0.0, 1.0], P.polymul(s, s)), [4 * p * (1 - p) * self.nu1 * self.nu2]))
        inner = P.polyadd(self.gam * e, 2 * P.polymul(Dp, s))
        g = P.polymul(P.polymul([0.0, 1.0], self.gam * e), inner)
        return f, g

    def delta_poly(self):
        f, g = self.fg_polys()
        return P.polymul([0.0, 1.0], P.polyadd(f, g))

    def delta(self, x):
        a0, a1, a2 = self.y_quadratic(x)
        return a1 * a1 - 4 * a2 * a0

    def g_quadratic(self):
        """Ascending coefficients of the quadratic whose zeros are the non-trivial zeros of g."""
        p = self.p
        S = p * self.nu1 + (1 - p) * self.nu2
        l0, l1 = self.lam0, self.lam1
        return np.array([
            2 * (self.tau + l1) * (l0 + S) + l1 * self.gam,
            -(2 * l0 * (2 * l1 + self.tau) + l1 * (self.gam + 2 * S)),
            2 * l0 * l1,
        ])


# ---------------------------------------------------------------------------
# root finding


def _polish(coeffs: np.ndarray, roots: np.ndarray, steps: int = 3) -> np.ndarray:
    dc = P.polyder(coeffs)
    out = roots.astype(complex)
    for _ in range(steps):
        fv = P.polyval(out, coeffs)
        dv = P.polyval(out, dc)
        ok = dv != 0
        step = np.where(ok, fv / np.where(ok, dv, 1), 0)
        cand = out - step
        # keep a Newton step only if it does not increase the residual
        better = np.abs(P.polyval(cand, coeffs)) <= np.abs(fv)
        out = np.where(better, cand, out)
    return out


def poly_roots(coeffs) -> np.ndarray:
    """Roots of an ascending-coefficient polynomial: companion eigenvalues + Newton polish.

    Leading coefficients below ``NEGLIGIBLE`` times the largest one are
    dropped; the roots they would add lie beyond ``1 / NEGLIGIBLE``.
    """
    c = np.asarray(coeffs, dtype=complex)
    big = float(np.abs(c).max()) if c.size else 0.0
    while c.size and abs(c[-1]) <= NEGLIGIBLE * big:
        c = c[:-1]
    if c.size <= 1:
        return np.array([], dtype=complex)
    return _polish(c, P.polyroots(c))


def count_zeros_in_disk(coeffs, radius: float = 1.0, n: int = 4096) -> int:
    """Argument-principle zero count of a polynomial inside ``|z| < radius``."""
    z = radius * np.exp(2j * np.pi * np.arange(n) / n)
    vals = P.polyval(z, np.asarray(coeffs, dtype=complex))
    if np.any(vals == 0):
        raise RootCountError("polynomial vanishes on the counting circle")
    ang = np.unwrap(np.angle(np.append(vals, vals[0])))
    return int(round((ang[-1] - ang[0]) / (2 * np.pi)))


def s_of_y(y, params: ModelParams):
    return params.nu1 * y * y / (params.nu1 + params.nu2 * (1 - y))


def u_of_y(y: complex, params: ModelParams) -> complex:
    """The root of ``K1(., y)`` inside the unit disk (continued by least modulus outside)."""
    kf = KernelFunctions(params)
    roots = poly_roots(kf.u_cubic(y))
    if abs(y) <= 1 + IN_DISK_TOL:
        inside = np.abs(roots) <= 1 + IN_DISK_TOL
        if inside.sum() != 1:
            raise RootCountError(f"u(y): {int(inside.sum())} roots in the closed unit disk at y={y}")
    return complex(roots[np.argmin(np.abs(roots))])


def y_roots(x: complex, params: ModelParams, strict: bool = True) -> tuple[complex, complex]:
    """Both zeros of ``H(x, .)``, the one of least modulus first.

    With ``strict`` (meaningful on ``|x| = 1``) exactly one root must lie in
    the closed unit disk.
    """
    a0, a1, a2 = KernelFunctions(params).y_quadratic(x)
    roots = poly_roots([a0, a1, a2])
    roots = roots[np.argsort(np.abs(roots), kind="stable")]
    if strict:
        inside = int(np.sum(np.abs(roots) <= 1 + IN_DISK_TOL))
        if inside != 1:
            raise RootCountError(f"{inside} y-roots in the closed unit disk at x={x}")
    return complex(roots[0]), complex(roots[1])


def x_roots(y: complex, params: ModelParams, strict: bool = True) -> tuple[complex, complex, complex]:
    """Zeros ``(X0, X1, X2)`` of ``H(., y)``: X0 in the closed unit disk, others by modulus.

    With ``lambda1 = 0`` the kernel is only quadratic in x and ``X2`` is
    reported as infinity.
    """
    roots = poly_roots(KernelFunctions(params).x_cubic(y))
    if roots.size == 0:
        raise RootCountError(f"kernel is constant in x at y={y}")
    roots = np.concatenate([roots, np.full(3 - roots.size, np.inf, dtype=complex)])
    roots = roots[np.argsort(np.abs(roots), kind="stable")]
    if strict:
        inside = int(np.sum(np.abs(roots) <= 1 + IN_DISK_TOL))
        if inside != 1:
            raise RootCountError(f"{inside} x-roots in the closed unit disk at y={y}")
    return complex(roots[0]), complex(roots[1]), complex(roots[2])


# ---------------------------------------------------------------------------
# branch points and the contour L


@dataclass(frozen=True)
class BranchData:
    x1: float
    x2: float
    delta_poly: np.ndarray
    f_poly: np.ndarray
    g_poly: np.ndarray
    g_roots: tuple[complex, ...]  # one root only when lambda1 = 0

    def delta(self, x):
        return P.polyval(x, self.delta_poly)


def branch_points(params: ModelParams, grid: int = 2001) -> BranchData:
    """Locate ``x2``, the unique zero of the discriminant in ``(0, 1]``."""
    if not 0 < params.p < 1:
        raise ValueError("branch points of the y-kernel need 0 < p < 1")
    kf = KernelFunctions(params)
    f, g = kf.fg_polys()
    dpoly = kf.delta_poly()
    xs = np.linspace(1e-9, 1.0, grid)
    vals = P.polyval(xs, dpoly)
    touching = abs(vals[-1]) <= 1e-12 * float(np.abs(dpoly).max())
    if touching:
        # p nu1 = (1 - p) nu2: Delta(1) = 0 and the slit reaches x = 1
        vals = vals[:-1]
    changes = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)
    if touching and changes.size == 0:
        x2 = 1.0
    elif changes.size == 1:
        i = changes[0]
        x2 = brentq(lambda t: P.polyval(t, dpoly), xs[i], xs[i + 1], xtol=1e-15, rtol=1e-15)
    else:
        raise RootCountError(
            f"expected one sign change of Delta on (0, 1], found {changes.size}; "
            f"Delta coefficients (ascending) = {dpoly.tolist()}")
    comp = poly_roots(dpoly)
    real = comp[np.abs(comp.imag) < 1e-8].real
    if real.size == 0 or np.min(np.abs(real - x2)) > 1e-8 * max(1.0, x2):
        raise RootCountError(f"bisection root x2={x2} not among companion roots {comp.tolist()}")
    inner = np.linspace(0, x2, 201)[1:-1]
    if np.any(P.polyval(inner, dpoly) >= 0):
        raise RootCountError("Delta is not negative on (x1, x2)")
    groots = tuple(complex(r) for r in poly_roots(kf.g_quadratic()))
    return BranchData(0.0, float(x2), dpoly, f, g, groots)


@dataclass(frozen=True)
class ContourL:
    """The closed contour traced by the kernel root pair over the slit ``[0, x2]``.

    ``points``/``x_of_point`` sample the curve counterclockwise from ``y = 0``
    (first and last sample coincide).  The polar description is taken about
    ``center``, the midpoint of the two real points ``0`` and ``Y0(x2)``:
    ``y = center + rho[k] exp(i phi[k])`` on the uniform grid ``phi``.
    """

    n: int
    points: np.ndarray
    x_of_point: np.ndarray
    center: float
    phi: np.ndarray
    rho: np.ndarray
    polar_x: np.ndarray
    x2: float
    modulus_factor: float

    @property
    def polar_points(self) -> np.ndarray:
        return self.center + self.rho * np.exp(1j * self.phi)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["phi", "re_y", "im_y", "rho", "x_preimage"])
        for ph, y, r, xp in zip(self.phi, self.polar_points, self.rho, self.polar_x):
            w.writerow([repr(float(ph)), repr(float(y.real)), repr(float(y.imag)), repr(float(r)), repr(float(xp))])
        return buf.getvalue()


def _upper_root(kf: KernelFunctions, x):
    """The root of ``H(x, .)`` with non-negative imaginary part, for x in the slit."""
    a0, a1, a2 = kf.y_quadratic(x)
    disc = np.asarray(a1 * a1 - 4 * a2 * a0, dtype=float)
    disc = np.minimum(disc, 0.0)
    # a2 < 0, so (-a1 - i sqrt(-disc)) / (2 a2) has positive imaginary part
    return (-a1 - 1j * np.sqrt(-disc)) / (2 * a2)


def polar_radius(kf: KernelFunctions, x2: float, center: float, theta):
    """``(rho, x)`` with ``center + rho e^{i theta}`` on L and ``x`` its slit preimage.

    Vectorised bisection in the slit parameter ``s`` (``x = x2 sin(s)^2``),
    along which the angle about ``center`` decreases from pi to 0 on the
    upper edge; the lower edge follows by conjugate symmetry.
    """
    theta = np.mod(np.asarray(theta, dtype=float), 2 * np.pi)
    target = np.where(theta > np.pi, 2 * np.pi - theta, theta)
    lo = np.zeros_like(target)
    hi = np.full_like(target, np.pi / 2)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        a = np.angle(_upper_root(kf, x2 * np.sin(mid) ** 2) - center)
        a = np.where(mid == 0, np.pi, a)
        right = a > target
        lo = np.where(right, mid, lo)
        hi = np.where(right, hi, mid)
    x = x2 * np.sin(0.5 * (lo + hi)) ** 2
    y = _upper_root(kf, x)
    rho = np.abs(y - center)
    rho = np.where(target == np.pi, center, rho)
    x = np.where(target == np.pi, 0.0, x)
    return rho, x


def contour_L(params: ModelParams, n: int = 512, branch: BranchData | None = None) -> ContourL:
    """Sample L on a Chebyshev grid of the slit and build its polar form."""
    if not 0 < params.p < 1:
        raise ValueError("the contour L exists only for 0 < p < 1")
    if n < 8:
        raise ValueError("n must be at least 8")
    br = branch or branch_points(params)
    kf = KernelFunctions(params)
    x2 = br.x2
    c_mod = (1 - params.p) * params.nu2 / (params.p * params.nu1)

    m = n // 2
    s = np.linspace(0.0, np.pi / 2, m + 1)
    xs = x2 * np.sin(s) ** 2  # Chebyshev spacing on [0, x2]
    up = _upper_root(kf, xs)
    up[0] = 0.0
    up[-1] = up[-1].real
    # counterclockwise about the interior: lower edge out to x2, upper edge back
    pts = np.concatenate([np.conj(up), up[-2::-1]])
    xpre = np.concatenate([xs, xs[-2::-1]])

    r2 = float(up[-1].real)
    center = 0.5 * r2
    samples = np.angle(up[1:] - center)
    if np.any(np.diff(samples) > 1e-12):
        raise RootCountError("contour L is not star-shaped about its center; polar form not unique")

    phi = 2 * np.pi * np.arange(n) / n
    rho, xp = polar_radius(kf, x2, center, phi)
    return ContourL(n=n, points=pts, x_of_point=xpre, center=center, phi=phi, rho=rho,
                    polar_x=xp, x2=x2, modulus_factor=c_mod)
