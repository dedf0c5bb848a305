"""Closed-form pgfs at the two end points of the coupling share.

With ``p = 0`` station 2 has preemptive priority and the kernel is linear in
``y``; with ``p = 1`` station 1 has priority and the reduced kernel
``K1(x, y)`` is cubic in ``x`` with one root ``u(y)`` in the unit disk.  Both
solutions are built from the vanishing conditions directly.  The
``*_variant`` functions evaluate sign variants of the same expressions that
do not satisfy the functional equation; they are kept only so the
difference can be measured.

Points where a formula is 0/0 but the pgf is analytic (``x = 1`` for
``p = 0``; ``y = 0``, ``y = 1`` and ``x = u(y)`` for ``p = 1``) are evaluated
as the mean over a small circle around the point, which is exact for an
analytic function up to aliasing of order ``r**n``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .kernel import KernelFunctions, u_of_y
from .model import ModelParams, empty_probability, require_stable

CIRCLE_RADIUS = 1e-3
CIRCLE_POINTS = 16
NEAR = 1e-5

DERIV_RADIUS = 0.05
DERIV_POINTS = 64


class DifferentiationError(ArithmeticError):
    pass


def _circle_mean(f: Callable[[complex], complex], z: complex, r: float = CIRCLE_RADIUS,
                 n: int = CIRCLE_POINTS) -> complex:
    w = np.exp(2j * np.pi * (np.arange(n) + 0.5) / n)
    return complex(np.mean([f(z + r * wk) for wk in w]))


# ---------------------------------------------------------------------------
# p = 0


def _p0_raw(kf: KernelFunctions, p00: float, x: complex, y: complex) -> complex:
    yt = kf.y_tilde(x)
    den = kf.nu2 * x * (yt - 1) - kf.nu1 * yt * (x - yt)
    num = p00 * kf.nu1 * kf.nu2 * kf.D(x) * ((yt - x) - (yt - 1) * y)
    return num / (kf.d(x) * den)


def p0_pi0(x, y, params: ModelParams) -> complex:
    """Operating-mode pgf of the p = 0 system (linear in ``y``)."""
    require_stable(params)
    kf = KernelFunctions(params.with_(p=0.0))
    p00 = empty_probability(params)
    x, y = complex(x), complex(y)
    if abs(x - 1) < NEAR:
        return _circle_mean(lambda s: _p0_raw(kf, p00, s, y), x)
    return complex(_p0_raw(kf, p00, x, y))


def p0_boundary(x, params: ModelParams) -> complex:
    """``Pi0(x, 0)`` at p = 0."""
    return p0_pi0(x, 0.0, params)


def p0_solution(x, y, params: ModelParams) -> tuple[complex, complex]:
    pi0 = p0_pi0(x, y, params)
    return pi0, params.gamma * pi0 / KernelFunctions(params).D(complex(x))


def p0_variant(x, y, params: ModelParams) -> complex:
    """Variant of the p = 0 pgf with the flipped boundary denominator and rate-free first term."""
    kf = KernelFunctions(params.with_(p=0.0))
    p00 = empty_probability(params)
    x, y = complex(x), complex(y)
    xi = kf.y_tilde(x)
    G = kf.G(x, y)
    num = xi * (y - 1) * (xi - x) + y * (x - y) * kf.nu2 * (xi - 1)
    den = kf.nu2 * x * (xi - 1) + kf.nu1 * xi * (x - xi)
    return p00 * kf.D(x) * kf.nu1 * kf.nu2 / G * num / den


def p0_boundary_variant(x, params: ModelParams) -> complex:
    kf = KernelFunctions(params.with_(p=0.0))
    p00 = empty_probability(params)
    xi = kf.y_tilde(complex(x))
    return p00 * kf.nu1 * xi * (xi - x) / (kf.nu2 * x * (xi - 1) + kf.nu1 * xi * (x - xi))


# ---------------------------------------------------------------------------
# p = 1


def _p1_axis_raw(kf: KernelFunctions, p00: float, params: ModelParams, y: complex) -> complex:
    u = u_of_y(y, params)
    return p00 * kf.nu2 * u * (1 - y) / (kf.nu2 * u * (1 - y) + kf.nu1 * y * (u - y))


def p1_axis(y, params: ModelParams) -> complex:
    """``Pi0(0, y)`` at p = 1."""
    require_stable(params)
    q = params.with_(p=1.0)
    kf = KernelFunctions(q)
    p00 = empty_probability(params)
    y = complex(y)
    if abs(y) < NEAR or abs(y - 1) < NEAR:
        return _circle_mean(lambda s: _p1_axis_raw(kf, p00, q, s), y)
    return complex(_p1_axis_raw(kf, p00, q, y))


def _p1_raw(kf: KernelFunctions, q: ModelParams, x: complex, y: complex, axis: complex) -> complex:
    u = u_of_y(y, q)
    return kf.D(x) * kf.nu1 * y * (x - u) / (u * kf.K1(x, y)) * axis


def p1_pi0(x, y, params: ModelParams) -> complex:
    """Operating-mode pgf of the p = 1 system."""
    require_stable(params)
    q = params.with_(p=1.0)
    kf = KernelFunctions(q)
    x, y = complex(x), complex(y)

    def at(xx, yy):
        return _p1_raw(kf, q, xx, yy, p1_axis(yy, q))

    if abs(y) < NEAR or abs(y - 1) < NEAR:
        return _circle_mean(lambda s: p1_pi0(x, s, q), y)
    u = u_of_y(y, q)
    if abs(x - u) < NEAR:
        return _circle_mean(lambda s: at(s, y), x)
    return complex(at(x, y))


def p1_solution(x, y, params: ModelParams) -> tuple[complex, complex]:
    pi0 = p1_pi0(x, y, params)
    return pi0, params.gamma * pi0 / KernelFunctions(params).D(complex(x))


def p1_boundary_relation_variant(y, params: ModelParams) -> complex:
    """``Pi0(0, 0) / Pi0(0, y)`` with the opposite sign of the correction term."""
    q = params.with_(p=1.0)
    u = u_of_y(complex(y), q)
    return 1 - q.nu1 * y * (u - y) / (q.nu2 * u * (1 - y))


def p1_boundary_relation(y, params: ModelParams) -> complex:
    """``Pi0(0, 0) / Pi0(0, y)`` as implied by the vanishing condition at ``x = u(y)``."""
    q = params.with_(p=1.0)
    u = u_of_y(complex(y), q)
    return 1 + q.nu1 * y * (u - y) / (q.nu2 * u * (1 - y))


# ---------------------------------------------------------------------------
# means


def cauchy_derivative(f: Callable[[complex], complex], z: complex, r: float = DERIV_RADIUS,
                      n: int = DERIV_POINTS) -> complex:
    """First derivative of an analytic ``f`` at ``z`` from its values on a circle.

    Both radii ``r`` and ``r/2`` are used; disagreement beyond 1e-9 means the
    circle is not inside the disk of analyticity.
    """
    def once(rad):
        w = np.exp(2j * np.pi * np.arange(n) / n)
        vals = np.array([f(z + rad * wk) for wk in w])
        return complex(np.mean(vals * np.conj(w)) / rad)

    d1, d2 = once(r), once(r / 2)
    if abs(d1 - d2) > 1e-9 * max(1.0, abs(d2)):
        raise DifferentiationError(f"contour derivative unstable: {d1} vs {d2}")
    return d2


@dataclass(frozen=True)
class EndpointSolution:
    which: str
    params: ModelParams
    EQ1: float
    EQ2: float

    def pi0(self, x, y) -> complex:
        return (p0_pi0 if self.which == "p0" else p1_pi0)(x, y, self.params)

    def pi1(self, x, y) -> complex:
        return self.params.gamma * self.pi0(x, y) / KernelFunctions(self.params).D(complex(x))


def closedform_metrics(which: str, params: ModelParams) -> tuple[float, float]:
    """``(EQ1, EQ2)`` of the ``p0`` or ``p1`` end-point system."""
    if which not in ("p0", "p1"):
        raise ValueError("which must be 'p0' or 'p1'")
    q = params.with_(p=0.0 if which == "p0" else 1.0)
    require_stable(q)
    pi0 = p0_pi0 if which == "p0" else p1_pi0
    kf = KernelFunctions(q)

    def total(x, y):
        return pi0(x, y, q) * (1 + q.gamma / kf.D(x))

    EQ1 = cauchy_derivative(lambda s: total(s, 1.0), 1.0).real
    EQ2 = cauchy_derivative(lambda s: total(1.0, s), 1.0).real
    return EQ1, EQ2


def endpoint_solution(which: str, params: ModelParams) -> EndpointSolution:
    EQ1, EQ2 = closedform_metrics(which, params)
    return EndpointSolution(which, params.with_(p=0.0 if which == "p0" else 1.0), EQ1, EQ2)
