"""Power-series expansion of the operating-mode pgf in the coupling share p.

Writing ``Pi0(x, y) = sum_m p^m V_m(x, y)``, the functional equation splits
order by order into

    x G(x, y) V_0 = xG10 V_0(x, 0) + xG00 Pi0(0, 0)
    x G(x, y) V_m = xG10 Q_{m-1}(x, y)

with ``Q(x, y) = V(x, y) - V(x, Y~(x)) - V(0, y) + V(0, Y~(x))`` built from
``V = V_{m-1}``.  ``G`` is linear in ``y`` with the single zero ``Y~(x)``, so
every coefficient is a polynomial identity divided by ``x d(x) (y - Y~(x))``;
both factors divide the numerator exactly and are removed by jet
cancel-division.  The coefficients do not depend on p, so one cache serves
every p for a given set of rates.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .jets import (CENTER_TOL, Jet1, TaylorJet2, jet_cancel_div, jet_div, jet_eval_deriv,
                   poly_divide_y, poly_substitute, poly_substitute_y)
from .kernel import KernelFunctions
from .model import ModelParams, empty_probability, require_stable

M_MAX = 8
MAX_ORDER = 96


class OrderBudgetError(ValueError):
    """The jet orders a request needs exceed the configured budget."""


def _key(z: complex) -> complex:
    # exact rationals stay exact; anything within CENTER_TOL of 0 or 1 snaps
    for anchor in (0.0, 0.5, 1.0):
        if abs(z - anchor) <= CENTER_TOL:
            return complex(anchor)
    return complex(z)


class PsaSolution:
    """Memoised jet evaluator for the coefficient functions ``V_m``.

    Jets are cached per ``(m, center)``; a request for larger orders than the
    cached ones recomputes at the larger orders and replaces the entry.
    Evaluation is single-threaded.
    """

    def __init__(self, params: ModelParams, M_max: int = M_MAX, max_order: int = MAX_ORDER):
        require_stable(params)
        self.params = params.with_(p=0.0)
        self.M_max = M_max
        self.max_order = max_order
        self.kf = KernelFunctions(self.params)
        self.p00 = empty_probability(params)
        self._cache: dict[tuple[int, complex, complex], TaylorJet2] = {}
        self._ytilde: dict[tuple[complex, int], Jet1] = {}

    # helpers -----------------------------------------------------------
    def ytilde_jet(self, x0: complex, order: int) -> Jet1:
        key = (x0, order)
        if key not in self._ytilde:
            self._ytilde[key] = self.kf.y_tilde(Jet1.variable(x0, order))
        return self._ytilde[key]

    def _check_budget(self, orders):
        if max(orders) > self.max_order:
            raise OrderBudgetError(
                f"jet orders {tuple(orders)} exceed the budget {self.max_order}; increase order budget")

    def _divide_by_xdG(self, num: TaylorJet2, kx: int) -> TaylorJet2:
        """``num / (x d(x) (y - Y~(x)))`` at x-order ``kx``; ``num`` is polynomial in y."""
        x0 = num.center[0]
        if x0 == 0:
            num = jet_cancel_div(num, "x", 1)
        else:
            num = jet_div(num, Jet1.variable(x0, num.orders[0]))
        num = poly_divide_y(num, self.ytilde_jet(x0, num.orders[0]))
        out = jet_div(num, self.kf.d(Jet1.variable(x0, num.orders[0])))
        return out.truncate((kx, out.orders[1]))

    def _cleared(self, x0, y0, orders):
        X = TaylorJet2.var_x((x0, y0), orders)
        Y = TaylorJet2.var_y((x0, y0), orders)
        return self.kf.xG10(X, Y), self.kf.xG00(X, Y)

    # the boundary function V_0(x, 0) ----------------------------------
    def v0_boundary_jet(self, x0: complex, order: int) -> Jet1:
        """``V_0(x, 0) = -P00 xG00(x, Y~) / xG10(x, Y~)`` with its removable 0/0 at x = 1."""
        kf = self.kf
        yt = self.ytilde_jet(x0, order + 1)
        X = Jet1.variable(x0, order + 1)
        num = kf.xG00(X, yt)
        den = kf.xG10(X, yt)
        scale = float(np.abs(den.coeffs).max())
        if abs(den.value) <= 1e-9 * scale:
            num = jet_cancel_div(num, k=1, scale=scale)
            den = jet_cancel_div(den, k=1, scale=scale)
        else:
            num, den = num.truncate(order), den.truncate(order)
        return -self.p00 * (num / den)

    # coefficient jets --------------------------------------------------
    def v_jet(self, m: int, center, orders) -> TaylorJet2:
        """Jet of ``V_m`` at ``center``.

        ``V_m`` is a polynomial of degree ``m + 1`` in y, so any y-order is
        exact: higher orders are zero-padded.
        """
        if m < 0:
            raise ValueError("m must be non-negative")
        if m > self.M_max:
            raise ValueError(f"m={m} exceeds M_max={self.M_max}")
        x0, y0 = _key(complex(center[0])), _key(complex(center[1]))
        kx, ky = orders
        key = (m, x0, y0)
        hit = self._cache.get(key)
        if hit is None or hit.orders[0] < kx:
            self._check_budget((kx, m + 2))
            hit = self._v0(x0, y0, kx) if m == 0 else self._vm(m, x0, y0, kx)
            self._cache[key] = hit
        c = hit.coeffs[:kx + 1, :ky + 1]
        if ky > m + 1:
            c = np.pad(c, ((0, 0), (0, ky - m - 1)))
        return TaylorJet2((x0, y0), c)

    def _v0(self, x0, y0, kx):
        kxn = kx + 1 if x0 == 0 else kx
        g10, g00 = self._cleared(x0, y0, (kxn, 2))
        num = g10 * self.v0_boundary_jet(x0, kxn) + g00 * self.p00
        return self._divide_by_xdG(num, kx)

    def _vm(self, m, x0, y0, kx):
        kxn = kx + 1 if x0 == 0 else kx
        yt = self.ytilde_jet(x0, kxn)
        v = self.v_jet(m - 1, (x0, y0), (kxn, m + 2))
        v0y = self.v_jet(m - 1, (0.0, y0), (0, m + 2)).y_slice()
        # Q(x, y) = V(x, y) - V(x, Y~(x)) - V(0, y) + V(0, Y~(x))
        along = poly_substitute_y(v, yt) - poly_substitute(v0y, yt)
        q = v - TaylorJet2.from_y(v0y, x0, kxn) - TaylorJet2.from_x(along, y0, m + 2)
        g10, _ = self._cleared(x0, y0, (kxn, m + 2))
        return self._divide_by_xdG(g10 * q, kx)

    def v_state1_jet(self, m: int, center, orders) -> TaylorJet2:
        """Setup-mode coefficient ``gamma V_m / D(x)``."""
        v = self.v_jet(m, center, orders)
        Dj = self.kf.D(Jet1.variable(v.center[0], orders[0]))
        return v * (self.params.gamma / Dj)

    def pgf(self, x, y, p: float, M: int, mode: int = 0) -> complex:
        """Partial sum ``sum_{m<=M} p^m V_m(x, y)`` evaluated at a point."""
        f = self.v_state1_jet if mode else self.v_jet
        return complex(sum(p ** m * f(m, (x, y), (0, 0)).value for m in range(M + 1)))

    def coefficients(self, M: int):
        """``(v_{m,1}, v_{m,2})`` for m = 0..M: first derivatives of V_m at (1, 1)."""
        out = []
        for m in range(M + 1):
            j = self.v_jet(m, (1.0, 1.0), (1, 1))
            out.append((jet_eval_deriv(j, 1, 0).real, jet_eval_deriv(j, 0, 1).real))
        return out


_SOLUTIONS: dict[ModelParams, PsaSolution] = {}


def solution_for(params: ModelParams) -> PsaSolution:
    """Shared :class:`PsaSolution` for the rates of ``params`` (p is ignored)."""
    key = params.with_(p=0.0)
    sol = _SOLUTIONS.get(key)
    if sol is None:
        sol = _SOLUTIONS[key] = PsaSolution(params)
    return sol


def v0_jet(center, orders, params: ModelParams) -> TaylorJet2:
    return solution_for(params).v_jet(0, center, orders)


def vm_jet(m: int, center, orders, params: ModelParams) -> TaylorJet2:
    return solution_for(params).v_jet(m, center, orders)


def vm_state1_jet(m: int, center, orders, params: ModelParams) -> TaylorJet2:
    return solution_for(params).v_state1_jet(m, center, orders)


@dataclass(frozen=True)
class PsaMetrics:
    p: float
    M: int
    EQ1: float
    EQ2: float
    v1: tuple[float, ...] = field(repr=False)
    v2: tuple[float, ...] = field(repr=False)

    def csv_header(self) -> list[str]:
        return (["p", "M", "EQ1", "EQ2"] + [f"v_m1_{m}" for m in range(self.M + 1)]
                + [f"v_m2_{m}" for m in range(self.M + 1)])

    def csv_row(self) -> list[str]:
        return [repr(self.p), str(self.M), repr(self.EQ1), repr(self.EQ2)] + [repr(v) for v in self.v1 + self.v2]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.csv_header())
        w.writerow(self.csv_row())
        return buf.getvalue()


def psa_metrics(params: ModelParams, M: int) -> PsaMetrics:
    """Truncated-series mean queue lengths at the share ``params.p``."""
    require_stable(params)
    sol = solution_for(params)
    if M > sol.M_max:
        raise ValueError(f"M={M} exceeds M_max={sol.M_max}")
    coeffs = sol.coefficients(M)
    p, g, t = params.p, params.gamma, params.tau
    pw = p ** np.arange(M + 1)
    v1 = np.array([c[0] for c in coeffs])
    v2 = np.array([c[1] for c in coeffs])
    EQ1 = params.lambda1 * g / (t * (t + g)) + (1 + g / t) * float(pw @ v1)
    EQ2 = (1 + g / t) * float(pw @ v2)
    return PsaMetrics(p, M, EQ1, EQ2, tuple(map(float, v1)), tuple(map(float, v2)))
