"""Truncated Taylor series ("jets") in one and two complex variables.

A :class:`TaylorJet2` stores ``c[i, j]`` for ``sum c[i, j] (x - x0)^i (y - y0)^j``
with independent truncation orders per axis.  Binary operations require the
same center and truncate to the smaller order on each axis, so an order
always means "coefficients known exactly up to here".  :class:`Jet1` is the
univariate counterpart used for functions of ``x`` alone (for instance the
root curve ``y = Y(x)``).

Removable singularities are handled by :func:`jet_cancel_div`, which shifts
a jet down after verifying that the discarded leading slices vanish, and by
:func:`jet_divide_y_root`, which divides by ``y - h(x)`` for a root curve
``h`` of the jet.
"""

from __future__ import annotations

import math
from typing import Union

import numpy as np
from scipy.signal import convolve2d

EPS_CANCEL = 1e-9
CENTER_TOL = 1e-12

Number = Union[int, float, complex]


class CenterMismatch(ValueError):
    pass


class CancellationError(ArithmeticError):
    """A leading coefficient that should vanish does not: the singularity is not removable."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (relative residual {residual:.3e})")
        self.residual = residual


def _same(a: complex, b: complex) -> bool:
    return abs(a - b) <= CENTER_TOL * max(1.0, abs(a), abs(b))


def _relative_size(part: np.ndarray, whole: np.ndarray) -> float:
    scale = float(np.abs(whole).max()) if whole.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(np.abs(part).max()) / scale if part.size else 0.0


def _series_div_1d(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = min(len(a), len(b))
    c = np.zeros(n, dtype=complex)
    b0 = b[0]
    for i in range(n):
        acc = a[i]
        if i:
            acc = acc - np.dot(b[1:i + 1], c[i - 1::-1])
        c[i] = acc / b0
    return c


class Jet1:
    """Univariate truncated Taylor series at ``center``."""

    __slots__ = ("center", "coeffs")

    def __init__(self, center: Number, coeffs):
        self.center = complex(center)
        self.coeffs = np.array(coeffs, dtype=complex).ravel()
        if self.coeffs.size == 0:
            raise ValueError("a jet needs at least one coefficient")

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    @classmethod
    def constant(cls, value: Number, center: Number, order: int) -> "Jet1":
        c = np.zeros(order + 1, dtype=complex)
        c[0] = value
        return cls(center, c)

    @classmethod
    def variable(cls, center: Number, order: int) -> "Jet1":
        c = np.zeros(order + 1, dtype=complex)
        c[0] = center
        if order >= 1:
            c[1] = 1.0
        return cls(center, c)

    def truncate(self, order: int) -> "Jet1":
        if order > self.order:
            raise ValueError(f"cannot raise order {self.order} to {order}")
        return Jet1(self.center, self.coeffs[:order + 1])

    def _coerce(self, other) -> "Jet1":
        if isinstance(other, Jet1):
            if not _same(self.center, other.center):
                raise CenterMismatch(f"centers {self.center} and {other.center} differ")
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return Jet1.constant(other, self.center, self.order)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        n = min(self.order, o.order) + 1
        return Jet1(self.center, self.coeffs[:n] + o.coeffs[:n])

    __radd__ = __add__

    def __neg__(self):
        return Jet1(self.center, -self.coeffs)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return Jet1(self.center, self.coeffs * other)
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        n = min(self.order, o.order) + 1
        return Jet1(self.center, np.convolve(self.coeffs[:n], o.coeffs[:n])[:n])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return Jet1(self.center, self.coeffs / other)
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return jet_div(self, o)

    def __rtruediv__(self, other):
        return jet_div(Jet1.constant(other, self.center, self.order), self)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = Jet1.constant(1.0, self.center, self.order)
        for _ in range(k):
            out = out * self
        return out

    def __call__(self, x):
        u = np.asarray(x, dtype=complex) - self.center
        return np.polynomial.polynomial.polyval(u, self.coeffs)

    def deriv(self, d: int) -> complex:
        if d > self.order:
            raise ValueError(f"derivative order {d} exceeds jet order {self.order}")
        return math.factorial(d) * complex(self.coeffs[d])

    @property
    def value(self) -> complex:
        return complex(self.coeffs[0])

    def compose(self, g: "Jet1") -> "Jet1":
        """``self(g(x))`` as a jet at ``g.center``; requires ``g(center) == self.center``."""
        if not _same(g.value, self.center):
            raise CenterMismatch(f"inner jet value {g.value} differs from outer center {self.center}")
        h = g.coeffs.copy()
        h[0] = 0.0
        lead = _leading_order(h)
        n = min(g.order, self.order if lead is None else lead * (self.order + 1) - 1)
        hj = Jet1(g.center, h[:n + 1])
        out = Jet1.constant(self.coeffs[-1], g.center, n)
        for c in self.coeffs[-2::-1]:
            out = out * hj + c
        return out

    def __repr__(self):
        return f"Jet1(center={self.center!r}, coeffs={self.coeffs!r})"


def _leading_order(h: np.ndarray):
    nz = np.flatnonzero(h)
    return None if nz.size == 0 else int(nz[0])


class TaylorJet2:
    """Bivariate truncated Taylor series with per-axis orders ``(Kx, Ky)``."""

    __slots__ = ("center", "coeffs")

    def __init__(self, center, coeffs):
        x0, y0 = center
        self.center = (complex(x0), complex(y0))
        self.coeffs = np.array(coeffs, dtype=complex)
        if self.coeffs.ndim != 2 or 0 in self.coeffs.shape:
            raise ValueError("coefficients must form a non-empty 2-d array")

    @property
    def orders(self) -> tuple[int, int]:
        return self.coeffs.shape[0] - 1, self.coeffs.shape[1] - 1

    # constructors -------------------------------------------------------
    @classmethod
    def constant(cls, value: Number, center, orders) -> "TaylorJet2":
        c = np.zeros((orders[0] + 1, orders[1] + 1), dtype=complex)
        c[0, 0] = value
        return cls(center, c)

    @classmethod
    def var_x(cls, center, orders) -> "TaylorJet2":
        c = np.zeros((orders[0] + 1, orders[1] + 1), dtype=complex)
        c[0, 0] = center[0]
        if orders[0] >= 1:
            c[1, 0] = 1.0
        return cls(center, c)

    @classmethod
    def var_y(cls, center, orders) -> "TaylorJet2":
        c = np.zeros((orders[0] + 1, orders[1] + 1), dtype=complex)
        c[0, 0] = center[1]
        if orders[1] >= 1:
            c[0, 1] = 1.0
        return cls(center, c)

    @classmethod
    def from_x(cls, jet: Jet1, y0: Number, ky: int) -> "TaylorJet2":
        """Lift a function of ``x`` alone; exact to any y-order."""
        c = np.zeros((jet.order + 1, ky + 1), dtype=complex)
        c[:, 0] = jet.coeffs
        return cls((jet.center, y0), c)

    @classmethod
    def from_y(cls, jet: Jet1, x0: Number, kx: int) -> "TaylorJet2":
        """Lift a function of ``y`` alone; exact to any x-order."""
        c = np.zeros((kx + 1, jet.order + 1), dtype=complex)
        c[0, :] = jet.coeffs
        return cls((x0, jet.center), c)

    def y_slice(self) -> Jet1:
        """The restriction ``y -> f(x0, y)``."""
        return Jet1(self.center[1], self.coeffs[0, :])

    def x_slice(self) -> Jet1:
        """The restriction ``x -> f(x, y0)``."""
        return Jet1(self.center[0], self.coeffs[:, 0])

    def truncate(self, orders) -> "TaylorJet2":
        kx, ky = orders
        if kx > self.orders[0] or ky > self.orders[1]:
            raise ValueError(f"cannot raise orders {self.orders} to {tuple(orders)}")
        return TaylorJet2(self.center, self.coeffs[:kx + 1, :ky + 1])

    # arithmetic ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, TaylorJet2):
            if not (_same(self.center[0], other.center[0]) and _same(self.center[1], other.center[1])):
                raise CenterMismatch(f"centers {self.center} and {other.center} differ")
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return TaylorJet2.constant(other, self.center, self.orders)
        if isinstance(other, Jet1):
            if not _same(self.center[0], other.center):
                raise CenterMismatch(f"x-centers {self.center[0]} and {other.center} differ")
            return TaylorJet2.from_x(other, self.center[1], self.orders[1])
        return NotImplemented

    def _shared(self, other):
        kx = min(self.orders[0], other.orders[0]) + 1
        ky = min(self.orders[1], other.orders[1]) + 1
        return self.coeffs[:kx, :ky], other.coeffs[:kx, :ky]

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        a, b = self._shared(o)
        return TaylorJet2(self.center, a + b)

    __radd__ = __add__

    def __neg__(self):
        return TaylorJet2(self.center, -self.coeffs)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        a, b = self._shared(o)
        return TaylorJet2(self.center, a - b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return TaylorJet2(self.center, self.coeffs * other)
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        a, b = self._shared(o)
        kx, ky = a.shape
        return TaylorJet2(self.center, convolve2d(a, b)[:kx, :ky])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return TaylorJet2(self.center, self.coeffs / other)
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return jet_div(self, o)

    def __rtruediv__(self, other):
        return jet_div(TaylorJet2.constant(other, self.center, self.orders), self)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = TaylorJet2.constant(1.0, self.center, self.orders)
        for _ in range(k):
            out = out * self
        return out

    # evaluation ---------------------------------------------------------
    def __call__(self, x, y):
        u = np.asarray(x, dtype=complex) - self.center[0]
        v = np.asarray(y, dtype=complex) - self.center[1]
        return np.polynomial.polynomial.polyval2d(u, v, self.coeffs)

    @property
    def value(self) -> complex:
        return complex(self.coeffs[0, 0])

    def __repr__(self):
        return f"TaylorJet2(center={self.center!r}, orders={self.orders!r})"


# ---------------------------------------------------------------------------
# module-level operations


def jet_div(a, b):
    """Regular series division ``a / b``; ``b`` must not vanish at the center."""
    if isinstance(a, Jet1) and isinstance(b, Jet1):
        if not _same(a.center, b.center):
            raise CenterMismatch(f"centers {a.center} and {b.center} differ")
        if b.coeffs[0] == 0 or _relative_size(b.coeffs[:1], b.coeffs) <= 1e-14:
            raise ZeroDivisionError("divisor vanishes at the center; use jet_cancel_div")
        return Jet1(a.center, _series_div_1d(a.coeffs, b.coeffs))
    a2 = a if isinstance(a, TaylorJet2) else None
    if a2 is None:
        a2 = b._coerce(a)
    b2 = a2._coerce(b)
    A, B = a2._shared(b2)
    if B[0, 0] == 0 or _relative_size(B[:1, :1], B) <= 1e-14:
        raise ZeroDivisionError("divisor vanishes at the center; use jet_cancel_div")
    kx, ky = A.shape
    C = np.zeros_like(A)
    b00 = B[0, 0]
    for i in range(kx):
        for j in range(ky):
            # C[i, j] is still zero here, so the (0, 0) term drops out of the sum
            s = np.sum(B[:i + 1, :j + 1] * C[i::-1, j::-1])
            C[i, j] = (A[i, j] - s) / b00
    return TaylorJet2(a2.center, C)


def jet_cancel_div(a, axis: str = "x", k: int = 1, eps: float = EPS_CANCEL, scale=None):
    """Divide by ``(x - x0)^k`` or ``(y - y0)^k`` after checking the first k slices vanish.

    The result loses ``k`` orders on ``axis``.  ``scale`` overrides the
    magnitude the residual is measured against (default: the largest
    coefficient of ``a``).
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return a
    if isinstance(a, Jet1):
        if k > a.order:
            raise ValueError(f"cannot cancel {k} orders from a jet of order {a.order}")
        head, whole = a.coeffs[:k], a.coeffs
        res = _residual(head, whole, scale)
        if res > eps:
            raise CancellationError("singularity not removable at requested order", res)
        return Jet1(a.center, a.coeffs[k:])
    if axis not in ("x", "y"):
        raise ValueError("axis must be 'x' or 'y'")
    ax = 0 if axis == "x" else 1
    if k > a.orders[ax]:
        raise ValueError(f"cannot cancel {k} orders along {axis} from orders {a.orders}")
    head = a.coeffs[:k, :] if ax == 0 else a.coeffs[:, :k]
    res = _residual(head, a.coeffs, scale)
    if res > eps:
        raise CancellationError("singularity not removable at requested order", res)
    tail = a.coeffs[k:, :] if ax == 0 else a.coeffs[:, k:]
    return TaylorJet2(a.center, tail)


def _residual(head, whole, scale):
    if scale is None:
        return _relative_size(head, whole)
    return float(np.abs(head).max()) / scale if scale else 0.0


def jet_compose_y(f: TaylorJet2, g: Jet1) -> Jet1:
    """The univariate jet of ``x -> f(x, g(x))``.

    ``g`` must be centered at ``x0`` with ``g(x0) = y0``.  Horner substitution
    of ``g - y0`` into the y-slots; the result order is the largest one that
    the available y-order supports.
    """
    x0, y0 = f.center
    if not _same(g.center, x0):
        raise CenterMismatch(f"inner jet center {g.center} differs from x-center {x0}")
    if not _same(g.value, y0):
        raise CenterMismatch(f"g(x0) = {g.value} differs from y-center {y0}")
    kx, ky = f.orders
    h = g.coeffs.copy()
    h[0] = 0.0
    lead = _leading_order(h)
    n = min(kx, g.order)
    if lead is not None:
        n = min(n, lead * (ky + 1) - 1)
    hj = Jet1(x0, h[:n + 1])
    out = Jet1(x0, f.coeffs[:n + 1, ky])
    for j in range(ky - 1, -1, -1):
        out = out * hj + Jet1(x0, f.coeffs[:n + 1, j])
    return out


def jet_divide_y_root(a: TaylorJet2, h: Jet1, eps: float = EPS_CANCEL) -> TaylorJet2:
    """Quotient of ``a(x, y)`` by ``y - h(x)`` where ``h(x0) = y0`` is a root curve of ``a``.

    Synthetic division in ``y`` with coefficients that are series in ``x``.
    The remainder ``a(x, h(x))`` is checked to vanish (relative to the
    largest coefficient of ``a``); each y-order of the quotient needs one
    more y-order of ``a`` plus one per x-order spent on ``h``.
    """
    x0, y0 = a.center
    if not _same(h.center, x0) or not _same(h.value, y0):
        raise CenterMismatch("root curve must pass through the jet center")
    kx, ky = a.orders
    if ky < 1:
        raise ValueError("need y-order >= 1 to divide by y - h(x)")
    delta = h.coeffs.copy()
    delta[0] = 0.0
    lead = _leading_order(delta)
    kx = min(kx, h.order)
    loss = 1 if lead is None else 1 + kx // lead
    ky_out = ky - loss
    if ky_out < 0:
        raise ValueError(f"y-order {ky} too small to divide by y - h(x) at x-order {kx}")
    rem = jet_compose_y(a.truncate((kx, ky)), h)
    scale = float(np.abs(a.coeffs[:kx + 1, :]).max())
    res = float(np.abs(rem.coeffs).max()) / scale if scale else 0.0
    if res > eps:
        raise CancellationError("y - h(x) does not divide the jet", res)
    d = Jet1(x0, delta[:kx + 1])
    # q_{l-1} = a_l + delta * q_l, from the top coefficient down
    q = [None] * ky
    cur = Jet1(x0, a.coeffs[:kx + 1, ky])
    q[ky - 1] = cur
    for l in range(ky - 1, 0, -1):
        cur = Jet1(x0, a.coeffs[:kx + 1, l]) + d * cur
        q[l - 1] = cur
    C = np.stack([qq.coeffs for qq in q[:ky_out + 1]], axis=1)
    return TaylorJet2((x0, y0), C)


def poly_substitute_y(f: TaylorJet2, h: Jet1) -> Jet1:
    """``x -> f(x, h(x))`` for ``f`` polynomial in ``y`` of degree at most its y-order.

    Unlike :func:`jet_compose_y`, ``h(x0)`` need not equal the y-center:
    Horner's rule in ``y - y0`` is a finite sum, so the result is exact to
    x-order ``min(kx, h.order)``.
    """
    x0, y0 = f.center
    if not _same(h.center, x0):
        raise CenterMismatch(f"inner jet center {h.center} differs from x-center {x0}")
    kx, ky = f.orders
    n = min(kx, h.order)
    shift = Jet1(x0, h.coeffs[:n + 1]) - y0
    out = Jet1(x0, f.coeffs[:n + 1, ky])
    for j in range(ky - 1, -1, -1):
        out = out * shift + Jet1(x0, f.coeffs[:n + 1, j])
    return out


def poly_substitute(f: Jet1, h: Jet1) -> Jet1:
    """``f(h(x))`` for a polynomial ``f`` (degree at most its order) at ``h``'s center."""
    shift = h - f.center
    out = Jet1.constant(f.coeffs[-1], h.center, h.order)
    for c in f.coeffs[-2::-1]:
        out = out * shift + c
    return out


def poly_divide_y(a: TaylorJet2, h: Jet1, eps: float = EPS_CANCEL) -> TaylorJet2:
    """Exact quotient of a polynomial-in-y jet by ``y - h(x)``.

    ``a`` must be a polynomial in ``y`` of degree at most its y-order that
    vanishes on ``y = h(x)``.  Synthetic division from the top coefficient
    never divides, so it stays stable when ``h(x0)`` is close to (or equal
    to) the y-center.  The quotient has y-order one less than ``a``.
    """
    x0, y0 = a.center
    if not _same(h.center, x0):
        raise CenterMismatch(f"root curve center {h.center} differs from x-center {x0}")
    kx, ky = a.orders
    if ky < 1:
        raise ValueError("need y-order >= 1 to divide by y - h(x)")
    kx = min(kx, h.order)
    shift = Jet1(x0, h.coeffs[:kx + 1]) - y0
    q = [None] * ky
    cur = Jet1(x0, a.coeffs[:kx + 1, ky])
    q[ky - 1] = cur
    for l in range(ky - 1, 0, -1):
        cur = Jet1(x0, a.coeffs[:kx + 1, l]) + shift * cur
        q[l - 1] = cur
    rem = Jet1(x0, a.coeffs[:kx + 1, 0]) + shift * q[0]
    grow = max(1.0, abs(shift.value)) ** ky
    scale = float(np.abs(a.coeffs[:kx + 1, :]).max()) * grow
    res = float(np.abs(rem.coeffs).max()) / scale if scale else 0.0
    if res > eps:
        raise CancellationError("y - h(x) does not divide the jet", res)
    return TaylorJet2((x0, y0), np.stack([qq.coeffs for qq in q], axis=1))


def jet_eval_deriv(f, dx: int, dy: int = 0) -> complex:
    """Mixed partial derivative ``d^dx/dx^dx d^dy/dy^dy f`` at the center."""
    if isinstance(f, Jet1):
        if dy:
            raise ValueError("univariate jet has no y-derivative")
        return f.deriv(dx)
    kx, ky = f.orders
    if dx > kx or dy > ky:
        raise ValueError(f"derivative ({dx}, {dy}) exceeds jet orders {f.orders}")
    return math.factorial(dx) * math.factorial(dy) * complex(f.coeffs[dx, dy])
