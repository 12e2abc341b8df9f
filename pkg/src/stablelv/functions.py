"""Catalog of analytic test functions fed to the generator.

Each family carries its value, the four partials the generator needs
(``dx``, ``dy``, ``dxx``, ``dyy``) and, where available, closed-form jump
integrals or certified lower bounds.  Families with bounded support
(``bump``, ``exp_tan``) evaluate to exactly zero outside it, with all
derivatives vanishing smoothly at the support edge, so jump integrands are
globally well defined.
"""

from __future__ import annotations

import math

import numpy as np

from .stable_measure import StableMeasure, lemma32_integral

__all__ = [
    "ShapeParamOutOfRange",
    "TestFunction",
    "LogSum",
    "LogX",
    "ExpTan",
    "PowerRatio",
    "ExpRatio",
    "Bump",
    "BumpProduct",
    "FAMILIES",
    "make",
]


class ShapeParamOutOfRange(ValueError):
    """A shape parameter violates its family's admissible range."""


def _out(arr, scalar_in: bool):
    arr = np.asarray(arr, dtype=float)
    return float(arr) if scalar_in and arr.ndim == 0 else arr


class TestFunction:
    """Base interface; subclasses fill in the family analytics."""

    family: str = ""
    #: open rectangle (x_lo, x_hi, y_lo, y_hi) on which the function is C^2
    domain: tuple = (0.0, math.inf, 0.0, math.inf)

    def value(self, x, y):
        raise NotImplementedError

    def dx(self, x, y):
        raise NotImplementedError

    def dy(self, x, y):
        raise NotImplementedError

    def dxx(self, x, y):
        raise NotImplementedError

    def dyy(self, x, y):
        raise NotImplementedError

    def closed_jump_integrals(self, x, y, m1: StableMeasure, m2: StableMeasure):
        """Pair of exact axis jump integrals, or ``None`` when no closed form exists."""
        return None

    def in_domain(self, x, y) -> bool:
        xl, xh, yl, yh = self.domain
        return xl < x < xh and yl < y < yh

    def __add__(self, other):
        return _Combination(((1.0, self), (1.0, other)))

    def __rmul__(self, c):
        return _Combination(((float(c), self),))


class _Combination(TestFunction):
    """Linear combination of catalog members (used by linearity checks)."""

    family = "combination"

    def __init__(self, terms):
        flat = []
        for c, f in terms:
            if isinstance(f, _Combination):
                flat.extend((c * ci, fi) for ci, fi in f.terms)
            else:
                flat.append((c, f))
        self.terms = tuple(flat)
        xl = max(f.domain[0] for _, f in self.terms)
        xh = min(f.domain[1] for _, f in self.terms)
        yl = max(f.domain[2] for _, f in self.terms)
        yh = min(f.domain[3] for _, f in self.terms)
        self.domain = (xl, xh, yl, yh)

    def _sum(self, meth, x, y):
        return sum(c * getattr(f, meth)(x, y) for c, f in self.terms)

    def value(self, x, y):
        return self._sum("value", x, y)

    def dx(self, x, y):
        return self._sum("dx", x, y)

    def dy(self, x, y):
        return self._sum("dy", x, y)

    def dxx(self, x, y):
        return self._sum("dxx", x, y)

    def dyy(self, x, y):
        return self._sum("dyy", x, y)

    def closed_jump_integrals(self, x, y, m1, m2):
        parts = [f.closed_jump_integrals(x, y, m1, m2) for _, f in self.terms]
        if any(p is None for p in parts):
            return None
        j1 = sum(c * p[0] for (c, _), p in zip(self.terms, parts))
        j2 = sum(c * p[1] for (c, _), p in zip(self.terms, parts))
        return j1, j2


class LogSum(TestFunction):
    """``ln(n + n^beta) - ln(x + y^beta)``; blows up as (x, y) -> (0, 0)."""

    family = "log_sum"

    def __init__(self, n: float, beta: float):
        if n < 1.0:
            raise ShapeParamOutOfRange(f"log_sum needs n >= 1, got {n}")
        if beta < 1.0:
            raise ShapeParamOutOfRange(f"log_sum needs beta >= 1, got {beta}")
        self.n = float(n)
        self.beta = float(beta)
        self._top = math.log(n + n ** beta)

    def value(self, x, y):
        return self._top - np.log(x + np.asarray(y, float) ** self.beta)

    def dx(self, x, y):
        return -1.0 / (x + np.asarray(y, float) ** self.beta)

    def dxx(self, x, y):
        return (x + np.asarray(y, float) ** self.beta) ** -2.0

    def dy(self, x, y):
        b = self.beta
        y = np.asarray(y, float)
        return -b * y ** (b - 1.0) / (x + y ** b)

    def dyy(self, x, y):
        b = self.beta
        y = np.asarray(y, float)
        s = x + y ** b
        return -b * (b - 1.0) * y ** (b - 2.0) / s + b * b * y ** (2.0 * b - 2.0) / s ** 2


# quintic Hermite basis on [0, 1]: position, slope and curvature at both ends
_H_COEF = np.array([
    [1.0, 0.0, 0.0, -10.0, 15.0, -6.0],
    [0.0, 1.0, 0.0, -6.0, 8.0, -3.0],
    [0.0, 0.0, 0.5, -1.5, 1.5, -0.5],
    [0.0, 0.0, 0.0, 10.0, -15.0, 6.0],
    [0.0, 0.0, 0.0, -4.0, 7.0, -3.0],
    [0.0, 0.0, 0.0, 0.5, -1.0, 0.5],
])


class _QuinticBlend:
    """C^2 bridge on [t0, t1] matching value/slope/curvature at both ends."""

    def __init__(self, t0, t1, left, right):
        self.t0, self.t1 = float(t0), float(t1)
        h = self.t1 - self.t0
        scale = np.array([1.0, h, h * h, 1.0, h, h * h])
        data = np.array([left[0], left[1], left[2], right[0], right[1], right[2]])
        self.poly = np.polynomial.Polynomial((data * scale) @ _H_COEF)
        self.d1 = self.poly.deriv(1)
        self.d2 = self.poly.deriv(2)
        self.h = h

    def value(self, t):
        return self.poly((t - self.t0) / self.h)

    def deriv(self, t):
        return self.d1((t - self.t0) / self.h) / self.h

    def deriv2(self, t):
        return self.d2((t - self.t0) / self.h) / (self.h * self.h)


class LogX(TestFunction):
    """``1 - ln(x/n)`` for x < n, constant beyond n+1, C^2 blend between.

    The plateau value is free as far as smoothness goes; ``1 - 1/(2n)``
    keeps the blend decreasing and positive.
    """

    family = "log_x"

    def __init__(self, n: float):
        if n < 1.0:
            raise ShapeParamOutOfRange(f"log_x needs n >= 1, got {n}")
        self.n = float(n)
        self.plateau = 1.0 - 1.0 / (2.0 * n)
        self.blend = _QuinticBlend(
            n, n + 1.0,
            left=(1.0, -1.0 / n, 1.0 / (n * n)),
            right=(self.plateau, 0.0, 0.0))

    def _piecewise(self, x, core, blend_fn, flat):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        out = np.empty_like(x)
        lo = x < self.n
        hi = x >= self.n + 1.0
        mid = ~lo & ~hi
        out[lo] = core(x[lo])
        out[mid] = blend_fn(x[mid])
        out[hi] = flat
        return float(out[0]) if scalar else out

    def value(self, x, y=None):
        return self._piecewise(
            x, lambda t: 1.0 - np.log(t / self.n), self.blend.value, self.plateau)

    def dx(self, x, y=None):
        return self._piecewise(x, lambda t: -1.0 / t, self.blend.deriv, 0.0)

    def dxx(self, x, y=None):
        return self._piecewise(x, lambda t: t ** -2.0, self.blend.deriv2, 0.0)

    def dy(self, x, y=None):
        return np.zeros_like(np.asarray(x, float)) if np.ndim(x) else 0.0

    def dyy(self, x, y=None):
        return np.zeros_like(np.asarray(x, float)) if np.ndim(x) else 0.0


class ExpTan(TestFunction):
    """``exp(-lam1 g0(x) - lam2 tan(y pi/2)^rho)`` on (0,1)^2, zero beyond.

    ``g0`` is ``x^-delta`` near 0 and ``(1-x)^-2`` near 1, bridged by a
    quintic blend on [c1, c2]; both ends force an essential zero of the
    exponential at the edges of the unit square.
    """

    family = "exp_tan"
    domain = (0.0, 1.0, 0.0, 1.0)

    def __init__(self, lam1: float, lam2: float, rho: float, delta: float,
                 c1: float = 0.3, c2: float = 0.7):
        if lam1 <= 1.0 or lam2 <= 1.0:
            raise ShapeParamOutOfRange("exp_tan needs lam1, lam2 > 1")
        if not 0.0 < rho < 1.0:
            raise ShapeParamOutOfRange(f"exp_tan needs 0 < rho < 1, got {rho}")
        if delta <= 1.0:
            raise ShapeParamOutOfRange(f"exp_tan needs delta > 1, got {delta}")
        if not 0.0 < c1 < c2 < 1.0:
            raise ShapeParamOutOfRange("exp_tan needs 0 < c1 < c2 < 1")
        self.lam1, self.lam2 = float(lam1), float(lam2)
        self.rho, self.delta = float(rho), float(delta)
        self.c1, self.c2 = float(c1), float(c2)
        d = self.delta
        s = 1.0 - c2
        self.blend = _QuinticBlend(
            c1, c2,
            left=(c1 ** -d, -d * c1 ** (-d - 1.0), d * (d + 1.0) * c1 ** (-d - 2.0)),
            right=(s ** -2.0, 2.0 * s ** -3.0, 6.0 * s ** -4.0))

    # --- x profile -------------------------------------------------------
    def _g0(self, x, order: int):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        d = self.delta
        lo = x <= self.c1
        hi = x >= self.c2
        mid = ~lo & ~hi
        if order == 0:
            out[lo] = x[lo] ** -d
            out[mid] = self.blend.value(x[mid])
            out[hi] = (1.0 - x[hi]) ** -2.0
        elif order == 1:
            out[lo] = -d * x[lo] ** (-d - 1.0)
            out[mid] = self.blend.deriv(x[mid])
            out[hi] = 2.0 * (1.0 - x[hi]) ** -3.0
        else:
            out[lo] = d * (d + 1.0) * x[lo] ** (-d - 2.0)
            out[mid] = self.blend.deriv2(x[mid])
            out[hi] = 6.0 * (1.0 - x[hi]) ** -4.0
        return out

    # --- y profile -------------------------------------------------------
    def _tan_pow(self, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        t = np.tan(0.5 * np.pi * y)
        r = self.rho
        half_pi = 0.5 * np.pi
        T = t ** r
        T1 = r * t ** (r - 1.0) * half_pi * (1.0 + t * t)
        T2 = (half_pi ** 2) * r * t ** (r - 2.0) * (1.0 + t * t) * (
            (r - 1.0) * (1.0 + t * t) + 2.0 * t * t)
        return T, T1, T2

    def _eval(self, x, y, which: str):
        scalar = np.ndim(x) == 0 and np.ndim(y) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        x, y = np.broadcast_arrays(x, y)
        inside = (x > 0.0) & (x < 1.0) & (y > 0.0) & (y < 1.0)
        out = np.zeros(x.shape, dtype=float)
        if np.any(inside):
            xi, yi = x[inside], y[inside]
            g0 = self._g0(xi, 0)
            T, T1, T2 = self._tan_pow(yi)
            g = np.exp(-self.lam1 * g0 - self.lam2 * T)
            if which == "value":
                vals = g
            elif which == "dx":
                vals = -self.lam1 * self._g0(xi, 1) * g
            elif which == "dxx":
                g1 = self._g0(xi, 1)
                vals = (self.lam1 ** 2 * g1 * g1 - self.lam1 * self._g0(xi, 2)) * g
            elif which == "dy":
                vals = -self.lam2 * T1 * g
            else:
                vals = (self.lam2 ** 2 * T1 * T1 - self.lam2 * T2) * g
            out[inside] = vals
        return _out(out.reshape(()) if scalar else out, scalar)

    def value(self, x, y):
        return self._eval(x, y, "value")

    def dx(self, x, y):
        return self._eval(x, y, "dx")

    def dy(self, x, y):
        return self._eval(x, y, "dy")

    def dxx(self, x, y):
        return self._eval(x, y, "dxx")

    def dyy(self, x, y):
        return self._eval(x, y, "dyy")


class PowerRatio(TestFunction):
    """``x^(beta delta) y^-delta + y^rho`` with closed-form jump integrals."""

    family = "power_ratio"

    def __init__(self, beta: float, delta: float, rho: float):
        if beta <= 0.0:
            raise ShapeParamOutOfRange(f"power_ratio needs beta > 0, got {beta}")
        if not 0.0 < delta < 1.0 / beta:
            raise ShapeParamOutOfRange(
                f"power_ratio needs 0 < delta < 1/beta = {1.0 / beta}, got {delta}")
        if not 0.0 < rho < 1.0:
            raise ShapeParamOutOfRange(f"power_ratio needs 0 < rho < 1, got {rho}")
        self.beta, self.delta, self.rho = float(beta), float(delta), float(rho)
        self.bd = self.beta * self.delta

    def value(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        return x ** self.bd * y ** -self.delta + y ** self.rho

    def dx(self, x, y):
        return self.bd * np.asarray(x, float) ** (self.bd - 1.0) \
            * np.asarray(y, float) ** -self.delta

    def dxx(self, x, y):
        return -self.bd * (1.0 - self.bd) * np.asarray(x, float) ** (self.bd - 2.0) \
            * np.asarray(y, float) ** -self.delta

    def dy(self, x, y):
        d, r = self.delta, self.rho
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        return -d * x ** self.bd * y ** (-d - 1.0) + r * y ** (r - 1.0)

    def dyy(self, x, y):
        d, r = self.delta, self.rho
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        return d * (d + 1.0) * x ** self.bd * y ** (-d - 2.0) \
            - r * (1.0 - r) * y ** (r - 2.0)

    def closed_jump_integrals(self, x, y, m1, m2):
        d, r, bd = self.delta, self.rho, self.bd
        j1 = lemma32_integral(m1, "pos_power_compensated", bd) \
            * x ** (bd - m1.alpha) * y ** -d
        j2 = lemma32_integral(m2, "neg_power_compensated", d) \
            * x ** bd * y ** (-d - m2.alpha) \
            + lemma32_integral(m2, "pos_power_compensated", r) * y ** (r - m2.alpha)
        return j1, j2


class ExpRatio(TestFunction):
    """``exp(-lam (y x^-beta)^r)``; monotone in the ratio of the two states."""

    family = "exp_ratio"

    def __init__(self, lam: float, r: float, beta: float):
        if lam <= 0.0 or beta <= 0.0:
            raise ShapeParamOutOfRange("exp_ratio needs lam, beta > 0")
        if not 0.0 < r < 1.0:
            raise ShapeParamOutOfRange(f"exp_ratio needs 0 < r < 1, got {r}")
        self.lam, self.r, self.beta = float(lam), float(r), float(beta)

    def _core(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        u = y * x ** -self.beta
        ur = u ** self.r
        return x, y, ur, np.exp(-self.lam * ur)

    def value(self, x, y):
        return self._core(x, y)[3]

    def dx(self, x, y):
        x, _, ur, g = self._core(x, y)
        return self.lam * self.r * self.beta * ur * g / x

    def dy(self, x, y):
        _, y, ur, g = self._core(x, y)
        return -self.lam * self.r * ur * g / y

    def dxx(self, x, y):
        la, r, b = self.lam, self.r, self.beta
        x, _, ur, g = self._core(x, y)
        return (la ** 2 * r ** 2 * b ** 2 * ur ** 2
                - la * r * b * (r * b + 1.0) * ur) * g / (x * x)

    def dyy(self, x, y):
        la, r = self.lam, self.r
        _, y, ur, g = self._core(x, y)
        return (la ** 2 * r ** 2 * ur ** 2 + la * r * (1.0 - r) * ur) * g / (y * y)

    def bounds(self, x, y, m1: StableMeasure, m2: StableMeasure) -> dict:
        """Certified lower bounds on the curvatures and jump integrals.

        The true ``dxx``/``dyy`` and both axis jump integrals each dominate
        the corresponding entry.
        """
        la, r, b = self.lam, self.r, self.beta
        x, y, ur, g = self._core(x, y)
        return {
            "dxx_lower": -la * r * b * (r * b + 1.0) * ur * g / (x * x),
            "dyy_lower": la * r * (1.0 - r) * ur * g / (y * y),
            "jump1_lower": -la * ur * g * x ** -m1.alpha
            * lemma32_integral(m1, "neg_power_compensated", r * b),
            "jump2_lower": -la * ur * g * y ** -m2.alpha
            * lemma32_integral(m2, "pos_power_compensated", r),
        }


class Bump(TestFunction):
    """``exp(-lam/(x-x1) - lam lam1/(x3-x))`` on (x1, x3), zero elsewhere."""

    family = "bump"

    def __init__(self, x1: float, x3: float, lam: float, lam1: float,
                 x2: float | None = None):
        if not 0.0 < x1 < x3:
            raise ShapeParamOutOfRange(f"bump needs 0 < x1 < x3, got {x1}, {x3}")
        if lam <= 0.0 or lam1 <= 0.0:
            raise ShapeParamOutOfRange("bump needs lam, lam1 > 0")
        self.x1, self.x3 = float(x1), float(x3)
        self.x2 = 0.5 * (self.x1 + self.x3) if x2 is None else float(x2)
        if not self.x1 < self.x2 < self.x3:
            raise ShapeParamOutOfRange("bump needs x1 < x2 < x3")
        self.lam, self.lam1 = float(lam), float(lam1)

    def _profile(self, x, order: int):
        scalar = np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(x)
        inside = (x > self.x1) & (x < self.x3)
        if np.any(inside):
            xi = x[inside]
            l, r = xi - self.x1, self.x3 - xi
            h = np.exp(-self.lam / l - self.lam * self.lam1 / r)
            if order == 0:
                out[inside] = h
            else:
                d1 = self.lam / (l * l) - self.lam * self.lam1 / (r * r)
                if order == 1:
                    out[inside] = h * d1
                else:
                    d1p = -2.0 * self.lam / (l ** 3) - 2.0 * self.lam * self.lam1 / (r ** 3)
                    out[inside] = h * (d1 * d1 + d1p)
        return _out(out.reshape(()) if scalar else out, scalar)

    def h(self, x):
        return self._profile(x, 0)

    def h1(self, x):
        return self._profile(x, 1)

    def h2(self, x):
        return self._profile(x, 2)

    # ratio-form evaluation: for large lam the profile itself underflows,
    # but h'/h, h''/h and h(x+z)/h(x) stay in float range on most of the
    # support, so inequality checks work where linear evaluation cannot
    def log_h(self, x):
        x = np.asarray(x, dtype=float)
        return -self.lam / (x - self.x1) - self.lam * self.lam1 / (self.x3 - x)

    def log_h_max(self) -> float:
        """Log of the profile peak (at the interior critical point)."""
        s = (self.x3 + math.sqrt(self.lam1) * self.x1) / (1.0 + math.sqrt(self.lam1))
        return float(self.log_h(s))

    def ratio_d1(self, x):
        """h'(x)/h(x) for x inside the support."""
        x = np.asarray(x, dtype=float)
        return self.lam / (x - self.x1) ** 2 - self.lam * self.lam1 / (self.x3 - x) ** 2

    def ratio_d2(self, x):
        """h''(x)/h(x) for x inside the support."""
        x = np.asarray(x, dtype=float)
        d1 = self.ratio_d1(x)
        d1p = -2.0 * self.lam / (x - self.x1) ** 3 \
            - 2.0 * self.lam * self.lam1 / (self.x3 - x) ** 3
        return d1 * d1 + d1p

    def ratio_increment(self, x: float, z) -> np.ndarray:
        """(h(x+z) - h(x) - h'(x) z) / h(x) for x inside the support."""
        z = np.asarray(z, dtype=float)
        shifted = x + z
        inside = shifted < self.x3
        rel = np.zeros_like(z)
        if np.any(inside):
            d = np.exp(self.log_h(shifted[inside]) - self.log_h(x))
            rel[inside] = d
        return rel - 1.0 - self.ratio_d1(x) * z

    def value(self, x, y=None):
        return self._profile(x, 0)

    def dx(self, x, y=None):
        return self._profile(x, 1)

    def dxx(self, x, y=None):
        return self._profile(x, 2)

    def dy(self, x, y=None):
        return 0.0 * self._profile(x, 0)

    def dyy(self, x, y=None):
        return 0.0 * self._profile(x, 0)


class BumpProduct(TestFunction):
    """Separable bump ``g1(x) g2(y)``; vanishes on the frame of its box."""

    family = "bump_product"

    def __init__(self, gx: Bump, gy: Bump):
        self.gx, self.gy = gx, gy

    def value(self, x, y):
        return self.gx.h(x) * self.gy.h(y)

    def dx(self, x, y):
        return self.gx.h1(x) * self.gy.h(y)

    def dy(self, x, y):
        return self.gx.h(x) * self.gy.h1(y)

    def dxx(self, x, y):
        return self.gx.h2(x) * self.gy.h(y)

    def dyy(self, x, y):
        return self.gx.h(x) * self.gy.h2(y)


def _make_bump_product(x1, x3, y1, y3, lam, lam1, lam_y=None, lam1_y=None):
    return BumpProduct(
        Bump(x1, x3, lam, lam1),
        Bump(y1, y3, lam if lam_y is None else lam_y,
             lam1 if lam1_y is None else lam1_y))


FAMILIES = {
    "log_sum": LogSum,
    "log_x": LogX,
    "exp_tan": ExpTan,
    "power_ratio": PowerRatio,
    "exp_ratio": ExpRatio,
    "bump": Bump,
    "bump_product": _make_bump_product,
}


def make(family: str, **shape) -> TestFunction:
    """Factory over the catalog; raises ShapeParamOutOfRange on bad shape."""
    try:
        ctor = FAMILIES[family]
    except KeyError:
        raise ShapeParamOutOfRange(f"unknown family {family!r}") from None
    return ctor(**shape)
