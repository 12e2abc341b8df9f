"""One spectrally positive alpha-stable Levy measure: analytics and sampling.

The measure is ``mu(dz) = c_alpha z^(-1-alpha) dz`` on ``z > 0`` with the
normalization ``c_alpha = alpha (alpha-1) / (Gamma(alpha) Gamma(2-alpha))``
and index ``alpha`` in (1, 2): infinite total mass, infinite first moment
near zero, finite truncated moments away from the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as _gamma

from .quadrature import gl_nodes, singular_head, tail_integral

__all__ = [
    "NonIntegrable",
    "StableMeasure",
    "LEMMA32_KINDS",
    "lemma32_integral",
    "lemma32_quadrature",
]


class NonIntegrable(ValueError):
    """The requested moment/integral diverges for this measure."""


def gamma(x: float) -> float:
    """Double-precision Gamma (wrapped so the whole package shares one)."""
    return float(_gamma(x))


@dataclass(frozen=True)
class StableMeasure:
    alpha: float
    c_alpha: float = field(init=False)

    def __post_init__(self):
        if not (1.0 < self.alpha < 2.0):
            raise ValueError(f"alpha must lie in (1, 2), got {self.alpha}")
        a = self.alpha
        object.__setattr__(
            self, "c_alpha", a * (a - 1.0) / (gamma(a) * gamma(2.0 - a)))

    def density(self, z):
        return self.c_alpha * np.asarray(z, dtype=float) ** (-1.0 - self.alpha)

    def tail_mass(self, delta: float) -> float:
        """``int_delta^inf mu(dz) = c_alpha delta^(-alpha) / alpha``."""
        if not delta > 0.0:
            raise NonIntegrable(f"tail mass needs delta > 0, got {delta}")
        if math.isinf(delta):
            return 0.0
        return self.c_alpha * delta ** (-self.alpha) / self.alpha

    def truncated_moment(self, k: int, lo: float, hi: float) -> float:
        """``int_lo^hi z^k mu(dz)`` in closed form, for k in {1, 2}.

        The first moment diverges at the origin and the second at infinity;
        those requests raise :class:`NonIntegrable`.
        """
        if k not in (1, 2):
            raise ValueError(f"k must be 1 or 2, got {k}")
        if not (0.0 <= lo < hi):
            raise ValueError(f"need 0 <= lo < hi, got lo={lo}, hi={hi}")
        if k == 1 and lo == 0.0:
            raise NonIntegrable("first moment diverges at the origin")
        if k == 2 and math.isinf(hi):
            raise NonIntegrable("second moment diverges at infinity")
        e = k - self.alpha
        upper = 0.0 if math.isinf(hi) else hi ** e  # e < 0 there
        lower = 0.0 if lo == 0.0 else lo ** e       # e > 0 there
        return self.c_alpha * (upper - lower) / e

    def sample_jump(self, delta: float, uniform) -> float:
        """Inverse-CDF draw from the tail beyond ``delta``.

        The normalized tail is Pareto: survival ``(z/delta)^(-alpha)`` on
        ``z > delta``, so ``z = delta * u^(-1/alpha)``.
        """
        if not delta > 0.0:
            raise ValueError(f"delta must be positive, got {delta}")
        u = np.asarray(uniform, dtype=float)
        if np.any(u <= 0.0) or np.any(u > 1.0):
            raise ValueError("uniform draw must lie in (0, 1]")
        out = delta * u ** (-1.0 / self.alpha)
        return float(out) if out.ndim == 0 else out


LEMMA32_KINDS = (
    "neg_power_linear",
    "neg_power_compensated",
    "pos_power_linear",
    "pos_power_compensated",
)

# boundary guard: the pos_power_linear closed form has a Gamma pole at
# beta = alpha - 1
_POLE_GUARD = 1e-6


def _check_beta(m: StableMeasure, kind: str, beta: float) -> None:
    if kind not in LEMMA32_KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    if not beta > 0.0:
        raise ValueError(f"{kind} needs beta > 0, got {beta}")
    if kind == "pos_power_linear" and beta > m.alpha - 1.0 - _POLE_GUARD:
        raise ValueError(
            f"pos_power_linear needs beta < alpha - 1 = {m.alpha - 1.0} "
            f"(with a {_POLE_GUARD} margin), got {beta}")
    if kind == "pos_power_compensated" and beta >= 1.0:
        raise ValueError(f"pos_power_compensated needs beta < 1, got {beta}")


def lemma32_integral(m: StableMeasure, kind: str, beta: float) -> float:
    """Closed forms of the four reference jump integrals against ``mu``.

    ==========================  =========================================
    kind                        integrand / value
    ==========================  =========================================
    neg_power_linear            [1 - (1+z)^-beta] z
                                -> alpha beta G(alpha+beta-1)/(G(alpha) G(beta+1))
    neg_power_compensated       (1+z)^-beta - 1 + beta z
                                -> beta (beta+1) G(alpha+beta)/(G(alpha) G(beta+2))
    pos_power_linear            [(1+z)^beta - 1] z        (0 < beta < alpha-1)
                                -> alpha beta G(alpha-beta-1)/(G(alpha) G(1-beta))
    pos_power_compensated       (1+z)^beta - 1 - beta z   (0 < beta < 1)
                                -> -beta (1-beta) G(alpha-beta)/(G(alpha) G(2-beta))
    ==========================  =========================================
    """
    _check_beta(m, kind, beta)
    a = m.alpha
    if kind == "neg_power_linear":
        return a * beta * gamma(a + beta - 1.0) / (gamma(a) * gamma(beta + 1.0))
    if kind == "neg_power_compensated":
        return beta * (beta + 1.0) * gamma(a + beta) / (gamma(a) * gamma(beta + 2.0))
    if kind == "pos_power_linear":
        return a * beta * gamma(a - beta - 1.0) / (gamma(a) * gamma(1.0 - beta))
    return -beta * (1.0 - beta) * gamma(a - beta) / (gamma(a) * gamma(2.0 - beta))


def _head_profile(kind: str, beta: float):
    """Vectorized ``f(z)/z^2`` via the Taylor-remainder representation.

    Written as a one-dimensional integral over the interpolation variable v,
    it is free of the catastrophic cancellation the raw difference suffers
    near z = 0.
    """
    v, w = gl_nodes(32)
    if kind == "neg_power_linear":
        def profile(z):
            zv = np.multiply.outer(np.asarray(z, float), v)
            return beta * ((1.0 + zv) ** (-beta - 1.0)) @ w
    elif kind == "neg_power_compensated":
        def profile(z):
            zv = np.multiply.outer(np.asarray(z, float), v)
            return beta * (beta + 1.0) * ((1.0 + zv) ** (-beta - 2.0) * (1.0 - v)) @ w
    elif kind == "pos_power_linear":
        def profile(z):
            zv = np.multiply.outer(np.asarray(z, float), v)
            return beta * ((1.0 + zv) ** (beta - 1.0)) @ w
    else:
        def profile(z):
            zv = np.multiply.outer(np.asarray(z, float), v)
            return beta * (beta - 1.0) * ((1.0 + zv) ** (beta - 2.0) * (1.0 - v)) @ w
    return profile


def _tail_integrand(kind: str, beta: float, alpha: float):
    if kind == "neg_power_linear":
        return lambda z: (1.0 - (1.0 + z) ** (-beta)) * z ** (-alpha)
    if kind == "neg_power_compensated":
        return lambda z: ((1.0 + z) ** (-beta) - 1.0 + beta * z) * z ** (-1.0 - alpha)
    if kind == "pos_power_linear":
        return lambda z: ((1.0 + z) ** beta - 1.0) * z ** (-alpha)
    return lambda z: ((1.0 + z) ** beta - 1.0 - beta * z) * z ** (-1.0 - alpha)


def lemma32_quadrature(m: StableMeasure, kind: str, beta: float,
                       split: float = 1.0, abs_tol: float = 1e-12) -> float:
    """Independent quadrature of the four reference integrals.

    Splits at ``split``: the head uses the Taylor-remainder profile with the
    singularity-absorbing power substitution, the tail integrates the raw
    integrand mapped onto a finite interval.
    """
    _check_beta(m, kind, beta)
    profile = _head_profile(kind, beta)
    head = m.c_alpha * singular_head(profile, m.alpha, split, abs_tol)
    tail = m.c_alpha * tail_integral(_tail_integrand(kind, beta, m.alpha),
                                     split, abs_tol)
    return head + tail
