"""Quadrature helpers shared by the Levy-integral oracle and the generator.

The singular head of every jump integral has the shape
``int_0^s z^(1-alpha) phi(z) dz`` with ``phi`` smooth; substituting
``z = w^(1/(2-alpha))`` removes the endpoint singularity entirely.  The tail
is mapped onto a finite interval with ``z = s + t/(1-t)``.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.integrate import IntegrationWarning, quad

__all__ = [
    "NonConvergent",
    "gl_nodes",
    "gl01_adaptive",
    "singular_head",
    "tail_integral",
]


class NonConvergent(ArithmeticError):
    """Raised when an integral cannot be resolved to the requested tolerance."""


_GL_CACHE: dict = {}


def gl_nodes(n: int, lo: float = 0.0, hi: float = 1.0):
    """Gauss-Legendre nodes/weights mapped onto [lo, hi]."""
    key = (n, lo, hi)
    if key not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(n)
        half = 0.5 * (hi - lo)
        _GL_CACHE[key] = (lo + half * (x + 1.0), half * w)
    return _GL_CACHE[key]


def _gl_apply(fn, lo, hi, n):
    x, w = gl_nodes(n, lo, hi)
    return float(np.dot(w, fn(x)))


def gl01_adaptive(fn, abs_tol: float = 1e-12, max_depth: int = 40,
                  nodes: int = 16) -> float:
    """Adaptive Gauss-Legendre integral of a vectorized ``fn`` over [0, 1].

    Each interval is accepted when the ``nodes``- and ``2*nodes``-point rules
    agree within its share of ``abs_tol``; otherwise it is bisected, up to
    ``max_depth`` generations.
    """
    total = 0.0
    stack = [(0.0, 1.0, 0)]
    while stack:
        lo, hi, depth = stack.pop()
        coarse = _gl_apply(fn, lo, hi, nodes)
        fine = _gl_apply(fn, lo, hi, 2 * nodes)
        tol = abs_tol * (hi - lo) + 1e-12 * abs(fine)
        if abs(fine - coarse) <= tol or depth >= max_depth:
            if depth >= max_depth and abs(fine - coarse) > tol:
                raise NonConvergent(
                    f"inner integral not resolved at depth {depth}: "
                    f"|delta|={abs(fine - coarse):.3e}")
            total += fine
        else:
            mid = 0.5 * (lo + hi)
            stack.append((lo, mid, depth + 1))
            stack.append((mid, hi, depth + 1))
    return total


def _quad(fn, lo, hi, abs_tol):
    # roundoff warnings near machine precision are judged by the returned
    # error estimate instead of aborting
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, err = quad(fn, lo, hi, epsabs=abs_tol, epsrel=abs_tol, limit=200)
    if not np.isfinite(val):
        raise NonConvergent(f"integral evaluated to {val}")
    if err > 100.0 * abs_tol and err > 1e-8 * abs(val):
        raise NonConvergent(f"integral error estimate {err:.3e} exceeds tolerance")
    return val


def singular_head(phi, alpha: float, upper: float, abs_tol: float = 1e-12) -> float:
    """``int_0^upper z^(1-alpha) phi(z) dz`` for smooth scalar ``phi``.

    Valid for ``alpha`` in (1, 2); the power substitution makes the
    transformed integrand bounded at 0.
    """
    k = 1.0 / (2.0 - alpha)
    w_hi = upper ** (2.0 - alpha)
    return k * _quad(lambda w: phi(w ** k), 0.0, w_hi, abs_tol)


def tail_integral(fn, lower: float, abs_tol: float = 1e-12) -> float:
    """``int_lower^inf fn(z) dz`` on the compactified half-line.

    QUADPACK's infinite-interval rule applies the rational substitution and
    extrapolates, which copes with slow algebraic decay far better than a
    hand-rolled mapping.
    """
    return _quad(fn, lower, np.inf, abs_tol)
