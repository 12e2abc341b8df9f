"""Model parameters, derived exponent algebra and the extinction-regime classifier.

The two-type jump-diffusion system has, for each component, a self-drift
``a1 x^(p1+1)``, a diffusion ``sqrt(2 a2 x^(p2+2))``, a spectrally positive
stable jump part with coefficient ``a3 x^(p3+alpha1)`` and a cross-interaction
drift ``eta1 x^theta1 y^kappa1`` (with the symmetric b/q/eta2 set for the
second component).  The classifier maps a parameter set to the verdict of the
extinction case table, recording every inequality side it evaluated.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace

__all__ = [
    "ConstraintViolation",
    "ModelParams",
    "DerivedExponents",
    "RegimeVerdict",
    "VERDICTS",
    "validate",
    "derived_exponents",
    "classify",
]


class ConstraintViolation(ValueError):
    """A parameter value breaks one of the model's standing assumptions."""

    def __init__(self, field_name: str, reason: str):
        self.field = field_name
        self.reason = reason
        super().__init__(f"{field_name}: {reason}")


@dataclass(frozen=True)
class ModelParams:
    """Coefficients, exponents and initial state of the two-type system.

    All fields are plain floats; validation is done by :func:`validate`
    (construction alone performs no checks so that deliberately invalid
    values can be built in tests).
    """

    # X component
    a1: float = 0.0
    a2: float = 0.0
    a3: float = 0.0
    p1: float = 0.0
    p2: float = 0.0
    p3: float = 0.0
    alpha1: float = 1.5
    eta1: float = 1.0
    theta1: float = 1.0
    kappa1: float = 1.0
    # Y component
    b1: float = 0.0
    b2: float = 0.0
    b3: float = 0.0
    q1: float = 0.0
    q2: float = 0.0
    q3: float = 0.0
    alpha2: float = 1.5
    eta2: float = 1.0
    theta2: float = 1.0
    kappa2: float = 1.0
    # initial state
    x0: float = 1.0
    y0: float = 1.0

    def replace(self, **kw) -> "ModelParams":
        return replace(self, **kw)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_mapping(cls, mapping) -> "ModelParams":
        """Build from a str->value mapping, ignoring unrelated keys."""
        known = {f.name for f in fields(cls)}
        kw = {k: float(v) for k, v in mapping.items() if k in known}
        return cls(**kw)


@dataclass(frozen=True)
class DerivedExponents:
    """Effective small-state exponents and coefficients of each component.

    ``p`` is the smallest exponent among the active (nonzero-coefficient)
    self-terms of X and ``a`` the summed coefficient of the terms achieving
    it; ``q``/``b`` are the same for Y.
    """

    p: float
    q: float
    a: float
    b: float


VERDICTS = (
    "NoExtinctionEither",
    "NoExtinctionY",
    "PartialExtinctionY",
    "SureExtinctionY",
    "ConjecturedSureExtinctionY",
    "ConjecturedPartialExtinctionY",
    "Unsettled",
)


@dataclass(frozen=True)
class RegimeVerdict:
    verdict: str
    fired_conditions: tuple = ()
    boundary_quantities: dict = field(default_factory=dict)

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(
            {
                "verdict": self.verdict,
                "fired_conditions": list(self.fired_conditions),
                "boundary_quantities": {
                    k: self.boundary_quantities[k] for k in sorted(self.boundary_quantities)
                },
            },
            indent=indent,
        )


def _nonneg(params: ModelParams, names) -> None:
    for n in names:
        v = getattr(params, n)
        if not math.isfinite(v) or v < 0.0:
            raise ConstraintViolation(n, f"must be finite and >= 0, got {v}")


def _positive(params: ModelParams, names) -> None:
    for n in names:
        v = getattr(params, n)
        if not math.isfinite(v) or v <= 0.0:
            raise ConstraintViolation(n, f"must be finite and > 0, got {v}")


def validate(params: ModelParams, strict: bool = True) -> ModelParams:
    """Check the standing model assumptions; return ``params`` unchanged.

    Strict mode enforces the full set (``a2+a3 > 0``, ``b2+b3 > 0`` and
    ``eta1, eta2 > 0``).  Relaxed mode (``strict=False``) drops those three so
    single-mechanism and interaction-free configurations can be simulated in
    engine tests; everything else still holds.
    """
    for n in ("alpha1", "alpha2"):
        v = getattr(params, n)
        if not (1.0 < v < 2.0):
            raise ConstraintViolation(n, f"stable index must lie in (1, 2), got {v}")
    _nonneg(params, ("a1", "a2", "a3", "b1", "b2", "b3",
                     "p1", "p2", "p3", "q1", "q2", "q3",
                     "theta1", "theta2"))
    _positive(params, ("kappa1", "kappa2", "x0", "y0"))
    if strict:
        _positive(params, ("eta1", "eta2"))
        if params.a2 + params.a3 <= 0.0:
            raise ConstraintViolation("a2+a3", "at least one of a2, a3 must be positive")
        if params.b2 + params.b3 <= 0.0:
            raise ConstraintViolation("b2+b3", "at least one of b2, b3 must be positive")
    else:
        _nonneg(params, ("eta1", "eta2"))
    return params


def derived_exponents(params: ModelParams) -> DerivedExponents:
    """Effective exponents/coefficients over the active self-terms only.

    A term is active when its coefficient is nonzero; the minimum of the
    exponents runs over active terms (an inactive pair never contributes a
    literal zero), and the coefficient sums the active terms whose exponent
    attains the minimum.
    """
    validate(params, strict=True)

    def eff(coeffs, exps):
        active = [(c, e) for c, e in zip(coeffs, exps) if c > 0.0]
        m = min(e for _, e in active)
        s = sum(c for c, e in active if e == m)
        return m, s

    p, a = eff((params.a1, params.a2, params.a3), (params.p1, params.p2, params.p3))
    q, b = eff((params.b1, params.b2, params.b3), (params.q1, params.q2, params.q3))
    return DerivedExponents(p=p, q=q, a=a, b=b)


class _Cmp:
    """Inequality evaluation with a tolerance margin and a value log.

    Comparisons within ``margin`` (scaled by the magnitudes involved) count
    as equalities, so near-boundary parameter sets route to the conjectured
    branches rather than firing a strict theorem case.
    """

    def __init__(self, margin: float, log: dict):
        self.margin = margin
        self.log = log

    def _tol(self, x: float, y: float) -> float:
        return self.margin * max(1.0, abs(x), abs(y))

    def record(self, tag: str, lhs: float, rhs: float) -> None:
        self.log[tag + ".lhs"] = lhs
        self.log[tag + ".rhs"] = rhs

    def lt(self, tag: str, lhs: float, rhs: float) -> bool:
        self.record(tag, lhs, rhs)
        return lhs < rhs - self._tol(lhs, rhs)

    def gt(self, tag: str, lhs: float, rhs: float) -> bool:
        self.record(tag, lhs, rhs)
        return lhs > rhs + self._tol(lhs, rhs)

    def eq(self, tag: str, lhs: float, rhs: float) -> bool:
        self.record(tag, lhs, rhs)
        return abs(lhs - rhs) <= self._tol(lhs, rhs)

    def ge(self, tag: str, lhs: float, rhs: float) -> bool:
        self.record(tag, lhs, rhs)
        return lhs >= rhs - self._tol(lhs, rhs)


def classify(params: ModelParams, margin: float = 1e-12) -> RegimeVerdict:
    """Map a validated parameter set to its extinction-regime verdict.

    Cases are evaluated in order: no-extinction, partial extinction,
    sure extinction, then the two conjectured regimes; ``Unsettled`` when
    nothing fires.  Every inequality side inspected along the way lands in
    ``boundary_quantities``.
    """
    validate(params, strict=True)
    d = derived_exponents(params)
    th1, th2 = params.theta1, params.theta2
    k1, k2 = params.kappa1, params.kappa2
    e1, e2 = params.eta1, params.eta2
    p, q, a, b = d.p, d.q, d.a, d.b

    log: dict = {"p": p, "q": q, "a": a, "b": b,
                 "theta1": th1, "theta2": th2, "kappa1": k1, "kappa2": k2}
    c = _Cmp(margin, log)

    # no-extinction region: theta2 >= 1 protects Y (and theta1 >= 1 protects X)
    th1_ge1 = c.ge("theta1>=1", th1, 1.0)
    th2_ge1 = c.ge("theta2>=1", th2, 1.0)
    if th2_ge1:
        if th1_ge1:
            return RegimeVerdict("NoExtinctionEither", ("T1.2(i)",), log)
        return RegimeVerdict("NoExtinctionY", ("T1.2(i)",), log)

    # below here theta2 < 1 so q + 1 - theta2 > 0 and 1 - theta2 > 0
    denom = q + 1.0 - th2
    pq_threshold = k2 * q / denom
    cross_threshold = k2 * (q - k1) / denom

    fired: list[str] = []
    if th1_ge1:
        if c.lt("T1.2(iia)", p, pq_threshold):
            fired.append("T1.2(iia)")
        if c.eq("T1.2(iib).p=0", p, 0.0) and c.eq("T1.2(iib).q=0", q, 0.0) \
                and c.lt("T1.2(iib)", b / a, k2 / (1.0 - th2)):
            fired.append("T1.2(iib)")
        # the extra "theta1 >= 1" printed inside this subcase repeats the
        # case header and is treated as redundant
        if c.lt("T1.2(iic)", th1 - 1.0, cross_threshold):
            fired.append("T1.2(iic)")
        if c.eq("T1.2(iid).theta1=1", th1, 1.0) and c.eq("T1.2(iid).q=kappa1", q, k1) \
                and c.lt("T1.2(iid)", b / e1, k2 / (k1 + 1.0 - th2)):
            fired.append("T1.2(iid)")
        if fired:
            return RegimeVerdict("PartialExtinctionY", tuple(fired), log)

        if c.gt("T1.2(iii)", th1 - 1.0, cross_threshold):
            sub: list[str] = []
            if c.gt("T1.2(iiia)", p, pq_threshold):
                sub.append("T1.2(iiia)")
            if c.eq("T1.2(iiib).p=0", p, 0.0) and c.eq("T1.2(iiib).q=0", q, 0.0) \
                    and c.gt("T1.2(iiib)", b / a, k2 / (1.0 - th2)):
                sub.append("T1.2(iiib)")
            if sub:
                return RegimeVerdict("SureExtinctionY", ("T1.2(iii)", *sub), log)

    # conjectured branches (theta2 < 1 throughout)
    def sub_primes() -> list[str]:
        out = []
        if c.gt("C1.4(ia')", p, pq_threshold):
            out.append("(ia')")
        if c.gt("C1.4(ib').p>0", p, 0.0) and c.gt("C1.4(ib').q>0", q, 0.0) \
                and c.eq("C1.4(ib').p=", p, pq_threshold):
            lhs = a * p / (q * denom)
            rhs = (b / (1.0 - th2)) ** ((1.0 - th2) / denom) * (e2 / q) ** (q / denom)
            if c.lt("C1.4(ib')", lhs, rhs):
                out.append("(ib')")
        if c.eq("C1.4(ic').p=0", p, 0.0) and c.eq("C1.4(ic').q=0", q, 0.0) \
                and c.gt("C1.4(ic')", b / a, k2 / (1.0 - th2)):
            out.append("(ic')")
        return out

    def critical_eta_rhs() -> float:
        # only meaningful when q > kappa1
        return e2 ** ((q - k1) / denom) * (b * (q - k1) / (k1 + 1.0 - th2)) ** (
            (1.0 + k1 - th2) / denom)

    fired = []
    primes = sub_primes()
    if c.gt("C1.4(i).theta1>1", th1, 1.0) and c.gt("C1.4(i).q>kappa1", q, k1) \
            and c.eq("C1.4(i).crit", th1 - 1.0, cross_threshold) \
            and c.lt("C1.4(i).eta", (th1 - 1.0) * e1 / denom, critical_eta_rhs()) \
            and primes:
        fired.append("C1.4(i)" + "+".join([""] + primes))
    if c.eq("C1.4(ii).theta1=1", th1, 1.0) and c.eq("C1.4(ii).q=kappa1", q, k1) \
            and c.gt("C1.4(ii)", b / e1, k2 / (k1 + 1.0 - th2)) and primes:
        fired.append("C1.4(ii)" + "+".join([""] + primes))
    if c.gt("C1.4(iii)", th1 - 1.0, cross_threshold) and "(ib')" in primes:
        fired.append("C1.4(iii)+(ib')")
    if fired:
        return RegimeVerdict("ConjecturedSureExtinctionY", tuple(fired), log)

    fired = []
    if th1_ge1 and c.gt("C1.5(i).p>0", p, 0.0) and c.gt("C1.5(i).q>0", q, 0.0) \
            and c.eq("C1.5(i).p=", p, pq_threshold):
        lhs = a * p / (q * denom)
        rhs = (b / (1.0 - th2)) ** ((1.0 - th2) / denom) * (e2 / q) ** (q / denom)
        if c.gt("C1.5(i)", lhs, rhs):
            fired.append("C1.5(i)")
    if th1_ge1 and c.gt("C1.5(ii).theta1>1", th1, 1.0) and c.gt("C1.5(ii).q>kappa1", q, k1) \
            and c.eq("C1.5(ii).crit", th1 - 1.0, cross_threshold) \
            and c.gt("C1.5(ii)", (th1 - 1.0) * e1 / denom, critical_eta_rhs()):
        fired.append("C1.5(ii)")
    if fired:
        return RegimeVerdict("ConjecturedPartialExtinctionY", tuple(fired), log)

    return RegimeVerdict("Unsettled", (), log)
