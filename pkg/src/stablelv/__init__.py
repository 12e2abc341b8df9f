"""Simulation and numerical-verification lab for a two-type stochastic
Lotka-Volterra system driven by Brownian motions and spectrally positive
alpha-stable jumps."""

from .model import (
    ConstraintViolation,
    DerivedExponents,
    ModelParams,
    RegimeVerdict,
    classify,
    derived_exponents,
    validate,
)
from .stable_measure import StableMeasure, lemma32_integral, lemma32_quadrature

__version__ = "0.1.0"
