"""Similarity exponents and scaling constants for the Marangoni boundary layer."""
from __future__ import annotations

import numpy as np
from dataclasses import dataclass, field
from fractions import Fraction

from .exppoly import as_fraction


class DomainError(ValueError):
    pass


class DegenerateForcingError(ZeroDivisionError):
    pass


def derive_exponents(k) -> tuple[Fraction, Fraction, Fraction]:
    """Return ``(a, b, t) = ((2k+1)/3, (k+2)/3, -1-k)`` exactly."""
    k = as_fraction(k)
    if k < -1:
        raise DomainError(f"power-law exponent k={k} is below the minimum -1")
    return (2 * k + 1) / 3, (k + 2) / 3, -1 - k


@dataclass(frozen=True)
class SimilarityParams:
    """Coefficients of the reduced momentum and temperature equations.

    ``Pr`` is taken as given; the kinematic relation ``Pr = nu/kappa`` is
    not enforced here.
    """

    k: Fraction
    Pr: Fraction = Fraction(1)
    m: Fraction = Fraction(1)
    a: Fraction = field(init=False)
    b: Fraction = field(init=False)
    t: Fraction = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "k", as_fraction(self.k))
        object.__setattr__(self, "Pr", as_fraction(self.Pr))
        object.__setattr__(self, "m", as_fraction(self.m))
        if self.Pr <= 0:
            raise DomainError(f"Prandtl number must be positive, got {self.Pr}")
        a, b, t = derive_exponents(self.k)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "t", t)

    @classmethod
    def from_values(cls, k, Pr=1, m=1) -> SimilarityParams:
        """Build from user-facing numbers; floats are read by decimal repr."""
        conv = lambda v: as_fraction(repr(v)) if isinstance(v, float) else as_fraction(v)
        return cls(conv(k), conv(Pr), conv(m))


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensional inputs of the similarity transform.

    Attributes
    ----------
    dsigma_dT : surface-tension temperature coefficient
    m : surface-temperature gradient coefficient, ``T(x,0) - T(0,0) = m x^(k+1)``
    rho : density
    mu : dynamic viscosity
    """

    dsigma_dT: float
    m: float
    rho: float
    mu: float

    def __post_init__(self):
        if not self.rho > 0:
            raise DomainError(f"density must be positive, got {self.rho}")
        if not self.mu > 0:
            raise DomainError(f"viscosity must be positive, got {self.mu}")


def scaling_constants(p: PhysicalParams) -> tuple[float, float]:
    """Return ``(C1, C2)`` with real (sign-preserving) cube roots."""
    forcing = p.dsigma_dT * p.m
    c1 = float(np.cbrt(forcing * p.rho / p.mu**2))
    if forcing == 0:
        raise DegenerateForcingError(
            "dsigma/dT * m = 0: C2 = cbrt(rho^2 / (dsigma/dT * m * mu)) is undefined"
        )
    c2 = float(np.cbrt(p.rho**2 / (forcing * p.mu)))
    return c1, c2
