"""
Variational iteration for the similarity equations.

Momentum:     F''' = a F'^2 - b F F''
Temperature:  g''  = Pr (-b F g' - t F' g)

Each correction step adds ``int_0^eta lambda(tau, eta) R(u_n)(tau) dtau``
to the current iterate, where ``R`` is the residual and ``lambda`` the
polynomial Lagrange multiplier.  Everything stays inside :class:`ExpPoly`.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .exppoly import ExpPoly, as_fraction, integrate_kernel
from .params import SimilarityParams

MOMENTUM = "momentum"
TEMPERATURE = "temperature"


def momentum_residual(F: ExpPoly, params: SimilarityParams) -> ExpPoly:
    """``F''' - a F'^2 + b F F''``."""
    d1 = F.derivative()
    d2 = d1.derivative()
    d3 = d2.derivative()
    return d3 - (d1 * d1).scale(params.a) + (F * d2).scale(params.b)


def temperature_residual(g: ExpPoly, F: ExpPoly, params: SimilarityParams) -> ExpPoly:
    """``g'' + Pr b F g' + Pr t F' g`` (linear in g)."""
    g1 = g.derivative()
    return (
        g1.derivative()
        + (F * g1).scale(params.Pr * params.b)
        + (F.derivative() * g).scale(params.Pr * params.t)
    )


@dataclass(frozen=True)
class CorrectionFunctional:
    """Lagrange multiplier ``s * (tau - eta)**p`` bound to one residual."""

    p: int
    s: Fraction
    kind: str
    params: SimilarityParams
    # momentum field the temperature residual is coupled to
    velocity: ExpPoly | None = None

    @classmethod
    def momentum(cls, params: SimilarityParams) -> CorrectionFunctional:
        return cls(2, Fraction(-1, 2), MOMENTUM, params)

    @classmethod
    def temperature(cls, params: SimilarityParams, F: ExpPoly) -> CorrectionFunctional:
        return cls(1, Fraction(1), TEMPERATURE, params, F)

    def residual(self, u: ExpPoly) -> ExpPoly:
        if self.kind == MOMENTUM:
            return momentum_residual(u, self.params)
        if self.kind == TEMPERATURE:
            if self.velocity is None:
                raise ValueError("temperature functional needs a velocity field F")
            return temperature_residual(u, self.velocity, self.params)
        raise ValueError(f"unknown residual kind {self.kind!r}")


@dataclass(frozen=True)
class VimState:
    iterate: ExpPoly
    n: int = 0
    fixed: tuple = ()
    free: Fraction = Fraction(0)

    def with_free(self, B) -> VimState:
        return replace(self, free=as_fraction(B))


def correction_step(state: VimState, cf: CorrectionFunctional) -> VimState:
    r = cf.residual(state.iterate)
    nxt = state.iterate + integrate_kernel(r, cf.p, cf.s)
    return replace(state, iterate=nxt, n=state.n + 1)


def iterate(state: VimState, cf: CorrectionFunctional, n: int = 1) -> VimState:
    if n < 1:
        raise ValueError(f"iteration count must be >= 1, got {n}")
    for _ in range(n):
        state = correction_step(state, cf)
    return state


def momentum_initial(A, B, C) -> ExpPoly:
    """``A + B*eta + C*exp(-eta)``."""
    return ExpPoly({0: [A, B], 1: [C]})


def apply_momentum_bcs(k) -> tuple[Fraction, Fraction]:
    """``(A, C)`` from F(0) = 0 and F''(0) = -(k+1); B stays free.

    The p=2 kernel leaves F, F', F'' at 0 untouched, so conditions imposed
    on the initial guess hold for every iterate.
    """
    k = as_fraction(k)
    return k + 1, -(k + 1)


def temperature_initial(B, C) -> ExpPoly:
    """``B*eta + C*exp(-eta)``."""
    return ExpPoly({0: [0, B], 1: [C]})


def apply_temperature_bcs() -> Fraction:
    """C from g(0) = 1."""
    return Fraction(1)


def theta_from_g(g: ExpPoly, m) -> ExpPoly:
    return g.scale(m)


def momentum_state(params: SimilarityParams, B) -> VimState:
    A, C = apply_momentum_bcs(params.k)
    B = as_fraction(B)
    return VimState(momentum_initial(A, B, C), 0, (A, C), B)


def temperature_state(B) -> VimState:
    C = apply_temperature_bcs()
    B = as_fraction(B)
    return VimState(temperature_initial(B, C), 0, (C,), B)


def momentum_solution(params: SimilarityParams, B, n: int = 1) -> ExpPoly:
    """Closed-form F_n for a given value of the free slope constant B."""
    return iterate(momentum_state(params, B), CorrectionFunctional.momentum(params), n).iterate


def temperature_solution(params: SimilarityParams, F: ExpPoly, B, n: int = 1) -> ExpPoly:
    """Closed-form g_n for free constant B, coupled to velocity field F."""
    cf = CorrectionFunctional.temperature(params, F)
    return iterate(temperature_state(B), cf, n).iterate
