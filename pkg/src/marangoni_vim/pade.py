"""
Exact [L/M] Padé approximants and the far-field closure of the free constant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .exppoly import as_fraction


class DegeneratePadeError(ArithmeticError):
    pass


class NoClosureRootError(RuntimeError):
    pass


class SpuriousPoleError(RuntimeError):
    pass


@dataclass(frozen=True)
class PadeApproximant:
    """``(p_0 + ... + p_L x^L) / (1 + q_1 x + ... + q_M x^M)``."""

    p: tuple
    q: tuple

    @property
    def L(self) -> int:
        return len(self.p) - 1

    @property
    def M(self) -> int:
        return len(self.q) - 1

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        num = np.polynomial.polynomial.polyval(x, [float(c) for c in self.p])
        den = np.polynomial.polynomial.polyval(x, [float(c) for c in self.q])
        return num / den

    def series(self, n: int) -> list[Fraction]:
        """Maclaurin coefficients of p/q through order ``n``."""
        out = []
        for i in range(n + 1):
            acc = self.p[i] if i < len(self.p) else Fraction(0)
            for j in range(1, min(i, self.M) + 1):
                acc -= self.q[j] * out[i - j]
            out.append(acc)
        return out

    def to_dict(self) -> dict:
        frac = lambda c: f"{c.numerator}/{c.denominator}"
        return {
            "L": self.L,
            "M": self.M,
            "numerator": [frac(c) for c in self.p],
            "denominator": [frac(c) for c in self.q],
            "numerator_float": [float(c) for c in self.p],
            "denominator_float": [float(c) for c in self.q],
        }


def _solve_exact(A, rhs):
    """Gauss-Jordan elimination over Fractions.  Returns None if singular."""
    n = len(A)
    M = [list(row) + [r] for row, r in zip(A, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        pv = M[col][col]
        M[col] = [v / pv for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return [row[-1] for row in M]


def pade_from_taylor(c: Sequence, L: int, M: int) -> PadeApproximant:
    """Build the [L/M] approximant of the series ``c`` exactly.

    The denominator solves ``sum_j q_j c_{L+i-j} = 0`` for i = 1..M with
    ``q_0 = 1``; the numerator is the truncated convolution ``q * c``.
    A series whose tail ``c_{L+1}..c_{L+M}`` vanishes gets the trivial
    denominator ``[1]``.
    """
    if L < 0 or M < 0:
        raise ValueError("orders must be nonnegative")
    if len(c) < L + M + 1:
        raise ValueError(f"[{L}/{M}] needs {L + M + 1} coefficients, got {len(c)}")
    c = [as_fraction(x) for x in c[: L + M + 1]]
    cc = lambda i: c[i] if i >= 0 else Fraction(0)

    if M == 0 or all(x == 0 for x in c[L + 1 :]):
        q = [Fraction(1)]
    else:
        A = [[cc(L + i - j) for j in range(1, M + 1)] for i in range(1, M + 1)]
        rhs = [-cc(L + i) for i in range(1, M + 1)]
        sol = _solve_exact(A, rhs)
        if sol is None:
            raise DegeneratePadeError(f"singular Toeplitz system for [{L}/{M}]")
        q = [Fraction(1)] + sol
    p = [sum((q[j] * c[i - j] for j in range(min(i, len(q) - 1) + 1)), Fraction(0)) for i in range(L + 1)]
    return PadeApproximant(tuple(p), tuple(q))


def farfield_limit(P: PadeApproximant) -> float:
    """Limit of ``P(x)`` as ``x -> +inf``."""
    p = [i for i, c in enumerate(P.p) if c != 0]
    q = [i for i, c in enumerate(P.q) if c != 0]
    if not p and not q:
        raise ValueError("invalid approximant: numerator and denominator vanish")
    if not p:
        return 0.0
    if not q:
        raise ValueError("invalid approximant: zero denominator")
    dp, dq = p[-1], q[-1]
    if dp < dq:
        return 0.0
    ratio = P.p[dp] / P.q[dq]
    if dp == dq:
        return float(ratio)
    return math.copysign(math.inf, ratio)


def _leading_q(P: PadeApproximant, L: int):
    return P.q[L] if len(P.q) > L else None


def closure_function(make_series: Callable, L: int) -> Callable:
    """``B -> [L/L] approximant`` of the series returned by ``make_series``."""

    def build(B):
        return pade_from_taylor(make_series(B), L, L)

    return build


def _bisect(f, lo, hi, flo, tol):
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if not math.isnan(fm) and (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _snap(value, f_exact, max_den=1000):
    """Replace a float root by a small rational if it is an exact zero."""
    cand = Fraction(value).limit_denominator(max_den)
    if abs(cand - Fraction(value)) < 1e-9 and f_exact(cand) == 0:
        return cand
    return Fraction(value)


def closure_roots(
    make_series: Callable,
    L: int,
    bracket=(0.0, 3.0),
    step: float = 0.05,
    tol: float = 1e-12,
    pole_tol: float = 1e-9,
) -> list[Fraction]:
    """All B in ``bracket`` where the [L/L] approximant vanishes at infinity.

    The root function is the leading numerator coefficient ``p_L(B)``.
    The bracket is scanned at ``step`` for sign changes, each refined by
    bisection.  Sign changes where ``p_L`` blows up (a singular Toeplitz
    solve rather than a zero) are discarded.  If ``p_L`` vanishes
    identically the series is a low-degree polynomial and the far-field
    limit itself is used as the root function.
    """
    lo, hi = map(float, bracket)
    if not hi > lo:
        raise ValueError(f"empty bracket {bracket}")
    build = closure_function(make_series, L)

    def exact_pL(B):
        return build(B).p[L]

    def pL(B):
        try:
            return float(exact_pL(B))
        except DegeneratePadeError:
            return math.nan

    def limit(B):
        try:
            v = farfield_limit(build(B))
        except (DegeneratePadeError, ValueError):
            return math.nan
        return v if math.isfinite(v) else math.nan

    nodes = np.linspace(lo, hi, max(2, int(round((hi - lo) / step)) + 1))
    phi, vals = pL, [pL(B) for B in nodes]
    exact = exact_pL
    if all(v == 0 for v in vals):
        phi, vals = limit, [limit(B) for B in nodes]
        exact = lambda B: Fraction(0) if limit(B) == 0 else Fraction(1)

    roots = []
    for i, (fa, fb) in enumerate(zip(vals[:-1], vals[1:])):
        a, b = float(nodes[i]), float(nodes[i + 1])
        if fa == 0:
            roots.append(Fraction(a))
            continue
        if math.isnan(fa) or math.isnan(fb) or (fa < 0) == (fb < 0) or fb == 0:
            continue
        r = _bisect(phi, a, b, fa, tol)
        fr = phi(r)
        # a genuine zero shrinks below its neighbours; a pole crossing grows
        if math.isnan(fr) or abs(fr) > max(abs(fa), abs(fb)):
            continue
        roots.append(_snap(r, exact))
    if vals[-1] == 0:
        roots.append(Fraction(float(nodes[-1])))
    if not roots:
        raise NoClosureRootError(
            f"no closure root of p_{L}(B) on [{lo}, {hi}]: "
            f"phi({lo}) = {vals[0]:.6g}, phi({hi}) = {vals[-1]:.6g}"
        )

    def pole_free(B):
        qL = _leading_q(build(B), L)
        return qL is None or abs(float(qL)) >= pole_tol

    good = [r for r in roots if pole_free(r)]
    if not good:
        raise SpuriousPoleError(f"q_{L} vanishes at every closure root {[float(r) for r in roots]}")
    return good


def solve_free_parameter(
    make_series: Callable,
    L: int,
    bracket=(0.0, 3.0),
    step: float = 0.05,
    prefer: Callable | None = None,
) -> Fraction:
    """Free constant B* that sends the [L/L] approximant to 0 at infinity.

    With several roots, ``prefer`` (a score, lower is better) picks one;
    otherwise the first root in the bracket is returned.
    """
    roots = closure_roots(make_series, L, bracket, step)
    if prefer is None or len(roots) == 1:
        return roots[0]
    return min(roots, key=prefer)
