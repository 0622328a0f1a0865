"""
Exact arithmetic on exp-polynomials.

An :class:`ExpPoly` is a finite sum ``sum_k P_k(eta) * exp(-k*eta)`` where
each ``k`` is a nonnegative integer and each ``P_k`` is a polynomial with
:class:`fractions.Fraction` coefficients.  The set is closed under addition,
multiplication, differentiation and integration against polynomial kernels,
which is all the variational iteration needs.
"""
from __future__ import annotations

import logging
import math
from fractions import Fraction
from numbers import Rational

import numpy as np

logger = logging.getLogger(__name__)

TERM_WARNING_THRESHOLD = 10_000


def as_fraction(value) -> Fraction:
    """Convert ``value`` to an exact Fraction.

    Floats are taken at their exact binary value; strings go through
    ``Fraction(str)`` so ``"0.1"`` means one tenth.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            raise ValueError(f"cannot represent {value!r} exactly")
        return Fraction(float(value))
    if isinstance(value, (np.integer,)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot convert {type(value).__name__} to Fraction")


def _trim(coeffs):
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


def _poly_add(p, q):
    if len(p) < len(q):
        p, q = q, p
    out = list(p)
    for i, c in enumerate(q):
        out[i] += c
    return out


def _poly_mul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


class ExpPoly:
    """Immutable element of the ring spanned by ``eta**j * exp(-k*eta)``.

    ``terms`` maps decay index ``k`` to ascending coefficients of ``P_k``.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms=None):
        canon = {}
        for k, coeffs in (terms or {}).items():
            if isinstance(k, bool) or not isinstance(k, (int, np.integer)):
                if isinstance(k, (float, Fraction)) and k == int(k):
                    k = int(k)
                else:
                    raise ValueError(f"decay index must be a nonnegative integer, got {k!r}")
            k = int(k)
            if k < 0:
                raise ValueError(f"decay index must be nonnegative, got {k}")
            poly = _trim(as_fraction(c) for c in coeffs)
            if poly:
                if k in canon:
                    poly = _trim(_poly_add(canon[k], poly))
                    if not poly:
                        del canon[k]
                        continue
                canon[k] = poly
        self._terms = dict(sorted(canon.items()))
        self._hash = None
        n = self.term_count
        if n > TERM_WARNING_THRESHOLD:
            logger.warning("ExpPoly has %d terms (threshold %d)", n, TERM_WARNING_THRESHOLD)

    # -- constructors -------------------------------------------------
    @classmethod
    def constant(cls, c) -> ExpPoly:
        return cls({0: [c]})

    @classmethod
    def monomial(cls, coeff=1, power: int = 0, decay: int = 0) -> ExpPoly:
        """``coeff * eta**power * exp(-decay*eta)``."""
        return cls({decay: [0] * power + [coeff]})

    @classmethod
    def zero(cls) -> ExpPoly:
        return cls()

    # -- structure ----------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    @property
    def term_count(self) -> int:
        """Number of nonzero ``eta**j exp(-k eta)`` monomials."""
        return sum(1 for p in self._terms.values() for c in p if c != 0)

    def is_zero(self) -> bool:
        return not self._terms

    def coefficient(self, power: int, decay: int = 0) -> Fraction:
        poly = self._terms.get(decay, ())
        return poly[power] if power < len(poly) else Fraction(0)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = ExpPoly.constant(other)
        if not isinstance(other, ExpPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(self._terms.items()))
        return self._hash

    def __repr__(self):
        if not self._terms:
            return "ExpPoly(0)"
        parts = []
        for k, poly in self._terms.items():
            for j, c in enumerate(poly):
                if c == 0:
                    continue
                s = str(c)
                if j:
                    s += "*eta" + (f"**{j}" if j > 1 else "")
                if k:
                    s += "*exp(-eta)" if k == 1 else f"*exp(-{k}*eta)"
                parts.append(s)
        return "ExpPoly(" + " + ".join(parts) + ")"

    # -- ring operations ----------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return add(self, other.scale(-1))

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return add(other, self.scale(-1))

    def __mul__(self, other):
        if isinstance(other, ExpPoly):
            return mul(self, other)
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = ExpPoly.constant(1)
        base = self
        while n:
            if n & 1:
                out = mul(out, base)
            base = mul(base, base)
            n >>= 1
        return out

    def scale(self, s) -> ExpPoly:
        s = as_fraction(s)
        if s == 0:
            return ExpPoly()
        return ExpPoly({k: [s * c for c in p] for k, p in self._terms.items()})

    def derivative(self, order: int = 1) -> ExpPoly:
        f = self
        for _ in range(order):
            f = differentiate(f)
        return f

    def __call__(self, eta):
        return evaluate(self, eta)

    # -- serialization ------------------------------------------------
    def to_records(self) -> list[dict]:
        """Records ``{"decay_index", "coefficients"}`` with ``"p/q"`` strings."""
        return [
            {
                "decay_index": k,
                "coefficients": [f"{c.numerator}/{c.denominator}" for c in p],
            }
            for k, p in self._terms.items()
        ]

    @classmethod
    def from_records(cls, records) -> ExpPoly:
        return cls({int(r["decay_index"]): [Fraction(c) for c in r["coefficients"]] for r in records})


def _coerce(x):
    if isinstance(x, ExpPoly):
        return x
    try:
        return ExpPoly.constant(as_fraction(x))
    except TypeError:
        return NotImplemented


def add(f: ExpPoly, g: ExpPoly) -> ExpPoly:
    terms = {k: list(p) for k, p in f._terms.items()}
    for k, p in g._terms.items():
        terms[k] = _poly_add(terms[k], p) if k in terms else list(p)
    return ExpPoly(terms)


def mul(f: ExpPoly, g: ExpPoly) -> ExpPoly:
    terms = {}
    for k1, p1 in f._terms.items():
        for k2, p2 in g._terms.items():
            prod = _poly_mul(p1, p2)
            k = k1 + k2
            terms[k] = _poly_add(terms[k], prod) if k in terms else prod
    return ExpPoly(terms)


def differentiate(f: ExpPoly) -> ExpPoly:
    # d/deta [eta^m e^{-k eta}] = (m eta^{m-1} - k eta^m) e^{-k eta}
    terms = {}
    for k, p in f._terms.items():
        out = [Fraction(0)] * len(p)
        for m, c in enumerate(p):
            if m:
                out[m - 1] += m * c
            if k:
                out[m] -= k * c
        terms[k] = out
    return ExpPoly(terms)


def _antiderivative_at(j: int, k: int):
    """Closed form of ``int_0^eta tau^j e^{-k tau} dtau`` as (terms, constant).

    For ``k == 0`` it is ``eta^{j+1}/(j+1)``.  For ``k > 0`` it is
    ``j!/k^{j+1} - e^{-k eta} * sum_{i<=j} j!/(i! k^{j-i+1}) eta^i``.
    """
    if k == 0:
        return {0: [Fraction(0)] * (j + 1) + [Fraction(1, j + 1)]}
    fj = math.factorial(j)
    poly = [-Fraction(fj, math.factorial(i) * k ** (j - i + 1)) for i in range(j + 1)]
    return {0: [Fraction(fj, k ** (j + 1))], k: poly}


def integrate_kernel(f: ExpPoly, p: int, s=1) -> ExpPoly:
    """Return ``eta -> int_0^eta s*(tau - eta)**p * f(tau) dtau`` exactly.

    ``(tau - eta)**p`` is expanded binomially, each ``tau**j e^{-k tau}``
    piece is integrated in closed form and multiplied back by the
    matching power of ``eta``.
    """
    if p < 0:
        raise ValueError("kernel exponent must be nonnegative")
    s = as_fraction(s)
    result = {}

    def acc(k, poly):
        result[k] = _poly_add(result[k], poly) if k in result else list(poly)

    for r in range(p + 1):
        # (tau - eta)^p = sum_r C(p, r) tau^r (-eta)^{p-r}
        w = s * math.comb(p, r) * (-1) ** (p - r)
        shift = p - r
        for k, poly in f._terms.items():
            for j, c in enumerate(poly):
                if c == 0:
                    continue
                for kk, q in _antiderivative_at(j + r, k).items():
                    acc(kk, [Fraction(0)] * shift + [w * c * x for x in q])
    return ExpPoly(result)


def evaluate(f: ExpPoly, eta):
    """Evaluate at a float or numpy array of points."""
    x = np.asarray(eta, dtype=float)
    out = np.zeros_like(x)
    for k, p in f._terms.items():
        acc = np.zeros_like(x)
        for c in reversed(p):
            acc = acc * x + float(c)
        out = out + (acc * np.exp(-k * x) if k else acc)
    # the origin is where the boundary conditions live; keep it exact
    at_zero = x == 0
    if np.any(at_zero):
        out = np.where(at_zero, float(sum(p[0] for p in f._terms.values())), out)
    return float(out) if out.ndim == 0 else out


def taylor(f: ExpPoly, n: int) -> list[Fraction]:
    """Exact Maclaurin coefficients ``c_0..c_n``."""
    coeffs = [Fraction(0)] * (n + 1)
    for k, p in f._terms.items():
        # e^{-k eta} = sum_i (-k)^i / i! eta^i
        exp_series = [Fraction((-k) ** i, math.factorial(i)) for i in range(n + 1)]
        for j, c in enumerate(p):
            if j > n or c == 0:
                continue
            for i in range(n + 1 - j):
                coeffs[i + j] += c * exp_series[i]
    return coeffs
