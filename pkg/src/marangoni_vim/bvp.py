"""
Runge-Kutta shooting oracle for the similarity boundary-value problems.

The far-field conditions ``F'(inf) = 0`` and ``g'(inf) = 0`` are imposed at
``eta_max``.  The shooting loops run on a compiled RK4 kernel specialised
to the two similarity systems; :func:`rk4_integrate` is the generic version
for arbitrary vector fields.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numba import njit

from .params import SimilarityParams

ETA_MAX = 10.0
STEP = 1e-3
RESIDUAL_TOL = 1e-8
BRACKET_TOL = 1e-10


class BlowupError(FloatingPointError):
    pass


class ShootingError(RuntimeError):
    pass


@dataclass
class NumericSolution:
    """Grid samples of an integrated state.

    ``states`` has one row per grid node: ``(F, F', F'')`` for momentum,
    ``(F, F', F'', g, g')`` for the coupled temperature problem.
    """

    grid: np.ndarray
    states: np.ndarray
    shooting_parameter: float = float("nan")
    terminal_residual: float = float("nan")

    @property
    def h(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def column(self, i: int) -> np.ndarray:
        return self.states[:, i]

    def interp(self, i: int, eta) -> np.ndarray:
        """Cubic Hermite interpolation of component ``i`` using its derivative ``i+1``."""
        x = np.asarray(eta, dtype=float)
        y, dy = self.states[:, i], self.states[:, i + 1]
        h = self.h
        j = np.clip(np.floor(x / h).astype(int), 0, len(self.grid) - 2)
        s = (x - self.grid[j]) / h
        h00 = 2 * s**3 - 3 * s**2 + 1
        h10 = s**3 - 2 * s**2 + s
        h01 = -2 * s**3 + 3 * s**2
        h11 = s**3 - s**2
        return h00 * y[j] + h10 * h * dy[j] + h01 * y[j + 1] + h11 * h * dy[j + 1]


def _nsteps(h, eta_max):
    if not h > 0:
        raise ValueError(f"step must be positive, got {h}")
    if not eta_max >= h:
        raise ValueError(f"eta_max={eta_max} must be at least one step h={h}")
    return int(round(eta_max / h))


def _rk4_step(f, x, y, h):
    k1 = f(x, y)
    k2 = f(x + h / 2, y + h / 2 * k1)
    k3 = f(x + h / 2, y + h / 2 * k2)
    k4 = f(x + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def rk4_integrate(f: Callable, y0, h: float = STEP, eta_max: float = ETA_MAX) -> NumericSolution:
    """Classical fourth-order Runge-Kutta on a uniform grid.

    ``f(eta, y)`` returns ``dy/deta`` as an array shaped like ``y``.
    """
    n = _nsteps(h, eta_max)
    y = np.array(y0, dtype=float)
    grid = np.arange(n + 1) * h
    states = np.empty((n + 1,) + y.shape)
    states[0] = y
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(n):
            y = _rk4_step(f, grid[i], y, h)
            if not np.all(np.isfinite(y)):
                raise BlowupError(f"non-finite state at node {i + 1} (eta = {grid[i + 1]:.6g})")
            states[i + 1] = y
    return NumericSolution(grid, states)


@njit(cache=True)
def _momentum_f(a, b, y, out):
    out[0] = y[1]
    out[1] = y[2]
    out[2] = a * y[1] * y[1] - b * y[0] * y[2]


@njit(cache=True)
def _coupled_f(a, b, t, pr, y, out):
    out[0] = y[1]
    out[1] = y[2]
    out[2] = a * y[1] * y[1] - b * y[0] * y[2]
    out[3] = y[4]
    out[4] = pr * (-b * y[0] * y[4] - t * y[1] * y[3])


@njit(cache=True)
def _rk4_kernel(coupled, coef, y0, h, n, keep):
    """Step every column of ``y0`` ``n`` times; keep the path of column 0 if asked."""
    dim, m = y0.shape
    final = np.empty((dim, m))
    path = np.empty((n + 1 if keep else 1, dim))
    y = np.empty(dim)
    tmp = np.empty(dim)
    k1 = np.empty(dim)
    k2 = np.empty(dim)
    k3 = np.empty(dim)
    k4 = np.empty(dim)
    a, b, t, pr = coef[0], coef[1], coef[2], coef[3]
    for col in range(m):
        for d in range(dim):
            y[d] = y0[d, col]
        if keep and col == 0:
            path[0, :] = y
        for i in range(n):
            for stage in range(4):
                if stage == 0:
                    src = y
                else:
                    w = h if stage == 3 else 0.5 * h
                    kp = k1 if stage == 1 else (k2 if stage == 2 else k3)
                    for d in range(dim):
                        tmp[d] = y[d] + w * kp[d]
                    src = tmp
                kk = k1 if stage == 0 else (k2 if stage == 1 else (k3 if stage == 2 else k4))
                if coupled:
                    _coupled_f(a, b, t, pr, src, kk)
                else:
                    _momentum_f(a, b, src, kk)
            for d in range(dim):
                y[d] = y[d] + h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d])
            if keep and col == 0:
                path[i + 1, :] = y
        for d in range(dim):
            final[d, col] = y[d]
    return final, path


def _coefficients(params):
    return np.array([float(params.a), float(params.b), float(params.t), float(params.Pr)])


def _terminal_batch(coupled, params, y0, h, eta_max):
    """Final state of every shot in a ``(dim, nshots)`` batch; non-finite marks blowup."""
    y0 = np.ascontiguousarray(y0, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        final, _ = _rk4_kernel(coupled, _coefficients(params), y0, h, _nsteps(h, eta_max), False)
    return final


def _trajectory(coupled, params, y0, h, eta_max, parameter, component):
    n = _nsteps(h, eta_max)
    y0 = np.ascontiguousarray(np.asarray(y0, dtype=float).reshape(-1, 1))
    _, path = _rk4_kernel(coupled, _coefficients(params), y0, h, n, True)
    bad = np.nonzero(~np.all(np.isfinite(path), axis=1))[0]
    if len(bad):
        raise BlowupError(
            f"non-finite state at node {bad[0]} (eta = {bad[0] * h:.6g}); try a smaller eta_max"
        )
    return NumericSolution(np.arange(n + 1) * h, path, parameter, float(path[-1, component]))


def momentum_rhs(params: SimilarityParams):
    """Numpy vector field of the momentum system, for :func:`rk4_integrate`."""
    a, b = float(params.a), float(params.b)

    def f(eta, y):
        F, dF, ddF = y[0], y[1], y[2]
        return np.array([dF, ddF, a * dF**2 - b * F * ddF])

    return f


def coupled_rhs(params: SimilarityParams):
    a, b, t, Pr = float(params.a), float(params.b), float(params.t), float(params.Pr)

    def f(eta, y):
        F, dF, ddF, g, dg = y
        return np.array([dF, ddF, a * dF**2 - b * F * ddF, dg, Pr * (-b * F * dg - t * dF * g)])

    return f


def _bisect(residual, a, b, ra):
    while b - a > BRACKET_TOL:
        mid = 0.5 * (a + b)
        rm = residual(mid)
        if rm == 0:
            return mid, mid
        if np.isfinite(rm) and np.sign(rm) == np.sign(ra):
            a, ra = mid, rm
        else:
            b = mid
    return a, b


def _secant(residual, a, b, steps=2):
    if a == b:
        return a
    ra, rb = residual(a), residual(b)
    best, rbest = (a, ra) if abs(ra) <= abs(rb) else (b, rb)
    for _ in range(steps):
        if rb == ra:
            break
        c = b - rb * (b - a) / (rb - ra)
        a, ra, b, rb = b, rb, c, residual(c)
        if np.isfinite(rb) and abs(rb) < abs(rbest):
            best, rbest = b, rb
    return best


def _find_roots(residual, bracket, nscan):
    """Every sign change of ``residual`` on a uniform scan of ``bracket``.

    ``residual`` maps an array of shooting parameters to terminal
    residuals.  Each sign change is bisected to BRACKET_TOL and polished
    by two secant steps.
    """
    lo, hi = map(float, bracket)
    if not hi > lo:
        raise ValueError(f"empty bracket {bracket}")
    s = np.linspace(lo, hi, nscan)
    r = residual(s)
    scalar = lambda x: float(residual(np.array([x]))[0])
    roots = []
    for i in range(nscan - 1):
        if r[i] == 0:
            roots.append(float(s[i]))
            continue
        if not (np.isfinite(r[i]) and np.isfinite(r[i + 1])) or np.sign(r[i]) == np.sign(r[i + 1]):
            continue
        a, b = _bisect(scalar, float(s[i]), float(s[i + 1]), r[i])
        roots.append(_secant(scalar, a, b))
    if r[-1] == 0:
        roots.append(float(s[-1]))
    if not roots:
        raise ShootingError(
            f"shooting bracket [{lo}, {hi}] has no sign change: "
            f"r({lo}) = {r[0]:.6g}, r({hi}) = {r[-1]:.6g}"
        )
    return roots


def _oscillations(v, floor=1e-6):
    v = v[np.abs(v) > floor]
    return int(np.count_nonzero(np.diff(np.sign(v))))


def shoot_momentum(
    params: SimilarityParams,
    eta_max: float = ETA_MAX,
    h: float = STEP,
    bracket=(0.0, 3.0),
    nscan: int = 301,
) -> NumericSolution:
    """Fit ``s = F'(0)`` so that ``F'(eta_max) = 0``.

    Wrong shots either overshoot (F' stays positive and grows) or dip
    negative and recover, so the residual can change sign several times
    in a bracket.  The returned root is the one whose F' profile does not
    change sign, i.e. the monotone boundary-layer decay.
    """
    c = -float(params.k + 1)

    def y0(s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return np.array([np.zeros_like(s), s, np.full_like(s, c)])

    def residual(s):
        return _terminal_batch(False, params, y0(s), h, eta_max)[1]

    candidates = []
    for s in _find_roots(residual, bracket, nscan):
        try:
            candidates.append(_trajectory(False, params, y0(s)[:, 0], h, eta_max, s, 1))
        except BlowupError:
            continue
    if not candidates:
        raise ShootingError(f"every momentum shot on {bracket} blew up")
    best = min(candidates, key=lambda sol: (_oscillations(sol.states[:-1, 1]), -sol.shooting_parameter))
    if abs(best.terminal_residual) > RESIDUAL_TOL:
        raise ShootingError(
            f"momentum shot s={best.shooting_parameter:.12g} left F'(eta_max) = {best.terminal_residual:.3g}"
        )
    return best


def shoot_temperature(
    params: SimilarityParams,
    momentum: NumericSolution,
    eta_max: float | None = None,
    h: float | None = None,
    bracket=(-10.0, 10.0),
    nscan: int = 41,
) -> NumericSolution:
    """Fit ``sigma = g'(0)`` so that ``g'(eta_max) = 0``.

    The five-component system ``(F, F', F'', g, g')`` is integrated jointly
    from the fitted ``F'(0)`` of ``momentum``; no stored F grid is
    interpolated.
    """
    h = momentum.h if h is None else h
    eta_max = float(momentum.grid[-1]) if eta_max is None else eta_max
    s_mom = momentum.shooting_parameter
    c = -float(params.k + 1)

    def y0(sig):
        sig = np.atleast_1d(np.asarray(sig, dtype=float))
        one = np.ones_like(sig)
        return np.array([0 * one, s_mom * one, c * one, one, sig])

    def residual(sig):
        return _terminal_batch(True, params, y0(sig), h, eta_max)[4]

    sols = [_trajectory(True, params, y0(sig)[:, 0], h, eta_max, sig, 4) for sig in _find_roots(residual, bracket, nscan)]
    best = min(sols, key=lambda sol: abs(sol.terminal_residual))
    if abs(best.terminal_residual) > RESIDUAL_TOL:
        raise ShootingError(
            f"temperature shot sigma={best.shooting_parameter:.12g} left g'(eta_max) = {best.terminal_residual:.3g}"
        )
    return best
