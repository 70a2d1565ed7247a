"""Hastings-McLeod solution of 4 g'' + y g - g^3 = 0 and its correction hierarchy.

gamma_0 connects the Airy-type decay at y -> -inf to sqrt(y) at y -> +inf.
The corrections gamma_n solve -4 g'' + W0 g = F_n with W0 = 3 gamma_0^2 - y,
and mu_n are their rescalings to the second turning point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np
from scipy.linalg import solve_banded
from scipy.special import airy

from . import fd
from .errors import NewtonDiverged
from .model import ModelParams
from .tabulated import TabulatedFunction, Tail, fit_exp_tail, fit_power_tail

# gamma_0 ~ AIRY_AMP * Ai(-y / 4^(1/3)) as y -> -inf
AIRY_AMP = 2.0 ** (5.0 / 6.0)
AIRY_SCALE = 4.0 ** (-1.0 / 3.0)


@dataclass(frozen=True)
class HmSeries:
    coeffs: tuple

    def __getitem__(self, n):
        return self.coeffs[n]

    def __len__(self):
        return len(self.coeffs)

    def value(self, y, terms=None):
        """Truncated right-tail series sqrt(y) * sum a_n y^(-3n)."""
        k = len(self.coeffs) if terms is None else terms
        y = np.asarray(y, dtype=float)
        return np.sqrt(y) * sum(float(a) * y ** (-3.0 * n) for n, a in enumerate(self.coeffs[:k]))


def _cubic_sum(a, total, cap):
    s = Fraction(0)
    for n1 in range(0, cap + 1):
        for n2 in range(0, cap + 1):
            n3 = total - n1 - n2
            if 0 <= n3 <= cap:
                s += a[n1] * a[n2] * a[n3]
    return s


def hm_series(N: int) -> HmSeries:
    if N < 0:
        raise ValueError("N must be nonnegative")
    a = [Fraction(1)]
    for n in range(N):
        nxt = 2 * (9 * n * n - Fraction(1, 4)) * a[n] - Fraction(1, 2) * _cubic_sum(a, n + 1, n)
        a.append(nxt)
    return HmSeries(tuple(a))


def airy_left(y):
    """Linearized left tail 2^(5/6) Ai(-y/4^(1/3)) of gamma_0."""
    ai, aip, _, _ = airy(-np.asarray(y, dtype=float) * AIRY_SCALE)
    return AIRY_AMP * ai, -AIRY_AMP * AIRY_SCALE * aip


def airy_leading(y):
    """Leading left asymptotics exp(-(1/3)(-y)^(3/2)) / (sqrt(pi) (-y)^(1/4))."""
    a = -np.asarray(y, dtype=float)
    return np.exp(-(a**1.5) / 3.0) / (np.sqrt(np.pi) * a**0.25)


def _uniform(y_min, y_max, n_points):
    y = np.linspace(y_min, y_max, n_points)
    return y, (y_max - y_min) / (n_points - 1)


def hastings_mcleod(y_min=-12.0, y_max=40.0, n_points=20001, newton_tol=1e-11, max_iter=60):
    """gamma_0 on [y_min, y_max] by damped Newton on the three-point discretization.

    Convergence is declared when the diagonally scaled residual (residual over
    the Jacobian diagonal) is below newton_tol; the unscaled residual has a
    rounding floor near 1e-9 at the default resolution.
    """
    if y_min > -8 or y_max < 25 or n_points < 2000:
        raise ValueError("need y_min <= -8, y_max >= 25 and n_points >= 2000")
    y, h = _uniform(y_min, y_max, n_points)
    series = hm_series(2)
    left = float(airy_left(y_min)[0])
    right = float(series.value(y_max, 3))

    g = np.sqrt(0.5 * (y + np.sqrt(y * y + 4.0)))
    g[0], g[-1] = left, right
    c = 4.0 / h**2

    def resid(g):
        return c * (g[2:] - 2 * g[1:-1] + g[:-2]) + y[1:-1] * g[1:-1] - g[1:-1] ** 3

    trace = []
    r = resid(g)
    for it in range(max_iter):
        diag = -2 * c + y[1:-1] - 3 * g[1:-1] ** 2
        scaled = np.max(np.abs(r / diag))
        trace.append(scaled)
        ab = np.zeros((3, len(r)))
        ab[0, 1:] = c
        ab[1] = diag
        ab[2, :-1] = c
        if scaled <= newton_tol:
            break
        step = solve_banded((1, 1), ab, -r)
        t = 1.0
        while t >= 1e-6:
            trial = g.copy()
            trial[1:-1] += t * step
            rt = resid(trial)
            if np.max(np.abs(rt)) < (1 - 1e-4 * t) * np.max(np.abs(r)):
                break
            t *= 0.5
        else:
            raise NewtonDiverged("line search failed in hastings_mcleod", trace, g)
        g, r = trial, rt
    else:
        raise NewtonDiverged("no convergence in hastings_mcleod", trace, g)

    # second derivative from the equation: equal to the stencil up to the
    # Newton residual but free of its rounding noise
    d1 = fd.deriv1_4(g, h)
    d2 = (g**3 - y * g) / 4.0
    coeffs = tuple(float(a) for a in series.coeffs)
    rtail = Tail("power", 0.5, coeffs, step=3.0)
    ltail = fit_exp_tail(y, g, -0.25, 1.0 / 3.0, "left")
    return TabulatedFunction(y, g, d1, d2, ltail, rtail, "gamma0")


def p2_residual(gamma0: TabulatedFunction):
    """Residual of 4 g'' + y g - g^3 at interior nodes (unscaled, scaled)."""
    y, g = gamma0.grid, gamma0.values
    h = y[1] - y[0]
    r = 4 * (g[2:] - 2 * g[1:-1] + g[:-2]) / h**2 + y[1:-1] * g[1:-1] - g[1:-1] ** 3
    diag = -8.0 / h**2 + y[1:-1] - 3 * g[1:-1] ** 2
    return r, r / np.abs(diag)


def w0(gamma0: TabulatedFunction) -> TabulatedFunction:
    y, g = gamma0.grid, gamma0.values
    vals = 3 * g**2 - y
    d1 = 6 * g * gamma0.d1 - 1.0
    d2 = 6 * gamma0.d1**2 + 6 * g * gamma0.d2
    return TabulatedFunction(
        y, vals, d1, d2,
        Tail("power", 1.0, (-1.0,)),
        Tail("power", 1.0, (2.0,)),
        "W0",
    )


def _correction_rhs(n, d, y, hist):
    vals = [t.values for t in hist]
    s = np.zeros_like(y)
    for n1, n2 in product(range(n), repeat=2):
        n3 = n - n1 - n2
        if 0 <= n3 < n:
            s += vals[n1] * vals[n2] * vals[n3]
    return -s - 2 * d * hist[n - 1].d1 - 4 * y * hist[n - 1].d2


def correction_left_exponent(n):
    """p in gamma_n ~ c |y|^p exp(-|y|^(3/2)/3) as y -> -inf.

    The source term -4 y gamma_{n-1}'' ~ y^2 gamma_{n-1} is resonant with the
    decaying mode, so each order gains a factor |y|^(5/2).
    """
    return 2.5 * n - 0.25


def correction_right_exponent(n, d):
    return 0.5 - 2 * n - (3 if d == 1 else 0)


def painleve_correction(n: int, d: int, history) -> TabulatedFunction:
    """gamma_n from gamma_0..gamma_{n-1}: -4 g'' + W0 g = F_n, decaying at both ends.

    The right end is pinned to the local balance F_n / W0, the leading term of
    the algebraic tail. On the left gamma_n behaves like |y|^(5n/2) gamma_0,
    which is far above F_n / W0 at the grid end, so there the logarithmic
    derivative of that profile is imposed instead.

    The right pin is only the leading balance, so each gamma_n carries an
    error layer a few units wide next to y_max, amplified from one order to
    the next through the y gamma_{n-1}'' term of F_n. Keep evaluations a few
    units inside the grid when n >= 2.
    """
    if n < 1 or len(history) < n:
        raise ValueError("need n >= 1 and gamma_0..gamma_{n-1}")
    hist = list(history[:n])
    g0 = hist[0]
    y = g0.grid
    h = y[1] - y[0]
    W = 3 * g0.values**2 - y
    F = _correction_rhs(n, d, y, hist)
    p_left = correction_left_exponent(n)
    slope = fd.exp_tail_slope(y[0], p_left, 1.0 / 3.0)
    g = fd.solve_robin_left(h, 4.0, W, F, slope, F[-1] / W[-1])
    d1 = fd.deriv1_4(g, h)
    d1[0] = slope * g[0]
    d2 = (W * g - F) / 4.0
    p_right = correction_right_exponent(n, d)
    _, d1[-1], d2[-1] = fd.power_tail_rows(g[-1], y[-1], p_right, 2)
    rtail = fit_power_tail(y, g, p_right, "right")
    ltail = fit_exp_tail(y, g, p_left, 1.0 / 3.0, "left")
    return TabulatedFunction(y, g, d1, d2, ltail, rtail, f"gamma{n}")


def correction_residual(n, d, history, gamma_n):
    g0 = history[0]
    y = g0.grid
    h = y[1] - y[0]
    W = 3 * g0.values**2 - y
    F = _correction_rhs(n, d, y, list(history[:n]))
    return fd.dirichlet_residual(h, 4.0, W, F, gamma_n.values)


def painleve_hierarchy(L: int, d: int, gamma0=None, **kw):
    gam = [gamma0 if gamma0 is not None else hastings_mcleod(**kw)]
    for n in range(1, L + 1):
        gam.append(painleve_correction(n, d, gam))
    return gam


def mu_n(p: ModelParams, n: int, gamma_n: TabulatedFunction) -> TabulatedFunction:
    """mu_n(y2) = R2^(1/3) (2 a2)^(-1/2) R2^(-4n/3) gamma_n(y2 / R2^(2/3))."""
    amp = p.R2 ** (1.0 / 3.0) / np.sqrt(2 * p.alpha2) * p.R2 ** (-4.0 * n / 3.0)
    return gamma_n.rescaled(amp, p.R2 ** (-2.0 / 3.0), f"mu{n}")
