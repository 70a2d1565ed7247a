"""Second-order finite-difference stencils on uniform grids."""

import numpy as np
from scipy.linalg import solve_banded

from .errors import SingularSystem


def deriv1(f, h):
    return np.gradient(f, h, edge_order=2)


def deriv2(f, h):
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / h**2
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h**2
    out[-1] = (2.0 * f[-1] - 5.0 * f[-2] + 4.0 * f[-3] - f[-4]) / h**2
    return out


def solve_dirichlet(h, a, w, rhs, left, right):
    """Solve -a f'' + w f = rhs on a uniform grid with pinned end values.

    ``a`` is a positive constant, ``w`` and ``rhs`` are nodal arrays.
    Returns the full nodal solution including the two pinned ends.
    """
    n = len(rhs)
    m = n - 2
    c = a / h**2
    ab = np.zeros((3, m))
    ab[0, 1:] = -c
    ab[1, :] = 2.0 * c + w[1:-1]
    ab[2, :-1] = -c
    b = np.array(rhs[1:-1], dtype=float)
    b[0] += c * left
    b[-1] += c * right
    try:
        inner = solve_banded((1, 1), ab, b, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularSystem(str(exc)) from exc
    if not np.all(np.isfinite(inner)):
        raise SingularSystem("non-finite solution of the tridiagonal system")
    out = np.empty(n)
    out[0], out[-1] = left, right
    out[1:-1] = inner
    return out


def dirichlet_residual(h, a, w, rhs, f):
    """Interior residual of -a f'' + w f - rhs."""
    return -a * (f[2:] - 2.0 * f[1:-1] + f[:-2]) / h**2 + w[1:-1] * f[1:-1] - rhs[1:-1]


def deriv1_4(f, h):
    """Fourth-order central first derivative, second order at the two end pairs."""
    out = np.gradient(f, h, edge_order=2)
    out[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
    return out


def solve_robin_left(h, a, w, rhs, slope, right):
    """Solve -a f'' + w f = rhs with f'(x0) = slope * f(x0) and a pinned right end.

    The Robin condition enters through a ghost node, which keeps the system
    tridiagonal and second-order accurate.
    """
    n = len(rhs)
    m = n - 1
    c = a / h**2
    ab = np.zeros((3, m))
    ab[0, 1:] = -c
    ab[1, :] = 2.0 * c + w[:-1]
    ab[2, :-1] = -c
    ab[0, 1] = -2.0 * c
    ab[1, 0] += 2.0 * c * h * slope
    b = np.array(rhs[:-1], dtype=float)
    b[-1] += c * right
    try:
        sol = solve_banded((1, 1), ab, b, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularSystem(str(exc)) from exc
    if not np.all(np.isfinite(sol)):
        raise SingularSystem("non-finite solution of the tridiagonal system")
    return np.append(sol, right)


def exp_tail_slope(x0, exponent, kappa):
    """Logarithmic derivative at x0 < 0 of |x|^p exp(-kappa |x|^(3/2))."""
    a = abs(x0)
    return -exponent / a + 1.5 * kappa * np.sqrt(a)


def radial_laplacian_coeffs(r, d):
    """Three-point weights (lower, centre, upper) of f'' + (d-1) f'/r at every node.

    Works on nonuniform grids. At r = 0 the symmetric limit d f''(0), i.e.
    2 d (f1 - f0) / h^2, is used. The last row is left for the caller (it
    needs a boundary condition) and comes back as zeros.
    """
    r = np.asarray(r, dtype=float)
    n = len(r)
    lo, di, up = np.zeros(n), np.zeros(n), np.zeros(n)
    hl = r[1:-1] - r[:-2]
    hr = r[2:] - r[1:-1]
    den = hl * hr * (hl + hr)
    rc = r[1:-1]
    inv = np.divide(d - 1.0, rc, out=np.zeros_like(rc), where=rc > 0)
    lo[1:-1] = 2 * hr / den - inv * hr**2 / den
    di[1:-1] = -2 * (hl + hr) / den + inv * (hr**2 - hl**2) / den
    up[1:-1] = 2 * hl / den + inv * hl**2 / den
    if r[0] == 0.0:
        c = 2.0 * d / r[1] ** 2
        di[0], up[0] = -c, c
    else:
        di[0] = np.nan
    return lo, di, up


def power_tail_rows(value, x, exponent, K):
    """Derivatives 0..K at x > 0 of c x^p with c fixed by c x^p = value.

    At a node pinned to an algebraic tail the equation is not solved, so
    derivatives taken from the equation there are meaningless; these replace them.
    """
    out = np.empty(K + 1)
    coef = 1.0
    for j in range(K + 1):
        out[j] = coef * value / x**j
        coef *= exponent - j
    return out
