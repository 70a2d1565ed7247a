"""Scaled coordinates, smooth cutoffs and the glued multi-scale approximation.

The approximation combines the outer pair (omega, tau) in the bulk, the inner
pair (nu, sqrt(lambda)) across the first turning point and mu across the
second, each weighted by a smooth cutoff in z = R1^2 - r^2.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import expit

from . import fd
from .errors import GridMismatch, NegativeLambda
from .inner import inner_hierarchy
from .model import ModelParams
from .outer import outer_expansion
from .painleve import mu_n, painleve_hierarchy

# lambda sums are only required to be positive where chi exceeds this
CHI_FLOOR = 1e-6


@dataclass(frozen=True)
class ScaledCoords:
    params: ModelParams
    eps: float
    beta: float

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if not 0 < self.beta < 2.0 / 3.0:
            raise ValueError("beta must lie in (0, 2/3)")

    @property
    def band(self) -> float:
        """eps^beta, the width of each overlap band in z."""
        return self.eps**self.beta

    @property
    def layer(self) -> float:
        """eps^(2/3), the boundary-layer scale."""
        return self.eps ** (2.0 / 3.0)

    def z(self, r):
        return self.params.R1**2 - np.asarray(r, dtype=float) ** 2

    def y1(self, r):
        return self.z(r) / self.layer

    def y2(self, r):
        return (self.params.R2**2 - np.asarray(r, dtype=float) ** 2) / self.layer

    def region(self, r, name):
        """Boolean mask of 'D0', 'D1', 'D2' or 'all' on the radii r."""
        z, b = self.z(r), self.band
        if name == "all":
            return np.ones(z.shape, dtype=bool)
        if name == "D0":
            return z >= b
        if name == "D1":
            return np.abs(z) <= 2 * b
        if name == "D2":
            return z <= -b
        if name == "D01":
            return (z >= b) & (z <= 2 * b)
        if name == "D12":
            return (z <= -b) & (z >= -2 * b)
        raise ValueError(f"unknown region {name!r}")


def smooth_step(t, order=0):
    """C-infinity step, 0 for t <= 0 and 1 for t >= 1, or its first/second derivative.

    Inside (0, 1) it equals sigmoid(1/(1-t) - 1/t), the usual exp(-1/t) quotient.
    """
    t = np.asarray(t, dtype=float)
    inside = (t > 0) & (t < 1)
    tc = np.where(inside, t, 0.5)
    with np.errstate(over="ignore", divide="ignore"):
        # t within a subnormal of 0 gives u = -inf, where expit is exactly 0
        u = 1.0 / (1.0 - tc) - 1.0 / tc
    s = expit(u)
    if order == 0:
        return np.where(t >= 1, 1.0, np.where(inside, s, 0.0))
    # the derivative factors vanish faster than any power at the plateaus
    live = inside & (np.abs(u) < 700)
    tl = np.where(live, t, 0.5)
    sl = np.where(live, s, 0.5)
    u1 = 1.0 / (1.0 - tl) ** 2 + 1.0 / tl**2
    g = sl * (1 - sl)
    if order == 1:
        return np.where(live, g * u1, 0.0)
    if order == 2:
        u2 = 2.0 / (1.0 - tl) ** 3 - 2.0 / tl**3
        return np.where(live, g * (1 - 2 * sl) * u1**2 + g * u2, 0.0)
    raise ValueError("order must be 0, 1 or 2")


@dataclass(frozen=True)
class Cutoffs:
    """Phi, chi and Psi as functions of z, with z-derivatives up to order two."""

    band: float

    def outer(self, z, order=0):
        b = self.band
        return smooth_step((np.asarray(z) - b) / b, order) / b**order

    def inner(self, z, order=0):
        b = self.band
        z = np.asarray(z, dtype=float)
        t1, t2 = (z - b) / b, (z + 2 * b) / b
        a = [1 - smooth_step(t1), -smooth_step(t1, 1) / b, -smooth_step(t1, 2) / b**2]
        c = [smooth_step(t2), smooth_step(t2, 1) / b, smooth_step(t2, 2) / b**2]
        if order == 0:
            return a[0] * c[0]
        if order == 1:
            return a[1] * c[0] + a[0] * c[1]
        if order == 2:
            return a[2] * c[0] + 2 * a[1] * c[1] + a[0] * c[2]
        raise ValueError("order must be 0, 1 or 2")

    def far(self, z, order=0):
        b = self.band
        t = np.asarray(z, dtype=float) / b + 2
        if order == 0:
            return 1 - smooth_step(t)
        return -smooth_step(t, order) / b**order


@dataclass(frozen=True)
class RadialState:
    grid: np.ndarray
    eta1: np.ndarray
    eta2: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        if g.ndim != 1 or g.size < 3 or np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing with at least 3 nodes")
        e1, e2 = np.asarray(self.eta1, dtype=float), np.asarray(self.eta2, dtype=float)
        if e1.shape != g.shape or e2.shape != g.shape:
            raise GridMismatch("fields and grid differ in length")
        if not (np.all(np.isfinite(e1)) and np.all(np.isfinite(e2))):
            raise ValueError("fields must be finite")
        for name, a in (("grid", g), ("eta1", e1), ("eta2", e2)):
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("r", "eta1", "eta2"))
            for row in zip(self.grid, self.eta1, self.eta2):
                w.writerow([repr(float(v)) for v in row])


def lambda_sum(inner, y1, eps, N):
    """eps^(2/3) times the truncated sum over n = -1..N of eps^(2n/3) lambda_n.

    Its square root is the inner contribution eps^(1/3) lambda^(1/2) to eta2.
    """
    return eps ** (2.0 / 3.0) * inner.lam_sum(y1, eps, N)


def assemble(p: ModelParams, eps, beta, M0, N0, L0, outer, inner, mu, grid, chi_floor=CHI_FLOOR):
    """Glued approximation (eta1_app, eta2_app) on the radial grid.

    ``mu`` is the sequence mu_0..mu_L. The lambda sum must be positive where
    chi exceeds ``chi_floor``; below that its positive part is used, which
    changes the state by less than chi_floor times the local lambda scale.
    """
    if M0 > outer.order or N0 > inner.order or L0 > len(mu) - 1:
        raise ValueError("requested orders exceed the computed hierarchies")
    c = ScaledCoords(p, eps, beta)
    cut = Cutoffs(c.band)
    r = np.asarray(grid, dtype=float)
    z = c.z(r)
    e13 = eps ** (1.0 / 3.0)
    eta1 = np.zeros_like(r)
    eta2 = np.zeros_like(r)

    Phi = cut.outer(z)
    on = Phi > 0
    if np.any(on):
        eta1[on] += Phi[on] * outer.omega_sum(z[on], eps, M0)
        eta2[on] += Phi[on] * outer.tau_sum(z[on], eps, M0)

    chi = cut.inner(z)
    on = chi > 0
    if np.any(on):
        y1 = z[on] / c.layer
        eta1[on] += e13 * chi[on] * inner.nu_sum(y1, eps, N0)
        lam = lambda_sum(inner, y1, eps, N0)
        bad = (lam <= 0) & (chi[on] >= chi_floor)
        if np.any(bad):
            where = r[on][bad]
            raise NegativeLambda(
                f"truncated lambda sum is nonpositive for r in [{where.min():.4g}, {where.max():.4g}]"
                f" at eps = {eps:.4g}"
            )
        eta2[on] += chi[on] * np.sqrt(np.maximum(lam, 0.0))

    Psi = cut.far(z)
    on = Psi > 0
    if np.any(on):
        y2 = c.y2(r[on])
        e = eps ** (2.0 / 3.0)
        eta2[on] += e13 * Psi[on] * sum(e**n * mu[n].evaluate(y2) for n in range(L0 + 1))

    meta = dict(eps=float(eps), beta=float(beta), orders=(int(M0), int(N0), int(L0)))
    return RadialState(r, eta1, eta2, meta)


def radial_laplacian(f, r, d):
    """Three-point radial Laplacian f'' + (d-1) f'/r on a possibly nonuniform grid.

    At r = 0 the symmetric limit d f''(0) = 2 d (f1 - f0)/h^2 is used; the last
    node is treated as a Dirichlet node and gets 0.
    """
    f = np.asarray(f, dtype=float)
    lo, di, up = fd.radial_laplacian_coeffs(r, d)
    out = di * f
    out[1:] += lo[1:] * f[:-1]
    out[:-1] += up[:-1] * f[1:]
    out[-1] = 0.0
    return out


def residual(p: ModelParams, eps, state: RadialState):
    """Pointwise left-hand sides of the stationary two-component system."""
    r, e1, e2 = state.grid, state.eta1, state.eta2
    lap1 = radial_laplacian(e1, r, p.d)
    lap2 = radial_laplacian(e2, r, p.d)
    r2 = r**2
    res1 = eps**2 * lap1 + (p.mu1 - r2) * e1 - 2 * p.alpha1 * e1**3 - 2 * p.alpha0 * e2**2 * e1
    res2 = eps**2 * lap2 + (p.mu2 - r2) * e2 - 2 * p.alpha2 * e2**3 - 2 * p.alpha0 * e1**2 * e2
    res1[-1] = res2[-1] = 0.0
    return res1, res2


def piece_state(p: ModelParams, eps, piece, order, hierarchy, grid):
    """One truncated expansion on its own, without cutoffs.

    piece 'outer' gives (omega, tau) summed to ``order`` (needs z >= z_min on
    the grid), 'inner' gives eps^(1/3) (nu, lambda^(1/2)) and 'far' gives
    (0, eps^(1/3) mu) with ``hierarchy`` the sequence mu_0..mu_L. These are
    the fields whose residuals the region-wise truncation estimates bound.
    """
    r = np.asarray(grid, dtype=float)
    z = p.R1**2 - r**2
    e13 = eps ** (1.0 / 3.0)
    layer = eps ** (2.0 / 3.0)
    if piece == "outer":
        e1, e2 = hierarchy.omega_sum(z, eps, order), hierarchy.tau_sum(z, eps, order)
    elif piece == "inner":
        y1 = z / layer
        e1 = e13 * hierarchy.nu_sum(y1, eps, order)
        lam = lambda_sum(hierarchy, y1, eps, order)
        if np.any(lam <= 0):
            raise NegativeLambda(f"truncated lambda sum is nonpositive at eps = {eps:.4g}")
        e2 = np.sqrt(lam)
    elif piece == "far":
        y2 = (p.R2**2 - r**2) / layer
        e1 = np.zeros_like(r)
        e2 = e13 * sum(layer**n * hierarchy[n].evaluate(y2) for n in range(order + 1))
    else:
        raise ValueError(f"unknown piece {piece!r}")
    return RadialState(r, e1, e2, dict(eps=float(eps), piece=piece, order=int(order)))


def _piece_jets(p: ModelParams, eps, piece, order, hierarchy, r):
    """Values, d/ds and d^2/ds^2 of both fields, s the piece's own variable."""
    e13 = eps ** (1.0 / 3.0)
    layer = eps ** (2.0 / 3.0)
    if piece == "outer":
        z = p.R1**2 - r**2
        u = [hierarchy.omega_sum(z, eps, order, k) for k in range(3)]
        v = [hierarchy.tau_sum(z, eps, order, k) for k in range(3)]
        return u, v, 1.0
    if piece == "inner":
        y1 = (p.R1**2 - r**2) / layer
        u = [e13 * hierarchy.nu_sum(y1, eps, order, k) for k in range(3)]
        lam = [lambda_sum(hierarchy, y1, eps, order)]
        lam += [layer * hierarchy.lam_sum(y1, eps, order, k) for k in (1, 2)]
        if np.any(lam[0] <= 0):
            raise NegativeLambda(f"truncated lambda sum is nonpositive at eps = {eps:.4g}")
        g = np.sqrt(lam[0])
        v = [g, lam[1] / (2 * g), lam[2] / (2 * g) - lam[1] ** 2 / (4 * g**3)]
        return u, v, layer
    if piece == "far":
        y2 = (p.R2**2 - r**2) / layer
        v = [e13 * sum(layer**n * hierarchy[n].evaluate(y2, k) for n in range(order + 1)) for k in range(3)]
        return [np.zeros_like(r)] * 3, v, layer
    raise ValueError(f"unknown piece {piece!r}")


def piece_residual(p: ModelParams, eps, piece, order, hierarchy, grid):
    """Residuals of one truncated piece with its r-derivatives taken exactly.

    Each piece is a function of s = (c - r^2) / scale, so the radial
    Laplacian is 4 r^2 f_ss / scale^2 - 2 d f_s / scale with f_s, f_ss
    read from the tabulated jets. Unlike ``residual`` on a sampled state
    this carries no stencil error, which would otherwise hide residuals
    smaller than about eps h^2 / scale^2.
    """
    r = np.asarray(grid, dtype=float)
    u, v, sc = _piece_jets(p, eps, piece, order, hierarchy, r)
    out = []
    for f, other, mu, a_self in ((u, v, p.mu1, p.alpha1), (v, u, p.mu2, p.alpha2)):
        lap = 4 * r**2 * f[2] / sc**2 - 2 * p.d * f[1] / sc
        out.append(eps**2 * lap + (mu - r**2) * f[0] - 2 * a_self * f[0] ** 3 - 2 * p.alpha0 * other[0] ** 2 * f[0])
    return tuple(out)


@dataclass(frozen=True)
class Hierarchies:
    outer: object
    inner: object
    mu: tuple

    def assemble(self, p, eps, beta, M0, N0, L0, grid, chi_floor=CHI_FLOOR):
        return assemble(p, eps, beta, M0, N0, L0, self.outer, self.inner, self.mu, grid, chi_floor)


@lru_cache(maxsize=16)
def build_hierarchies(p: ModelParams, M=1, N=3, L=1) -> Hierarchies:
    """Outer, inner and far expansions for one parameter set (cached, immutable)."""
    gam = painleve_hierarchy(L, p.d)
    inner = inner_hierarchy(p, gam[0], N)
    outer = outer_expansion(p, M)
    return Hierarchies(outer, inner, tuple(mu_n(p, n, gam[n]) for n in range(L + 1)))
