"""Direct solution of the stationary two-component system on a radial grid.

Damped Newton on both fields at once, with the unknowns interleaved node by
node so the Jacobian is banded with two sub- and two super-diagonals. If the
line search stalls, a semi-implicit gradient flow of the energy is run for a
fixed number of steps before Newton is retried. The outer radius comes from
the a-priori Gaussian envelope, which licenses a homogeneous Dirichlet
condition there.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from . import fd
from .ansatz import RadialState, build_hierarchies, residual
from .errors import ConfigError, NewtonDiverged, NonPositive, TFGPError
from .model import ModelParams, gp_energy, tf_profile

CHECKPOINT_MAGIC = b"TFGPCHK1"


@dataclass(frozen=True)
class SolveConfig:
    tol: float = 1e-10
    max_newton: int = 60
    min_step: float = 2.0**-12
    flow_steps: int = 200
    flow_dt: float = 0.05
    max_flow_rounds: int = 3
    ladder: tuple = ()
    init: str = "tf"
    theta: float = 0.9
    floor: float = 1e-16
    points_per_layer: int = 100
    beta: float = 0.3
    sign_floor: float = 1e-13

    def __post_init__(self):
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.init not in ("tf", "ansatz", "custom"):
            raise ConfigError(f"unknown init {self.init!r}")
        if any(b >= a for a, b in zip(self.ladder, self.ladder[1:])):
            raise ConfigError("continuation ladder must be strictly decreasing")
        if not 0 < self.theta < 1:
            raise ConfigError("theta must lie in (0, 1)")
        if self.points_per_layer < 40:
            raise ConfigError("points_per_layer must be at least 40 (h <= eps^(2/3)/40)")


@dataclass(frozen=True)
class GroundState(RadialState):
    residual_norm: float = np.inf
    newton_iters: int = 0
    energy: float = np.nan


def envelope(p: ModelParams, theta=0.9):
    """(M_j, r_j) of the a-priori bound eta_j <= M_j exp(-theta (r^2 - r_j^2) / (2 eps))."""
    a1 = np.sqrt(p.alpha0 / p.alpha2 * p.gap + p.R1**2)
    s = np.sqrt(1 - theta**2)
    return (a1 / np.sqrt(2 * p.alpha1), a1 / s), (p.R2 / np.sqrt(2 * p.alpha2), p.R2 / s)


def outer_radius(p: ModelParams, eps, theta=0.9, floor=1e-16):
    """Radius beyond which both envelopes are below ``floor``."""
    r2 = [rj**2 + 2 * eps / theta * np.log(Mj / floor) for Mj, rj in envelope(p, theta)]
    return float(np.sqrt(max(r2)))


def uniform_grid(p: ModelParams, eps, config: SolveConfig = SolveConfig()):
    r_max = outer_radius(p, eps, config.theta, config.floor)
    h_target = eps ** (2.0 / 3.0) / config.points_per_layer
    n = int(np.ceil(r_max / h_target)) + 1
    return np.linspace(0.0, r_max, n)


class _System:
    """Residual and banded Jacobian of the discrete system with eta = 0 at r_max."""

    def __init__(self, p: ModelParams, eps, r):
        self.p, self.eps, self.r = p, eps, np.asarray(r, dtype=float)
        lo, di, up = fd.radial_laplacian_coeffs(self.r, p.d)
        e2 = eps**2
        self.lo, self.di, self.up = e2 * lo[:-1], e2 * di[:-1], e2 * up[:-1]
        self.pot1 = p.mu1 - self.r[:-1] ** 2
        self.pot2 = p.mu2 - self.r[:-1] ** 2

    def _lap(self, f):
        out = self.di * f
        out[1:] += self.lo[1:] * f[:-1]
        out[:-1] += self.up[:-1] * f[1:]
        return out

    def split(self, x):
        return x[0::2], x[1::2]

    def residual(self, x):
        p = self.p
        u, v = self.split(x)
        out = np.empty_like(x)
        out[0::2] = self._lap(u) + self.pot1 * u - 2 * p.alpha1 * u**3 - 2 * p.alpha0 * v**2 * u
        out[1::2] = self._lap(v) + self.pot2 * v - 2 * p.alpha2 * v**3 - 2 * p.alpha0 * u**2 * v
        return out

    def banded_jacobian(self, x):
        p = self.p
        u, v = self.split(x)
        m = len(x)
        ab = np.zeros((5, m))
        # ab[2 + i - j, j] holds J[i, j]
        ab[2, 0::2] = self.di + self.pot1 - 6 * p.alpha1 * u**2 - 2 * p.alpha0 * v**2
        ab[2, 1::2] = self.di + self.pot2 - 6 * p.alpha2 * v**2 - 2 * p.alpha0 * u**2
        cross = -4 * p.alpha0 * u * v
        ab[1, 1::2] = cross  # row 2i, column 2i+1
        ab[3, 0::2] = cross  # row 2i+1, column 2i
        ab[0, 2:] = self.up[:-1].repeat(2)  # row k, column k+2
        ab[4, :-2] = self.lo[1:].repeat(2)  # row k+2, column k
        return ab

    def flow_step(self, x, dt):
        """One semi-implicit gradient-flow step: diffusion implicit, the rest explicit."""
        p = self.p
        u, v = self.split(x)
        m = len(u)
        ab = np.zeros((3, m))
        ab[0, 1:] = -dt * self.up[:-1]
        ab[1] = 1 - dt * self.di
        ab[2, :-1] = -dt * self.lo[1:]
        nu = u + dt * (self.pot1 * u - 2 * p.alpha1 * u**3 - 2 * p.alpha0 * v**2 * u)
        nv = v + dt * (self.pot2 * v - 2 * p.alpha2 * v**3 - 2 * p.alpha0 * u**2 * v)
        out = np.empty_like(x)
        out[0::2] = solve_banded((1, 1), ab, nu)
        out[1::2] = solve_banded((1, 1), ab, nv)
        return out


def _pack(e1, e2):
    x = np.empty(2 * (len(e1) - 1))
    x[0::2], x[1::2] = e1[:-1], e2[:-1]
    return x


def _unpack(x):
    return np.append(x[0::2], 0.0), np.append(x[1::2], 0.0)


def initial_state(p: ModelParams, eps, grid, config: SolveConfig):
    r = np.asarray(grid, dtype=float)
    if config.init == "tf":
        e1, e2 = tf_profile(p, r)
        return RadialState(r, e1, e2, dict(eps=float(eps), init="tf"))
    if config.init == "ansatz":
        h = build_hierarchies(p, 0, 0, 0)
        return h.assemble(p, eps, config.beta, 0, 0, 0, r)
    raise ConfigError("init 'custom' needs an explicit initial state")


def gradient_flow(p: ModelParams, eps, state: RadialState, steps, dt, energies=None):
    """Run ``steps`` semi-implicit flow steps; optionally record the energy after each."""
    sysm = _System(p, eps, state.grid)
    x = _pack(np.asarray(state.eta1), np.asarray(state.eta2))
    for _ in range(steps):
        x = sysm.flow_step(x, dt)
        if energies is not None:
            e1, e2 = _unpack(x)
            energies.append(gp_energy(p, RadialState(state.grid, e1, e2), eps))
    e1, e2 = _unpack(x)
    return RadialState(state.grid, e1, e2, dict(state.meta))


def _newton(sysm, x, config, trace):
    """Damped Newton; returns (x, converged, iterations used)."""
    F = sysm.residual(x)
    norm = np.max(np.abs(F))
    for it in range(config.max_newton):
        trace.append(norm)
        if norm <= config.tol:
            return x, True, it
        step = solve_banded((2, 2), sysm.banded_jacobian(x), -F)
        t = 1.0
        while t >= config.min_step:
            trial = x + t * step
            Ft = sysm.residual(trial)
            nt = np.max(np.abs(Ft))
            if np.isfinite(nt) and nt < (1 - 1e-4 * t) * norm:
                break
            t *= 0.5
        else:
            return x, False, it
        x, F, norm = trial, Ft, nt
    trace.append(norm)
    return x, norm <= config.tol, config.max_newton


def ground_state(p: ModelParams, eps, grid=None, config: SolveConfig = SolveConfig(), init=None):
    """Positive solution of the stationary system at ``eps`` on ``grid``.

    ``init`` overrides ``config.init`` with an explicit RadialState, which is
    interpolated onto the grid. Continuation ladder entries larger than eps
    are solved first, each on its own grid.
    """
    if not eps > 0:
        raise ConfigError("eps must be positive")
    grid = uniform_grid(p, eps, config) if grid is None else np.asarray(grid, dtype=float)
    for e in config.ladder:
        if e > eps:
            init = ground_state(p, e, None, _no_ladder(config), init)
    if init is None:
        start = initial_state(p, eps, grid, config)
    else:
        start = interpolate(init, grid)
    sysm = _System(p, eps, grid)
    x = _pack(np.asarray(start.eta1), np.asarray(start.eta2))
    trace = []
    iters = 0
    for _ in range(config.max_flow_rounds + 1):
        x, ok, used = _newton(sysm, x, config, trace)
        iters += used
        if ok:
            break
        e1, e2 = _unpack(x)
        flowed = gradient_flow(p, eps, RadialState(grid, e1, e2), config.flow_steps, config.flow_dt)
        x = _pack(np.asarray(flowed.eta1), np.asarray(flowed.eta2))
    else:
        e1, e2 = _unpack(x)
        raise NewtonDiverged(f"no convergence at eps = {eps:.4g}", trace, RadialState(grid, e1, e2))
    e1, e2 = _unpack(x)
    for name, f in (("eta1", e1), ("eta2", e2)):
        if np.min(f) < -config.sign_floor:
            raise NonPositive(f"{name} changes sign (min {np.min(f):.3g}) at eps = {eps:.4g}")
    meta = dict(eps=float(eps), tag="direct", init=config.init if init is None else "custom")
    st = RadialState(grid, e1, e2)
    return GroundState(
        grid, e1, e2, meta,
        residual_norm=float(trace[-1]),
        newton_iters=int(iters),
        energy=gp_energy(p, st, eps),
    )


def _no_ladder(config):
    from dataclasses import replace

    return replace(config, ladder=())


def interpolate(state: RadialState, grid):
    """Linear interpolation of a state onto another grid, zero beyond its support."""
    r = np.asarray(grid, dtype=float)
    e1 = np.interp(r, state.grid, state.eta1, right=0.0)
    e2 = np.interp(r, state.grid, state.eta2, right=0.0)
    return RadialState(r, e1, e2, dict(state.meta))


def continuation_sweep(p: ModelParams, eps_list, grid_rule=None, config: SolveConfig = SolveConfig()):
    """Ground states along a decreasing eps list, each warm-started from the previous one."""
    eps_list = [float(e) for e in eps_list]
    if not eps_list:
        raise ConfigError("empty eps list")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ConfigError("eps list must be strictly decreasing")
    rule = grid_rule or (lambda e: uniform_grid(p, e, config))
    out = []
    prev = None
    for e in eps_list:
        try:
            prev = ground_state(p, e, rule(e), _no_ladder(config) if out else config, prev)
        except TFGPError as exc:
            raise type(exc)(f"continuation broke at eps = {e:.4g}: {exc}") from exc
        out.append(prev)
    return out


def write_checkpoint(path, state: RadialState):
    """Binary checkpoint: magic, uint64 node count, float64 eps, then grid, eta1, eta2.

    Everything is little-endian; the arrays are float64.
    """
    eps = float(state.meta.get("eps", np.nan))
    n = len(state.grid)
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<Qd", n, eps))
        for a in (state.grid, state.eta1, state.eta2):
            fh.write(np.asarray(a, dtype="<f8").tobytes())


def read_checkpoint(path) -> RadialState:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] != CHECKPOINT_MAGIC:
        raise ValueError(f"{path}: not a checkpoint file")
    n, eps = struct.unpack_from("<Qd", data, 8)
    arr = np.frombuffer(data, dtype="<f8", offset=24)
    if arr.size != 3 * n:
        raise ValueError(f"{path}: truncated checkpoint")
    g, e1, e2 = (arr[k * n : (k + 1) * n].astype(float) for k in range(3))
    return RadialState(g, e1, e2, dict(eps=eps))


def state_residual(p: ModelParams, eps, state: RadialState):
    """Max-norm residual of the system for any state (Dirichlet node excluded)."""
    r1, r2 = residual(p, eps, state)
    return float(max(np.max(np.abs(r1)), np.max(np.abs(r2))))
