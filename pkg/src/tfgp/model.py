"""Problem parameters, derived constants and the Thomas-Fermi limit profiles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCase, GridMismatch, InvalidRegime


@dataclass(frozen=True)
class ModelParams:
    alpha0: float
    alpha1: float
    alpha2: float
    R1: float
    R2: float
    d: int
    Gamma1: float
    Gamma2: float
    Gamma12: float
    mu1: float
    mu2: float
    lambdaMinus1: float

    @property
    def gap(self) -> float:
        """R2^2 - R1^2, the squared distance between the two turning points."""
        return self.R2**2 - self.R1**2

    @property
    def sphere_area(self) -> float:
        """|S^{d-1}|, the factor in the radial measure."""
        return {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}[self.d]

    @property
    def bulk_shift(self) -> float:
        """Constant (a0/a2)(R2^2 - R1^2) + R1^2 in the first equation, equal to mu1."""
        return self.alpha0 / self.alpha2 * self.gap + self.R1**2

    def with_dimension(self, d: int) -> "ModelParams":
        return derive_params(self.alpha0, self.alpha1, self.alpha2, self.R1, self.R2, d)


REFERENCE = dict(alpha0=0.5, alpha1=1.0, alpha2=1.0, R1=1.0, R2=math.sqrt(2.0))


def derive_params(alpha0, alpha1, alpha2, R1, R2, d=1) -> ModelParams:
    if min(alpha0, alpha1, alpha2) <= 0:
        raise ValueError("couplings must be positive")
    if not (R1 > 0 and R2 > 0):
        raise ValueError("radii must be positive")
    if d not in (1, 2, 3):
        raise ValueError("dimension must be 1, 2 or 3")
    if R1 == R2:
        raise DegenerateCase("R1 = R2 reduces to the scalar problem")
    if R1 > R2:
        raise ValueError("need R1 < R2")
    g1 = 1.0 - alpha0 / alpha1
    g2 = 1.0 - alpha0 / alpha2
    g12 = 1.0 - alpha0**2 / (alpha1 * alpha2)
    if g2 <= 0:
        raise InvalidRegime(f"Gamma2 = {g2:.6g} must be positive")
    if g12 <= 0:
        raise InvalidRegime(f"Gamma12 = {g12:.6g} must be positive")
    if not R2**2 > alpha0 / alpha1 * g2 / g12 * R1**2:
        raise InvalidRegime("R2^2 must exceed (a0/a1)(Gamma2/Gamma12) R1^2")
    mu2 = R2**2
    mu1 = alpha0 / alpha2 * mu2 + g2 * R1**2
    return ModelParams(
        float(alpha0), float(alpha1), float(alpha2), float(R1), float(R2), int(d),
        g1, g2, g12, mu1, mu2, (R2**2 - R1**2) / (2.0 * alpha2),
    )


def reference_params(d: int = 1) -> ModelParams:
    return derive_params(d=d, **REFERENCE)


def tf_profile(p: ModelParams, r):
    """Thomas-Fermi pair (eta10, eta20) at radius r."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be nonnegative")
    s = p.R1**2 - r**2
    inner = s >= 0
    e1 = np.sqrt(np.where(inner, p.Gamma2 * s / (2 * p.alpha1 * p.Gamma12), 0.0))
    e2_in = p.lambdaMinus1 + p.Gamma1 * s / (2 * p.alpha2 * p.Gamma12)
    e2_out = (p.R2**2 - r**2) / (2 * p.alpha2)
    e2 = np.sqrt(np.maximum(np.where(inner, e2_in, e2_out), 0.0))
    return e1, e2


def gp_energy(p: ModelParams, state, eps: float) -> float:
    """Two-component energy whose Euler-Lagrange equations are the stationary system."""
    r = np.asarray(state.grid)
    e1, e2 = np.asarray(state.eta1), np.asarray(state.eta2)
    if e1.shape != r.shape or e2.shape != r.shape:
        raise GridMismatch("fields and grid differ in length")
    g1 = np.gradient(e1, r, edge_order=2)
    g2 = np.gradient(e2, r, edge_order=2)
    dens = (
        eps**2 * (g1**2 + g2**2)
        + (r**2 - p.mu1) * e1**2
        + (r**2 - p.mu2) * e2**2
        + p.alpha1 * e1**4
        + p.alpha2 * e2**4
        + 2 * p.alpha0 * e1**2 * e2**2
    )
    return float(p.sphere_area * np.trapezoid(dens * r ** (p.d - 1), r))
