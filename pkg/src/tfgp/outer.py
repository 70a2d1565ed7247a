"""Outer (bulk) expansion omega_m(z), tau_m(z) with z = R1^2 - r^2.

Order zero is the Thomas-Fermi pair. Higher orders follow from a 2x2
algebraic recursion driven by z-derivatives of the previous orders. Order
zero is known in closed form, so every order is carried as a Taylor jet in z
and no difference stencil is involved. The grid is geometric in z so that the
z -> 0 singularities z^(1/2-3m) and z^(1-3m) are tabulated uniformly.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from . import jets
from .errors import NearOriginBlowup, SingularSystem
from .model import ModelParams
from .tabulated import TabulatedFunction, Tail


@dataclass(frozen=True)
class OuterExpansion:
    params: ModelParams
    omega: tuple
    tau: tuple
    z_min: float

    @property
    def order(self) -> int:
        return len(self.omega) - 1

    @property
    def z(self) -> np.ndarray:
        return self.omega[0].grid

    def _check(self, z):
        z = np.asarray(z, dtype=float)
        if np.any(z < self.z_min * (1 - 1e-12)):
            raise NearOriginBlowup(f"z = {float(z.min()):.3g} below z_min = {self.z_min:.3g}")
        return z

    def omega_sum(self, z, eps, M=None, order=0):
        z = self._check(z)
        M = self.order if M is None else M
        return sum(eps ** (2 * m) * self.omega[m].evaluate(z, order) for m in range(M + 1))

    def tau_sum(self, z, eps, M=None, order=0):
        z = self._check(z)
        M = self.order if M is None else M
        return sum(eps ** (2 * m) * self.tau[m].evaluate(z, order) for m in range(M + 1))

    def leading(self, m):
        """Near-zero leading coefficients (w_{m,0}, t_{m,0})."""
        return self.omega[m].left.coeff, self.tau[m].left.coeff

    def to_csv(self, path, m):
        import csv

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("z", "omega_m", "tau_m"))
            for row in zip(self.z, self.omega[m].values, self.tau[m].values):
                w.writerow([repr(float(v)) for v in row])


def _log_grid(p: ModelParams, n_points, z_min_rel):
    s = np.linspace(np.log(z_min_rel * p.R1**2), np.log(p.R1**2), n_points)
    return s, s[1] - s[0]


def _near_zero_tail(z, f, exponent, n_fit=40):
    # fit f ~ z^p (c0 + c1 z) on the smallest nodes
    zz, ff = z[:n_fit], f[:n_fit] / z[:n_fit] ** exponent
    c1, c0 = np.polyfit(zz, ff, 1)
    return Tail("power", exponent, (float(c0),))


def jet_order(m: int, M: int) -> int:
    return 2 * (M - m) + 2


def _order0_jets(p: ModelParams, z, K):
    A = p.Gamma2 / (2 * p.alpha1 * p.Gamma12)
    B = p.Gamma1 / (2 * p.alpha2 * p.Gamma12)
    return jets.power_of_linear(0.0, A, z, 0.5, K), jets.power_of_linear(p.lambdaMinus1, B, z, 0.5, K)


def _table(z, jet, exponent, lead, name):
    left = Tail("power", exponent, (lead,)) if lead is not None else _near_zero_tail(z, jet[0], exponent)
    return TabulatedFunction(z, jet[0], jet[1], jet[2], left, Tail("zero"), name)


def outer_order0(p: ModelParams, n_points=8001, z_min_rel=1e-5):
    s, _ = _log_grid(p, n_points, z_min_rel)
    z = np.exp(s)
    w, t = _order0_jets(p, z, 2)
    A = p.Gamma2 / (2 * p.alpha1 * p.Gamma12)
    return (
        _table(z, w, 0.5, float(np.sqrt(A)), "omega0"),
        _table(z, t, 0.0, float(np.sqrt(p.lambdaMinus1)), "tau0"),
    )


def outer_matrix(p: ModelParams, w0, t0):
    """Matrix of the order-m linear system and its determinant (jets or plain arrays)."""
    a0, a1, a2 = p.alpha0, p.alpha1, p.alpha2
    if np.ndim(w0) == 1:
        w0, t0 = w0[None], t0[None]
    mul = jets.mul
    M = [[-4 * a1 * mul(w0, w0), -4 * a0 * mul(w0, t0)], [-4 * a0 * mul(w0, t0), -4 * a2 * mul(t0, t0)]]
    det = mul(M[0][0], M[1][1]) - mul(M[0][1], M[1][0])
    return M, det


def outer_rhs(p: ModelParams, m, omega, tau, zj, K):
    """Jets of the right-hand side of the order-m system (before applying M^-1)."""
    a0, a1, a2, d = p.alpha0, p.alpha1, p.alpha2, p.d
    mul = jets.mul
    shift = zj[: K + 1].copy()
    shift[0] -= p.R1**2
    sw = np.zeros((K + 1, zj.shape[1]))
    st = np.zeros_like(sw)
    for m1, m2 in product(range(m), repeat=2):
        m3 = m - m1 - m2
        if 0 <= m3 < m:
            w1, w2, w3 = omega[m1], omega[m2], omega[m3]
            t1, t2, t3 = tau[m1], tau[m2], tau[m3]
            sw += a1 * mul(w1, w2, w3, K=K) + a0 * mul(w1, t2, t3, K=K)
            st += a2 * mul(t1, t2, t3, K=K) + a0 * mul(w1, w2, t3, K=K)
    wp, tp = omega[m - 1], tau[m - 1]
    rw = 2 * d * jets.deriv(wp)[: K + 1] + 4 * mul(shift, jets.deriv(wp, 2), K=K) + 2 * sw
    rt = 2 * d * jets.deriv(tp)[: K + 1] + 4 * mul(shift, jets.deriv(tp, 2), K=K) + 2 * st
    return rw, rt


def outer_next(p: ModelParams, m, omega, tau, zj, K):
    """Jets (omega_m, tau_m) of order K from the jets of orders 0..m-1."""
    if m < 1 or len(omega) < m:
        raise ValueError("need m >= 1 and all lower orders")
    M, det = outer_matrix(p, omega[0][: K + 1], tau[0][: K + 1])
    if np.any(np.abs(det[0]) <= 1e-300) or not np.all(np.isfinite(det[0])):
        raise SingularSystem("outer recursion matrix is singular")
    inv = jets.recip(det)
    rw, rt = outer_rhs(p, m, omega, tau, zj, K)
    mul = jets.mul
    wm = mul(mul(M[1][1], rw) - mul(M[0][1], rt), inv)
    tm = mul(mul(M[0][0], rt) - mul(M[1][0], rw), inv)
    return wm, tm


def outer_expansion(p: ModelParams, M=3, n_points=8001, z_min_rel=1e-5) -> OuterExpansion:
    s, _ = _log_grid(p, n_points, z_min_rel)
    z = np.exp(s)
    K0 = jet_order(0, M)
    zj = jets.variable(z, K0)
    w0, t0 = _order0_jets(p, z, K0)
    omega, tau = [w0], [t0]
    for m in range(1, M + 1):
        w, t = outer_next(p, m, omega, tau, zj, jet_order(m, M))
        omega.append(w)
        tau.append(t)
    om0, ta0 = outer_order0(p, n_points, z_min_rel)
    omt = [om0] + [_table(z, omega[m], 0.5 - 3 * m, None, f"omega{m}") for m in range(1, M + 1)]
    tat = [ta0] + [_table(z, tau[m], 1.0 - 3 * m, None, f"tau{m}") for m in range(1, M + 1)]
    return OuterExpansion(p, tuple(omt), tuple(tat), float(z[0]))


def outer_residual(ex: OuterExpansion, eps, M=None):
    """Residuals of the two outer equations for the truncated sums, on the z grid."""
    p = ex.params
    M = ex.order if M is None else M
    z = ex.z
    e2 = eps**2

    def tot(fs, k):
        return sum(e2**m * getattr(fs[m], k) for m in range(M + 1))

    w, w1, w2 = tot(ex.omega, "values"), tot(ex.omega, "d1"), tot(ex.omega, "d2")
    t, t1, t2 = tot(ex.tau, "values"), tot(ex.tau, "d1"), tot(ex.tau, "d2")
    lap_w = 4 * (p.R1**2 - z) * w2 - 2 * p.d * w1
    lap_t = 4 * (p.R1**2 - z) * t2 - 2 * p.d * t1
    r1 = e2 * lap_w + (p.alpha0 / p.alpha2 * p.gap + z) * w - 2 * p.alpha1 * w**3 - 2 * p.alpha0 * t**2 * w
    r2 = e2 * lap_t + (p.gap + z) * t - 2 * p.alpha2 * t**3 - 2 * p.alpha0 * w**2 * t
    return r1, r2
