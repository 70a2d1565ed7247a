"""Inner expansion at the first turning point, in y1 = (R1^2 - r^2) / eps^(2/3).

nu_0 is a rescaled Hastings-McLeod profile and lam_0 follows algebraically.
For n >= 1 the corrections solve T nu_n = F_n with T = -4 R1^2 d^2 + W and
lam_n is then assembled pointwise from nu_n and the bookkeeping sum delta_n.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from . import fd, jets
from .model import ModelParams
from .painleve import correction_left_exponent
from .tabulated import TabulatedFunction, Tail, fit_exp_tail, fit_power_tail


@dataclass(frozen=True)
class InnerHierarchy:
    params: ModelParams
    nu: tuple
    lam: tuple  # lam[k] is lambda_k for k = 0..N
    W: TabulatedFunction
    delta: tuple  # delta[k] for k = 1..N, stored with delta[0] = None
    F: tuple

    @property
    def order(self) -> int:
        return len(self.nu) - 1

    @property
    def lam_m1(self) -> float:
        return self.params.lambdaMinus1

    @property
    def y1(self) -> np.ndarray:
        return self.nu[0].grid

    def nu_sum(self, y1, eps, N=None, order=0):
        N = self.order if N is None else N
        e = eps ** (2.0 / 3.0)
        return sum(e**n * self.nu[n].evaluate(y1, order) for n in range(N + 1))

    def lam_sum(self, y1, eps, N=None, order=0):
        """Truncated sum over n = -1..N of eps^(2n/3) lambda_n."""
        N = self.order if N is None else N
        e = eps ** (2.0 / 3.0)
        out = sum(e**n * self.lam[n].evaluate(y1, order) for n in range(N + 1))
        if order == 0:
            out = out + self.lam_m1 / e
        return out

    def to_csv(self, path, n):
        import csv

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("y1", "nu_n", "lam_n"))
            for row in zip(self.y1, self.nu[n].values, self.lam[n].values):
                w.writerow([repr(float(v)) for v in row])


def y_scale(p: ModelParams) -> float:
    """Factor k with y = k y1 mapping the inner variable to the Painleve variable."""
    return p.Gamma2 ** (1.0 / 3.0) / p.R1 ** (2.0 / 3.0)


def nu0(p: ModelParams, gamma0: TabulatedFunction) -> TabulatedFunction:
    amp = p.R1 ** (1.0 / 3.0) * p.Gamma2 ** (1.0 / 3.0) / np.sqrt(2 * p.alpha1 * p.Gamma12)
    return gamma0.rescaled(amp, y_scale(p), "nu0")


def nu0_residual(p: ModelParams, nu: TabulatedFunction):
    y, v = nu.grid, nu.values
    h = y[1] - y[0]
    return (
        4 * p.R1**2 * (v[2:] - 2 * v[1:-1] + v[:-2]) / h**2
        + p.Gamma2 * y[1:-1] * v[1:-1]
        - 2 * p.alpha1 * p.Gamma12 * v[1:-1] ** 3
    )


def jet_order(n: int, N: int) -> int:
    """Derivative order carried for nu_n and lam_n when the hierarchy stops at N.

    delta_m uses second derivatives of lam_k for k < m, so each order down
    needs two more derivatives; two spare rows give d1 and d2 for tables.
    """
    return 2 * (N - n) + 2


def _nu0_jet(p: ModelParams, nu: TabulatedFunction, yj):
    a = 4 * p.R1**2
    c = 2 * p.alpha1 * p.Gamma12

    def rhs(f):
        return (c * jets.mul(f, f, f) - p.Gamma2 * jets.mul(yj, f)) / a

    known = np.stack([nu.values, nu.d1])
    return jets.extend_by_ode(known, rhs, jets.order(yj))


def _table(y, jet, left, right, name):
    return TabulatedFunction(y, jet[0], jet[1], jet[2], left, right, name)


def _lam0_jet(p: ModelParams, v0, yj):
    return jets.add(yj / (2 * p.alpha2), -p.alpha0 / p.alpha2 * jets.mul(v0, v0))


def _W_jet(p: ModelParams, v0, yj):
    return jets.add(6 * p.alpha1 * p.Gamma12 * jets.mul(v0, v0), -p.Gamma2 * yj)


class _LamJets:
    """lambda_k jets for k >= -1, with lambda_{-1} the constant lambdaMinus1."""

    def __init__(self, p, lam, n_nodes):
        self.lam = lam
        self.const = jets.constant(p.lambdaMinus1, 2, n_nodes)
        self.const[1:] = 0.0

    def v(self, k, K):
        if k == -1:
            out = np.zeros((K + 1, self.const.shape[1]))
            out[0] = self.const[0]
            return out
        return self.lam[k][: K + 1]

    def d(self, k, j, K):
        if k == -1:
            return np.zeros((K + 1, self.const.shape[1]))
        return jets.deriv(self.lam[k], j)[: K + 1]


def delta_n(p: ModelParams, n: int, nu, lam, yj, K=0):
    """Jet of delta_n, the sum of every order-n term free of lam_n and nu_n.

    ``nu`` and ``lam`` are jets of orders 0..n-1; the result has order K.
    """
    L = _LamJets(p, lam, yj.shape[1])
    R1s, d = p.R1**2, p.d
    y = yj[: K + 1]
    mul = jets.mul
    out = np.zeros((K + 1, yj.shape[1]))
    # first-derivative and curvature terms with weight eps^2 and eps^(4/3)
    for n1 in range(-1, n):
        n2 = n - 3 - n1
        if -1 <= n2 <= n - 1:
            out += -d * mul(L.d(n1, 1, K), L.v(n2, K))
            out += -2 * mul(y, L.d(n1, 2, K), L.v(n2, K))
            out += mul(y, L.d(n1, 1, K), L.d(n2, 1, K))
    for n1 in range(-1, n):
        n2 = n - 2 - n1
        if -1 <= n2 <= n - 1:
            out += 2 * R1s * mul(L.d(n1, 2, K), L.v(n2, K))
            out += -R1s * mul(L.d(n1, 1, K), L.d(n2, 1, K))
            out += mul(y, L.v(n1, K), L.v(n2, K))
    for n1 in range(0, n):
        n2 = n - 1 - n1
        if 0 <= n2 <= n - 1:
            out += p.gap * mul(L.v(n1, K), L.v(n2, K))
    for n1, n2 in product(range(-1, n), repeat=2):
        n3 = n - 2 - n1 - n2
        if -1 <= n3 <= n - 1:
            out += -2 * p.alpha2 * mul(L.v(n1, K), L.v(n2, K), L.v(n3, K))
    for n3, n4 in product(range(0, n), repeat=2):
        rest = n - 2 - n3 - n4
        for n1 in range(-1, rest + 2):
            n2 = rest - n1
            if n2 >= -1:
                out += -2 * p.alpha0 * mul(L.v(n1, K), L.v(n2, K), nu[n3][: K + 1], nu[n4][: K + 1])
    return out


def source_n(p: ModelParams, n: int, nu, lam, delta, yj):
    """Jet of the right-hand side F_n of T nu_n = F_n, to the order of ``delta``."""
    K = jets.order(delta)
    mul = jets.mul
    out = -4 * p.alpha0 * p.alpha2 / p.gap**2 * mul(nu[0], delta)
    out -= 2 * p.d * jets.deriv(nu[n - 1], 1)[: K + 1]
    out -= 4 * mul(yj, jets.deriv(nu[n - 1], 2), K=K)
    for n1, n2 in product(range(n), repeat=2):
        n3 = n - n1 - n2
        if 0 <= n3 <= n - 1:
            out -= 2 * p.alpha1 * mul(nu[n1], nu[n2], nu[n3], K=K)
    for n1 in range(1, n):
        out -= 2 * p.alpha0 * mul(lam[n1], nu[n - n1], K=K)
    return out


def nu_right_exponent(n, d):
    return n - 2.5 - (3 if (d == 1 and n == 1) else 0)


def inner_step(p: ModelParams, n: int, nu, lam, Wj, yj, K):
    """Jets (nu_n, lam_n, delta_n, F_n) of order K from the jets of orders 0..n-1."""
    if n < 1 or len(nu) < n or len(lam) < n:
        raise ValueError("need n >= 1 and all lower orders")
    y = yj[0]
    h = y[1] - y[0]
    a = 4 * p.R1**2
    delta = delta_n(p, n, nu, lam, yj, K)
    F = source_n(p, n, nu, lam, delta, yj)
    w = Wj[0]
    slope = fd.exp_tail_slope(y[0], correction_left_exponent(n), y_scale(p) ** 1.5 / 3.0)
    v = fd.solve_robin_left(h, a, w, F[0], slope, F[0, -1] / w[-1])
    known = np.stack([v, fd.deriv1_4(v, h)])
    known[1, 0] = slope * v[0]
    vj = jets.extend_by_ode(known, lambda f: (jets.mul(Wj, f) - F[: jets.order(f) + 1]) / a, K)
    vj[:, -1] = fd.power_tail_rows(v[-1], y[-1], nu_right_exponent(n, p.d), K)
    lj = -2 * p.alpha0 / p.alpha2 * jets.mul(nu[0], vj, K=K) + 2 * p.alpha2 / p.gap**2 * delta
    return vj, lj, delta, F


def _nu_table(p, n, y, vj):
    k32 = y_scale(p) ** 1.5
    return _table(
        y, vj,
        fit_exp_tail(y, vj[0], correction_left_exponent(n), k32 / 3.0, "left"),
        fit_power_tail(y, vj[0], nu_right_exponent(n, p.d), "right"),
        f"nu{n}",
    )


def _lam_table(p, n, y, lj):
    if n == 0:
        left = Tail("power", 1.0, (-1.0 / (2 * p.alpha2),))
        return _table(y, lj, left, fit_power_tail(y, lj[0], 1.0, "right"), "lam0")
    return _table(
        y, lj,
        fit_power_tail(y, lj[0], n - 2.0, "left"),
        fit_power_tail(y, lj[0], n - 2.0, "right"),
        f"lam{n}",
    )


def inner_residual(p: ModelParams, hier: InnerHierarchy, n: int):
    y = hier.y1
    h = y[1] - y[0]
    return fd.dirichlet_residual(h, 4 * p.R1**2, hier.W.values, hier.F[n], hier.nu[n].values)


def inner_hierarchy(p: ModelParams, gamma0: TabulatedFunction, N=3) -> InnerHierarchy:
    v0tab = nu0(p, gamma0)
    y = v0tab.grid
    yj = jets.variable(y, jet_order(0, N))
    v0 = _nu0_jet(p, v0tab, yj)
    Wj = _W_jet(p, v0, yj)
    nu, lam = [v0], [_lam0_jet(p, v0, yj)]
    deltas, Fs = [None], [None]
    for n in range(1, N + 1):
        a, b, dl, F = inner_step(p, n, nu, lam, Wj, yj, jet_order(n, N))
        nu.append(a)
        lam.append(b)
        deltas.append(dl[0])
        Fs.append(F[0])
    W = _table(y, Wj, Tail("power", 1.0, (p.Gamma2,)), Tail("power", 1.0, (2 * p.Gamma2,)), "W")
    nut = tuple(_nu_table(p, n, y, j) for n, j in enumerate(nu))
    nut = (v0tab,) + nut[1:]
    lamt = tuple(_lam_table(p, n, y, j) for n, j in enumerate(lam))
    return InnerHierarchy(p, nut, lamt, W, tuple(deltas), tuple(Fs))


def leading_coefficients(p: ModelParams, d: int, n: int):
    """Closed-form right/left leading tail coefficients (N_n0, L_n0, Ltilde_n0).

    nu_n ~ N_n0 y1^(n-5/2) and lam_n ~ L_n0 y1^(n-2) as y1 -> +inf,
    lam_n ~ Ltilde_n0 y1^(n-2) as y1 -> -inf.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    a0, a1, a2 = p.alpha0, p.alpha1, p.alpha2
    G1, G2, G12 = p.Gamma1, p.Gamma2, p.Gamma12
    R1s, gap = p.R1**2, p.gap
    if n == 1:
        N = (1 - d) / (2 * np.sqrt(2 * a1 * G2 * G12))
        L = a0 * (d - 1) / (2 * a1 * a2 * G12)
        return N, L, 0.0
    K = -G1 / (G12 * gap)
    bracket = G12 * gap * (n + d - 2) + G1 * R1s * (n - 1)
    N = K**n * a0 * bracket / (2 * a2 * G1 * np.sqrt(2 * a1 * G12 * G2))
    L = -(K**n) * bracket / (2 * a2 * G1 * G12)
    Lt = (-1) ** (n + 1) / (2 * a2 * gap**n) * ((d - 2 + n) * gap + (n - 1) * R1s)
    return N, L, Lt


def delta_leading(p: ModelParams, d: int, n: int):
    """(D_n0, Dtilde_n0): delta_n ~ D y1^(n-2) on the right, Dtilde y1^(n-2) on the left.

    delta_1 is proportional to lam_0'' and decays like y1^-4, so both vanish for n = 1.
    """
    if n == 1:
        return 0.0, 0.0
    _, L, Lt = leading_coefficients(p, d, n)
    return L * p.gap**2 * p.Gamma12 / (2 * p.alpha2), Lt * p.gap**2 / (2 * p.alpha2)


def source_leading(p: ModelParams, d: int, n: int):
    """F_n0 with F_n ~ F_n0 y1^(n-3/2)."""
    if n == 1:
        # only the curvature terms of nu_0 ~ c sqrt(y1) survive
        return np.sqrt(p.Gamma2 / (2 * p.alpha1 * p.Gamma12)) * (1 - d)
    D, _ = delta_leading(p, d, n)
    return -4 * p.alpha0 * p.alpha2 / p.gap**2 * np.sqrt(p.Gamma2 / (2 * p.alpha1 * p.Gamma12)) * D


def d1_subleading(p: ModelParams):
    """(N_11, L_11) for d = 1, where the y1^(-3/2) and y1^(-1) terms vanish."""
    a0, a1, a2 = p.alpha0, p.alpha1, p.alpha2
    G2, G12, R1s, gap = p.Gamma2, p.Gamma12, p.R1**2, p.gap
    N11 = -6 * R1s / np.sqrt(2 * a1 * G12 * G2) * (a0**2 * R1s / (a1 * a2 * gap * G12) - 5 / (4 * G2))
    L11 = 3 * a0 * R1s / (2 * a1 * a2 * G12) * (4 * R1s / (gap * G12) - 5 / G2)
    return N11, L11


def fit_leading(x, f, exponent, lo, hi, step=3.0, n_terms=2):
    """Least-squares fit of f ~ x^p (c0 + c1 x^-step + ...) on lo <= |x| <= hi; returns c0."""
    mask = (np.abs(x) >= lo) & (np.abs(x) <= hi)
    a = np.abs(x[mask])
    A = np.stack([a ** (exponent - step * k) for k in range(n_terms)], axis=1)
    c, *_ = np.linalg.lstsq(A, f[mask], rcond=None)
    return float(c[0])
