"""Sampled functions of one variable with analytic tails beyond the grid.

Inside the grid a function is evaluated by quintic Hermite interpolation of
its value and first two derivatives, so the interpolant is C^2 and can be
fed to finite-difference stencils on another grid without spurious kinks.
Outside the grid one of two tail shapes is used:

* ``power``: |x|^p * sum_k c_k |x|^(-q k)
* ``exp``:   c |x|^p exp(-kappa |x|^(3/2))   (Airy type decay)
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np


@dataclass(frozen=True)
class Tail:
    kind: str = "power"
    exponent: float = 0.0
    coeffs: tuple = (0.0,)
    step: float = 3.0
    kappa: float = 0.0

    @property
    def coeff(self) -> float:
        return float(self.coeffs[0])

    def _radial(self, a, order):
        # derivatives with respect to a = |x|
        a = np.asarray(a, dtype=float)
        if self.kind == "power":
            out = np.zeros_like(a)
            for k, c in enumerate(self.coeffs):
                e = self.exponent - self.step * k
                if order == 0:
                    out += c * a**e
                elif order == 1:
                    out += c * e * a ** (e - 1)
                else:
                    out += c * e * (e - 1) * a ** (e - 2)
            return out
        if self.kind == "exp":
            p, kap = self.exponent, self.kappa
            g = self.coeff * a**p * np.exp(-kap * a**1.5)
            if order == 0:
                return g
            s = p / a - 1.5 * kap * np.sqrt(a)
            if order == 1:
                return g * s
            return g * (s**2 - p / a**2 - 0.75 * kap / np.sqrt(a))
        if self.kind == "zero":
            return np.zeros_like(a)
        raise ValueError(f"unknown tail kind {self.kind!r}")

    def evaluate(self, x, side, order=0):
        x = np.asarray(x, dtype=float)
        val = self._radial(np.abs(x), order)
        if side == "left" and order == 1:
            val = -val
        return val

    def rescaled(self, amp, k, side):
        """Tail of amp * f(k x) for k > 0."""
        if self.kind == "power":
            coeffs = tuple(
                amp * c * k ** (self.exponent - self.step * j) for j, c in enumerate(self.coeffs)
            )
            return replace(self, coeffs=coeffs)
        if self.kind == "exp":
            return replace(
                self,
                coeffs=(amp * self.coeff * k**self.exponent,),
                kappa=self.kappa * k**1.5,
            )
        return self


def _hermite5(t, h, f0, g0, c0, f1, g1, c1, order):
    t2 = t * t
    t3 = t2 * t
    t4 = t3 * t
    t5 = t4 * t
    if order == 0:
        b = (
            1 - 10 * t3 + 15 * t4 - 6 * t5,
            t - 6 * t3 + 8 * t4 - 3 * t5,
            0.5 * (t2 - 3 * t3 + 3 * t4 - t5),
            10 * t3 - 15 * t4 + 6 * t5,
            -4 * t3 + 7 * t4 - 3 * t5,
            0.5 * (t3 - 2 * t4 + t5),
        )
        scale = 1.0
    elif order == 1:
        b = (
            -30 * t2 + 60 * t3 - 30 * t4,
            1 - 18 * t2 + 32 * t3 - 15 * t4,
            0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t4),
            30 * t2 - 60 * t3 + 30 * t4,
            -12 * t2 + 28 * t3 - 15 * t4,
            0.5 * (3 * t2 - 8 * t3 + 5 * t4),
        )
        scale = 1.0 / h
    else:
        b = (
            -60 * t + 180 * t2 - 120 * t3,
            -36 * t + 96 * t2 - 60 * t3,
            0.5 * (2 - 18 * t + 36 * t2 - 20 * t3),
            60 * t - 180 * t2 + 120 * t3,
            -24 * t + 84 * t2 - 60 * t3,
            0.5 * (6 * t - 24 * t2 + 20 * t3),
        )
        scale = 1.0 / h**2
    val = b[0] * f0 + h * b[1] * g0 + h * h * b[2] * c0
    val += b[3] * f1 + h * b[4] * g1 + h * h * b[5] * c1
    return val * scale


@dataclass(frozen=True)
class TabulatedFunction:
    grid: np.ndarray
    values: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    left: Tail = field(default_factory=lambda: Tail("zero"))
    right: Tail = field(default_factory=lambda: Tail("zero"))
    name: str = ""

    def __post_init__(self):
        n = len(self.grid)
        if not (len(self.values) == len(self.d1) == len(self.d2) == n):
            raise ValueError("grid and tables must have equal lengths")
        if n < 2 or np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        for a in (self.grid, self.values, self.d1, self.d2):
            a.setflags(write=False)

    @property
    def lo(self) -> float:
        return float(self.grid[0])

    @property
    def hi(self) -> float:
        return float(self.grid[-1])

    def __call__(self, x):
        return self.evaluate(x, 0)

    def derivative(self, x, order=1):
        return self.evaluate(x, order)

    def evaluate(self, x, order=0):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        out = np.empty_like(x)
        g = self.grid
        inside = (x >= g[0]) & (x <= g[-1])
        if np.any(inside):
            xi = x[inside]
            i = np.clip(np.searchsorted(g, xi, side="right") - 1, 0, len(g) - 2)
            h = g[i + 1] - g[i]
            t = (xi - g[i]) / h
            out[inside] = _hermite5(
                t, h,
                self.values[i], self.d1[i], self.d2[i],
                self.values[i + 1], self.d1[i + 1], self.d2[i + 1],
                order,
            )
        lmask = x < g[0]
        if np.any(lmask):
            out[lmask] = self.left.evaluate(x[lmask], "left", order)
        rmask = x > g[-1]
        if np.any(rmask):
            out[rmask] = self.right.evaluate(x[rmask], "right", order)
        return out[0] if scalar else out

    def stitch_error(self):
        """Relative mismatch between the tables and the tails at both grid ends."""
        errs = []
        for side, tail, idx in (("left", self.left, 0), ("right", self.right, -1)):
            if tail.kind == "zero":
                errs.append(abs(self.values[idx]))
                continue
            tv = tail.evaluate(self.grid[idx], side)
            errs.append(abs(tv - self.values[idx]) / max(abs(tv), abs(self.values[idx]), 1e-300))
        return tuple(float(e) for e in errs)

    def rescaled(self, amp: float, k: float, name: str = "") -> "TabulatedFunction":
        """Return x -> amp * f(k x), for k > 0."""
        return TabulatedFunction(
            self.grid / k,
            amp * self.values,
            amp * k * self.d1,
            amp * k * k * self.d2,
            self.left.rescaled(amp, k, "left"),
            self.right.rescaled(amp, k, "right"),
            name or self.name,
        )

    def to_csv(self, path, header=("y", "value", "d1", "d2")):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in zip(self.grid, self.values, self.d1, self.d2):
                w.writerow([repr(float(v)) for v in row])


def fit_power_tail(x, f, exponent, side):
    """Power tail with fixed exponent whose coefficient reproduces f at the end node."""
    j = 0 if side == "left" else -1
    a = abs(float(x[j]))
    c = float(f[j]) / a**exponent
    return Tail("power", exponent, (c,))


def fit_exp_tail(x, f, exponent, kappa, side="left"):
    j = 0 if side == "left" else -1
    a = abs(float(x[j]))
    c = float(f[j]) / (a**exponent * np.exp(-kappa * a**1.5))
    return Tail("exp", exponent, (c,), kappa=kappa)
